import numpy as np
import pytest

from dmiw.dmiw1d import interworld_force
from dmiw.experiments import (AXES, BranchedEnsemble, ChainConfig, DetectorSpec, DoubleSlitConfig, Group,
                              apply_detector, chunk_generators, detector_wavefunction_check, evolve_free_batch,
                              fringe_contrast, group_forces, ks_distance, recombine_branches, run_double_slit,
                              run_sg_chain_absorber, run_sg_chain_fluxconserving, sparsity_metrics,
                              stage_count_estimate)


def test_stage_count_examples():
    assert stage_count_estimate(1e-4, 1.6e-35) == 103
    assert stage_count_estimate(1.0, 1.0) == 0
    assert stage_count_estimate(8.0, 1.0) == 3
    assert stage_count_estimate(1.0, 2.0) == 0
    with pytest.raises(ValueError):
        stage_count_estimate(0.0, 1.0)


def test_chunk_streams_are_fixed_by_seed():
    a = [g.random(3) for g, _ in chunk_generators(5, 1100)]
    b = [g.random(3) for g, _ in chunk_generators(5, 1100)]
    assert len(a) == 3 and all(np.array_equal(x, y) for x, y in zip(a, b))
    assert [n for _, n in chunk_generators(5, 1100)] == [512, 512, 76]


def test_batch_evolution_matches_row_by_row():
    rng = np.random.default_rng(0)
    X = np.sort(rng.normal(size=(4, 5)), axis=1)
    xb, _ = evolve_free_batch(X, 1.0, 0.3)
    for r in range(4):
        x1, _ = evolve_free_batch(X[r:r + 1], 1.0, 0.3)
        assert x1[0] == pytest.approx(xb[r], rel=1e-12)
    assert np.all(np.diff(xb, axis=1) > 0)


def test_ks_distance_of_exact_quantiles_is_small():
    u = (np.arange(1000) + 0.5) / 1000
    assert ks_distance(u, lambda x: x) == pytest.approx(0.0005)


def test_fringe_contrast_of_known_patterns():
    rng = np.random.default_rng(1)
    p = 1.0
    z = rng.uniform(-p, p, 400000)
    keep = rng.random(z.size) < 0.5 * (1 + 0.6 * np.cos(2 * np.pi * z / p))
    assert fringe_contrast(z[keep], p) == pytest.approx(0.6, abs=0.01)
    assert fringe_contrast(z, p) < 0.01


def test_double_slit_single_world_reproduces_the_slits():
    out = run_double_slit(DoubleSlitConfig(K=1, runs=2000, seed=3))
    assert out.metrics["ks_initial"] < 0.05
    edges, dens = out.histogram
    assert np.sum(dens * np.diff(edges)) == pytest.approx(1.0, abs=1e-9)


def test_double_slit_is_thread_count_independent():
    cfg = DoubleSlitConfig(K=3, runs=1500, seed=9)
    a = run_double_slit(cfg, threads=1).final_positions
    b = run_double_slit(cfg, threads=3).final_positions
    assert np.array_equal(a, b)


def test_mirrored_streams_give_symmetric_histogram():
    out = run_double_slit(DoubleSlitConfig(K=2, runs=1000, seed=2, mirrored=True))
    x = np.sort(out.final_positions)
    assert x == pytest.approx(-x[::-1], abs=1e-15)


def test_detector_spec_validation():
    with pytest.raises(ValueError):
        DetectorSpec((0, 1), (0.5, 2), 1.0)
    with pytest.raises(ValueError):
        DetectorSpec((0, 1), (2, 3), 0.0)


def group(z, x=(0.0,), y=(0.0,), record=()):
    lv = {a: (np.asarray(v, float), np.zeros(len(v))) for a, v in zip(AXES, (x, y, z))}
    return Group(record, lv)


def test_detector_records_and_ledger():
    br = BranchedEnsemble([group([-3.0, -2.0, 2.0, 3.0, 4.0])], 1.0)
    det = DetectorSpec((0.0, np.inf), (-np.inf, -1e-9), 0.5)
    out = apply_detector(br, det, 1)
    assert [g.record for g in out.groups] == [("U",), ("D",)]
    assert [g.ledger for g in out.groups] == [(0.5,), (-0.5,)]
    assert [g.count("z") for g in out.groups] == [3, 2]
    one = apply_detector(BranchedEnsemble([group([1.0, 2.0])], 1.0), det, 1)
    assert len(one.groups) == 1 and one.groups[0].record == ("U",)


def test_detector_warns_about_unregistered_worlds():
    det = DetectorSpec((1.0, 2.0), (-2.0, -1.0), 0.5)
    with pytest.warns(RuntimeWarning):
        out = apply_detector(BranchedEnsemble([group([-1.5, 0.0, 1.5])], 1.0), det, 2)
    assert sorted(g.record for g in out.groups) == [(), ("D",), ("U",)]


def test_forces_are_local_to_groups():
    a, b = group([-2.0, -1.0]), group([1.0, 2.0])
    F = group_forces(BranchedEnsemble([a, b], 1.0), "z")
    assert F[0] == pytest.approx(interworld_force(np.array([-2.0, -1.0]), 1.0))
    assert F[1] == pytest.approx(interworld_force(np.array([1.0, 2.0]), 1.0))


def test_recombination_is_rigid():
    g = Group(("U",), {"x": (np.zeros(1), np.zeros(1)), "y": (np.zeros(1), np.zeros(1)),
                       "z": (np.array([4.0, 5.0, 7.0]), np.array([1.0, 2.0, 3.0]))})
    out = recombine_branches(BranchedEnsemble([g], 1.0)).groups[0]
    z, v = out.levels["z"]
    assert z.mean() == pytest.approx(0.0) and v.mean() == pytest.approx(0.0)
    assert np.diff(z) == pytest.approx([1.0, 2.0]) and out.record == ("U",)


def test_absorber_chain_halves_the_worlds():
    hist, br = run_sg_chain_absorber(ChainConfig(stages=3, I=8, J=1, K=8))
    assert [r["K"] for r in hist] == [64, 32, 16, 8]
    assert all(r["K"] + r.get("absorbed", 0) == 64 for r in hist)
    assert [r["axis"] for r in hist[1:]] == ["z", "x", "z"]


def test_absorber_chain_runs_down_to_one_world():
    with pytest.warns(RuntimeWarning):
        hist, br = run_sg_chain_absorber(ChainConfig(stages=4, I=2, J=1, K=4))
    assert [r["K"] for r in hist] == [8, 4, 2, 1, 1]


def test_absorber_chain_warns_when_too_small():
    with pytest.warns(RuntimeWarning):
        run_sg_chain_absorber(ChainConfig(stages=3, I=2, J=1, K=2))


def test_flux_chain_keeps_every_world():
    hist, br = run_sg_chain_fluxconserving(ChainConfig(stages=3, I=1, J=1, K=16, axes="z"))
    assert [r["K"] for r in hist] == [16] * 4
    assert [r["groups"] for r in hist] == [1, 2, 4, 8]
    assert len({g.record for g in br.groups}) == 8
    assert all(len(g.ledger) == 3 for g in br.groups)


def test_flux_chain_exhausts_at_one_world_per_group():
    hist, br = run_sg_chain_fluxconserving(ChainConfig(stages=4, I=1, J=1, K=4, axes="z"))
    assert [r["groups"] for r in hist] == [1, 2, 4, 4, 4]
    assert sum(g.n_worlds for g in br.groups) == 4


def test_sparsity_metrics_growth_of_an_ideal_chain():
    hist = [{"stage": j, "K": 64 >> j, "groups": 1, "spacing_x": 2.0 ** (j // 2), "spacing_y": np.nan,
             "spacing_z": 2.0 ** ((j + 1) // 2), **({"axis": "zx"[(j - 1) % 2]} if j else {})}
            for j in range(4)]
    m = sparsity_metrics(hist)
    assert m["growth_log2_per_stage"] == pytest.approx(1.0)
    assert m["split_axes"] == ["x", "z"]
    assert [r["ratio"] for r in m["table"][1:]] == pytest.approx([2.0, 2.0, 2.0])
    with pytest.raises(ValueError):
        sparsity_metrics(hist[:1])


def test_detector_wavefunction_displacement():
    r = detector_wavefunction_check()
    assert r["shift_up"] == pytest.approx(r["expected"], abs=0.02 * r["dzd"])
    assert r["shift_down"] == pytest.approx(-r["expected"], abs=0.02 * r["dzd"])
    assert r["norm"] == pytest.approx(1.0, abs=1e-9)
