"""Experiment drivers: sparse-world double slit, Stern-Gerlach stages and chains,
detector records, and sparsity metrics.

Configurations are given in SI units; everything runs internally in the
millimetre unit system (hbar = 1, electron masses, mm).
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import oracle
from .core import (HBAR, M_E, MM, SILVER_MASS_ME, InsufficientSeparation, OrderingBreach,
                   RunSummary, normalized_histogram)
from .dmiw1d import ETA, interworld_force, stable_dt
from .sampling import CdfSampler, fd_consistency_study, sample_worlds
from .spin_grid import (SGField, SpinLevels, SpinGridIntegrator, classify_branches, mean_spacing,
                        median_split)
from .core import Ensemble1D

SILVER_MASS = SILVER_MASS_ME * M_E
CHUNK = 512
MAX_HALVINGS = 20


def stage_count_estimate(packet_width, initial_spacing):
    """Number of halvings of the world density needed to spread worlds to the packet width."""
    if not (packet_width > 0 and initial_spacing > 0):
        raise ValueError("width and spacing must be positive")
    if packet_width <= initial_spacing:
        return 0
    return int(math.ceil(math.log2(packet_width / initial_spacing) - 1e-12))


def default_threads():
    import os
    return os.cpu_count() or 1


def _map(fn, items, threads):
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def chunk_generators(seed, n_items, chunk=CHUNK):
    """One Philox stream per fixed-size chunk, so results do not depend on the thread count."""
    n_chunks = max(1, -(-n_items // chunk))
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(chunk, n_items - i * chunk) for i in range(n_chunks)]
    return [(np.random.Generator(np.random.Philox(s)), n) for s, n in zip(seqs, sizes)]


# ---------------------------------------------------------------- double slit

@dataclass(frozen=True)
class DoubleSlitConfig:
    K: int = 1
    runs: int = 20000
    mass: float = SILVER_MASS
    separation: float = 5e-5
    slit_width: float = 1e-5
    slit_sigma: float | None = None
    transit_time: float = 0.5
    seed: int = 0
    eta: float = ETA
    bins: int | None = None
    mirrored: bool = False

    @property
    def sigma_s(self):
        return self.slit_sigma if self.slit_sigma is not None else 0.5 * self.slit_width


class DoubleSlitSetup:
    """Internal-unit quantities shared by the DMIW runs and the oracle run."""

    def __init__(self, cfg, units=MM):
        self.cfg = cfg
        self.units = units
        self.m = units.to_internal(cfg.mass, "mass")
        self.sep = units.to_internal(cfg.separation, "length")
        self.ss = units.to_internal(cfg.sigma_s, "length")
        self.T = units.to_internal(cfg.transit_time, "time")
        a = 0.5 * self.sep
        self.a = a
        self.tau = self.T / (2 * self.m * self.ss**2)
        self.sigma_T = self.ss * math.sqrt(1 + self.tau**2)
        self.period = 2 * math.pi * self.ss**2 * (1 + self.tau**2) / (self.tau * a)
        span = a + 12 * self.ss
        self.psi0, self.rho0 = oracle.doubleslit_initial(self.sep, self.ss, self.m,
                                                          L=max(2 * span, 2 * (a + 14 * self.sigma_T)))
        self.sampler = CdfSampler(self.rho0, -span, span, mode="random")
        self.hist_range = (-(a + 4 * self.sigma_T), a + 4 * self.sigma_T)
        if cfg.bins is None:
            w = self.period / 16 if self.period < self.hist_range[1] else self.ss / 4
            self.bins = int(2 * math.ceil(self.hist_range[1] / w))
        else:
            self.bins = cfg.bins

    def initial_cdf(self, z):
        return self.sampler.cdf_at(z)


def evolve_free_batch(x, mass, T, eta=ETA):
    """Free DMIW for a batch of independent ensembles (rows), each with its own adaptive dt."""
    x = np.array(x, dtype=float)
    R, K = x.shape
    v = np.zeros_like(x)
    if K < 2 or T <= 0:
        return x + T * v, v
    a = interworld_force(x, mass) / mass
    t = np.zeros(R)
    active = np.arange(R)
    n = 0
    while active.size:
        xa, va, aa = x[active], v[active], a[active]
        remaining = T - t[active]
        dt = np.minimum(stable_dt(xa, mass, eta, 1.0, va), remaining)
        for _ in range(MAX_HALVINGS + 1):
            vh = va + 0.5 * dt[:, None] * aa
            xn = xa + dt[:, None] * vh
            bad = np.any(np.diff(xn, axis=1) <= 0, axis=1)
            if not bad.any():
                break
            dt = np.where(bad, 0.5 * dt, dt)
        else:
            raise OrderingBreach(n)
        an = interworld_force(xn, mass) / mass
        x[active], a[active], v[active] = xn, an, vh + 0.5 * dt[:, None] * an
        done = dt >= remaining
        t[active] = np.where(done, T, t[active] + dt)
        active = active[~done]
        n += 1
    return x, v


def _double_slit_chunk(args):
    setup, rng, n, K = args
    u = rng.random((n, K))
    x0 = np.sort(setup.sampler.quantile(u), axis=1)
    if setup.cfg.mirrored:
        x0 = np.concatenate([x0, -x0[:, ::-1]])
    try:
        xf, _ = evolve_free_batch(x0, setup.m, setup.T, setup.cfg.eta)
    except OrderingBreach as e:
        raise OrderingBreach(e.step, f"ordering violated in a run of this chunk at step {e.step}") from None
    return xf.ravel()


def ks_distance(samples, cdf):
    s = np.sort(np.ravel(samples))
    n = s.size
    F = cdf(s)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def fringe_contrast(samples, period, center=0.0):
    """Fringe visibility from the first cosine moment of the samples.

    Over the window |z - center| < period, a density A + B cos(2 pi z / period)
    has B/A = 2 <cos(2 pi z / period)>.  Estimating this from the samples avoids
    the upward bias of max/min over noisy histogram bins.  Negative values (a
    dip at the centre) are reported as zero.
    """
    z = np.ravel(samples) - center
    w = z[np.abs(z) < period]
    if w.size == 0:
        return 0.0
    return float(np.clip(2 * np.mean(np.cos(2 * np.pi * w / period)), 0.0, 1.0))


MAX_BINS = 2**15


COVERAGE = 0.995


def screen_range(final, setup):
    """Symmetric range holding at least 99.5% of the samples, never narrower than nominal.

    Sparse ensembles throw a few worlds very far, so covering every sample would
    leave the fringe region with only a handful of bins.
    """
    r = max(setup.hist_range[1], float(np.quantile(np.abs(final), COVERAGE)) * (1 + 1e-9))
    return (-r, r)


def screen_histogram(final, setup):
    """Normalized histogram at the nominal bin width over ``screen_range``."""
    r = screen_range(final, setup)[1]
    width = (setup.hist_range[1] - setup.hist_range[0]) / setup.bins
    bins = min(MAX_BINS, max(setup.bins, 2 * math.ceil(r / width)))
    return normalized_histogram(final, bins, (-r, r))


def run_double_slit(cfg, threads=None, units=MM):
    if cfg.K < 1 or cfg.runs < 1:
        raise ValueError("K and runs must be at least 1")
    setup = DoubleSlitSetup(cfg, units)
    gens = chunk_generators(cfg.seed, cfg.runs)
    parts = _map(_double_slit_chunk, [(setup, g, n, cfg.K) for g, n in gens], threads)
    final = np.concatenate(parts)
    edges, dens = screen_histogram(final, setup)
    metrics = {
        "K": cfg.K,
        "runs": cfg.runs,
        "fringe_contrast": fringe_contrast(final, setup.period),
        "ks_initial": ks_distance(final, setup.initial_cdf),
        "fringe_period_m": units.from_internal(setup.period, "length"),
        "screen_sigma_m": units.from_internal(setup.sigma_T, "length"),
        "outside_fraction": float(np.mean((final < edges[0]) | (final > edges[-1]))),
    }
    return RunSummary(units.from_internal(final, "length"), (units.from_internal(edges, "length"),
                      dens / units.scale("length")), metrics, seed=cfg.seed)


def run_oracle_double_slit(cfg, samples=None, units=MM):
    """Pilot-wave reference: propagate the wavefunction to the screen and carry
    Born-distributed starting points along the guidance flow."""
    setup = DoubleSlitSetup(cfg, units)
    psiT = oracle.propagate_schrodinger(setup.psi0, None, setup.T, 1)
    n = samples or cfg.runs * max(cfg.K, 10)
    rng = chunk_generators(cfg.seed, 1)[0][0]
    x0 = setup.sampler.quantile(rng.random(n))
    final = oracle.transport_by_cdf(setup.psi0, psiT, x0)
    edges, dens = screen_histogram(final, setup)
    metrics = {
        "samples": n,
        "fringe_contrast": fringe_contrast(final, setup.period),
        "norm": psiT.norm(),
        "fringe_period_m": units.from_internal(setup.period, "length"),
    }
    return RunSummary(units.from_internal(final, "length"), (units.from_internal(edges, "length"),
                      dens / units.scale("length")), metrics, seed=cfg.seed)


# ---------------------------------------------------------------- Stern-Gerlach

def sg_field_defaults(mass=SILVER_MASS, sigma=3e-5, strength=50.0, window=0.6):
    """Field gradient (T/m) and switch-off time (s) in natural units of the beam.

    strength is mu_B b in units of hbar^2/(m sigma^3), window in units of m sigma^2/hbar.
    """
    from .core import MU_B
    b = strength * HBAR**2 / (mass * sigma**3 * MU_B)
    t = window * mass * sigma**2 / HBAR
    return b, t


_B_DEF, _T_DEF = sg_field_defaults()
# a shorter window keeps the spin twist between neighbouring levels small on the wider,
# already expanded groups met in later chain stages
_B_CHAIN, _T_CHAIN = sg_field_defaults(strength=50.0, window=0.4)


@dataclass(frozen=True)
class SGConfig:
    I: int = 400
    J: int = 1
    K: int = 400
    c_up2: float = 0.5
    rel_phase: float = 0.0
    mass: float = SILVER_MASS
    sigma: float = 3e-5
    field_gradient: float = _B_DEF
    field_on: float = 0.0
    field_off: float = _T_DEF
    transit_time: float = _T_DEF
    eta: float = ETA
    scheme: str = "vector"
    min_gap_ratio: float = 5.0
    sampling: str = "stratified"
    seed: int = 0


def gaussian_levels(n, sigma, sampling="stratified", rng=None):
    if n == 1:
        return np.zeros(1)
    s = CdfSampler(lambda x: np.exp(-0.5 * (x / sigma) ** 2), -12 * sigma, 12 * sigma,
                   mode=sampling, seed=rng)
    return sample_worlds(s, n)


def _internal_sg(cfg, units):
    return dict(
        m=units.to_internal(cfg.mass, "mass"),
        sigma=units.to_internal(cfg.sigma, "length"),
        field=SGField(units.to_internal(cfg.field_gradient, "field_gradient"),
                      (units.to_internal(cfg.field_on, "time"), units.to_internal(cfg.field_off, "time"))),
        T=units.to_internal(cfg.transit_time, "time"),
        mu_b=units.mu_b,
    )


def run_sg_single(cfg, units=MM, return_state=False):
    p = _internal_sg(cfg, units)
    m, sig = p["m"], p["sigma"]
    rng = np.random.default_rng(cfg.seed)
    z0 = gaussian_levels(cfg.K, sig, cfg.sampling, rng)
    x0 = gaussian_levels(cfg.I, sig, cfg.sampling, rng)
    y0 = gaussian_levels(cfg.J, sig, cfg.sampling, rng)
    theta0 = 2 * np.arccos(np.sqrt(cfg.c_up2))
    levels = SpinLevels(z0, np.zeros(cfg.K), np.full(cfg.K, theta0), np.full(cfg.K, cfg.rel_phase))
    xs, ys = Ensemble1D.at_rest(x0, m), Ensemble1D.at_rest(y0, m)
    integ = SpinGridIntegrator(levels, (xs, ys), m, p["mu_b"], 1.0, cfg.scheme, cfg.eta)
    integ.run(p["field"], p["T"])
    lv = integ.levels()
    xf, yf = integ.free_ensembles()
    up, gap = classify_branches(lv.z, cfg.min_gap_ratio)
    cz = np.cos(lv.theta)
    zu, zd = lv.z[up], lv.z[~up]
    s0 = mean_spacing(z0)
    metrics = {
        "K": cfg.K,
        "K_up": int(up.sum()),
        "K_down": int((~up).sum()),
        "fraction_up": float(up.mean()),
        "gap_ratio": gap,
        "cos_up_min": float(cz[up].min()) if up.any() else np.nan,
        "cos_down_max": float(cz[~up].max()) if (~up).any() else np.nan,
        "cos_up_median": float(np.median(cz[up])) if up.any() else np.nan,
        "cos_down_median": float(np.median(cz[~up])) if (~up).any() else np.nan,
        "spacing_ratio_z_up": mean_spacing(zu) / s0 if zu.size > 1 else np.nan,
        "spacing_ratio_z_down": mean_spacing(zd) / s0 if zd.size > 1 else np.nan,
        "spacing_ratio_x": mean_spacing(xf.positions) / mean_spacing(x0) if cfg.I > 1 else np.nan,
        "spacing_ratio_y": mean_spacing(yf.positions) / mean_spacing(y0) if cfg.J > 1 else np.nan,
        "steps": integ.diag.steps,
        "theta_clamps": integ.diag.theta_clamps,
    }
    zf = units.from_internal(lv.z, "length")
    hist = normalized_histogram(zf, bins=max(10, cfg.K // 4))
    out = RunSummary(zf, hist, metrics, seed=cfg.seed)
    if return_state:
        return out, (lv, xf, yf, up)
    return out


# ---------------------------------------------------------------- branch records and chains

UP, DOWN = "U", "D"
AXES = ("x", "y", "z")


@dataclass(frozen=True)
class DetectorSpec:
    R_up: tuple
    R_down: tuple
    displacement: float
    window: tuple = (0.0, np.inf)

    def __post_init__(self):
        (a0, a1), (b0, b1) = self.R_up, self.R_down
        if not (a0 < a1 and b0 < b1):
            raise ValueError("detector regions must be non-empty intervals")
        if not (a1 <= b0 or b1 <= a0):
            raise ValueError("detector regions must be disjoint")
        if not self.displacement > 0:
            raise ValueError("displacement must be positive")

    def region(self, z):
        z = np.asarray(z, dtype=float)
        inu = (z >= self.R_up[0]) & (z <= self.R_up[1])
        ind = (z >= self.R_down[0]) & (z <= self.R_down[1])
        return inu, ind


@dataclass
class Group:
    """A rectangular sub-grid of worlds sharing one branch record.

    ``levels`` maps each axis name to (positions, velocities) arrays.
    """

    record: tuple
    levels: dict
    ledger: tuple = ()

    @property
    def n_worlds(self):
        return int(np.prod([len(self.levels[a][0]) for a in AXES]))

    def count(self, axis):
        return len(self.levels[axis][0])

    def spacing(self, axis):
        x = self.levels[axis][0]
        return mean_spacing(x) if len(x) > 1 else np.nan

    def subset(self, axis, mask):
        lv = dict(self.levels)
        x, v = lv[axis]
        lv[axis] = (x[mask], v[mask])
        return Group(self.record, lv, self.ledger)


@dataclass
class BranchedEnsemble:
    groups: list
    mass: float
    absorbed: int = 0

    @property
    def n_worlds(self):
        return sum(g.n_worlds for g in self.groups)


def group_forces(branched, axis, hbar=1.0):
    """Inter-world force on every level of every group, computed within the group only."""
    return [interworld_force(g.levels[axis][0], branched.mass, hbar) for g in branched.groups]


def apply_detector(branched, det, stage, axis="z"):
    new = []
    for g in branched.groups:
        x = g.levels[axis][0]
        inu, ind = det.region(x)
        neither = ~(inu | ind)
        if neither.any():
            warnings.warn(f"stage {stage}: {int(neither.sum())} levels outside both detector regions",
                          RuntimeWarning, stacklevel=2)
        if inu.any():
            h = g.subset(axis, inu)
            new.append(Group(g.record + (UP,), h.levels, g.ledger + (det.displacement,)))
        if ind.any():
            h = g.subset(axis, ind)
            new.append(Group(g.record + (DOWN,), h.levels, g.ledger + (-det.displacement,)))
        if neither.any():
            new.append(g.subset(axis, neither))
    return BranchedEnsemble(new, branched.mass, branched.absorbed)


def recombine_branches(branched, axis="z"):
    """Rigidly move each group back to the axis origin with zero mean velocity."""
    new = []
    for g in branched.groups:
        lv = dict(g.levels)
        x, v = lv[axis]
        lv[axis] = (x - x.mean(), v - v.mean())
        new.append(Group(g.record, lv, g.ledger))
    return BranchedEnsemble(new, branched.mass, branched.absorbed)


@dataclass(frozen=True)
class ChainConfig:
    stages: int = 3
    I: int = 8
    J: int = 1
    K: int = 8
    axes: str = "zx"
    mass: float = SILVER_MASS
    sigma: float = 3e-5
    field_gradient: float = _B_CHAIN
    field_on: float = 0.0
    field_off: float = _T_CHAIN
    stage_time: float = _T_CHAIN
    detector_displacement: float = 1e-3
    eta: float = ETA
    scheme: str = "vector"
    sampling: str = "stratified"
    seed: int = 0

    @property
    def K0(self):
        return self.I * self.J * self.K


def initial_branched(cfg, units=MM):
    m = units.to_internal(cfg.mass, "mass")
    sig = units.to_internal(cfg.sigma, "length")
    rng = np.random.default_rng(cfg.seed)
    lv = {}
    for a, n in zip(AXES, (cfg.I, cfg.J, cfg.K)):
        x = gaussian_levels(n, sig, cfg.sampling, rng)
        lv[a] = (x, np.zeros(n))
    return BranchedEnsemble([Group((), lv)], m)


def split_group(g, axis, p, cfg):
    """Run one analyzer stage on a group.

    Returns (group after transit, up mask on ``axis``).  Levels above the median
    plane at field-off are "up"; the mask is None for a single level, which
    feels no Zeeman force once its spin is re-prepared and so just coasts.
    """
    x, v = g.levels[axis]
    n = len(x)
    free_axes = [a for a in AXES if a != axis]
    frees = [Ensemble1D(*g.levels[a], p["m"]) for a in free_axes]
    lv = SpinLevels(x, v, np.full(n, np.pi / 2), np.zeros(n))
    integ = SpinGridIntegrator(lv, frees, p["m"], p["mu_b"], 1.0, cfg.scheme, cfg.eta)
    integ.run(p["field"], p["T"])
    out = integ.levels()
    new = {axis: (np.array(out.z), np.array(out.vz))}
    for a, e in zip(free_axes, integ.free_ensembles()):
        new[a] = (np.array(e.positions), np.array(e.velocities))
    moved = Group(g.record, new, g.ledger)
    return moved, (median_split(out.z) if n > 1 else None)


def _stage_row(stage, branched, units):
    """World and group counts, and the group-averaged mean spacing per axis in metres."""
    row = {"stage": stage, "K": branched.n_worlds, "groups": len(branched.groups)}
    for a in AXES:
        s = [g.spacing(a) for g in branched.groups if g.count(a) > 1]
        row[f"spacing_{a}"] = units.from_internal(float(np.mean(s)), "length") if s else np.nan
    return row


def _chain_params(cfg, units):
    return dict(
        m=units.to_internal(cfg.mass, "mass"),
        field=SGField(units.to_internal(cfg.field_gradient, "field_gradient"),
                      (units.to_internal(cfg.field_on, "time"), units.to_internal(cfg.field_off, "time"))),
        T=units.to_internal(cfg.stage_time, "time"),
        mu_b=units.mu_b,
    )


def run_sg_chain_absorber(cfg, units=MM, threads=None):
    """Each stage: split along the next axis, delete the down branch, re-prepare the spin."""
    if cfg.K0 < 2**cfg.stages:
        warnings.warn("fewer worlds than 2^stages; the chain will run out of worlds", RuntimeWarning)
    p = _chain_params(cfg, units)
    br = initial_branched(cfg, units)
    history = [_stage_row(0, br, units)]
    for j in range(1, cfg.stages + 1):
        axis = cfg.axes[(j - 1) % len(cfg.axes)]
        g = br.groups[0]
        moved, up = split_group(g, axis, p, cfg)  # a lone level just coasts
        if up is not None:
            absorbed = int((~up).sum()) * (g.n_worlds // g.count(axis))
            moved = moved.subset(axis, up)
            br = BranchedEnsemble([moved], br.mass, br.absorbed + absorbed)
        else:
            br = BranchedEnsemble([moved], br.mass, br.absorbed)
        br = recombine_branches(br, axis)
        row = _stage_row(j, br, units)
        row.update(axis=axis, absorbed=br.absorbed)
        history.append(row)
    return history, br


def run_sg_chain_fluxconserving(cfg, units=MM, threads=None):
    """Each stage: split every group, record the outcome with a detector, recombine, re-prepare."""
    p = _chain_params(cfg, units)
    br = initial_branched(cfg, units)
    history = [_stage_row(0, br, units)]
    disp = units.to_internal(cfg.detector_displacement, "length")
    for j in range(1, cfg.stages + 1):
        axis = cfg.axes[(j - 1) % len(cfg.axes)]
        results = _map(lambda g: split_group(g, axis, p, cfg), br.groups, threads)
        groups, ratios = [], []
        for g, (moved, up) in zip(br.groups, results):
            if up is None:
                groups.append(moved)
                continue
            x = moved.levels[axis][0]
            plane = 0.5 * (x[up].min() + x[~up].max())
            det = DetectorSpec((plane, np.inf), (-np.inf, np.nextafter(plane, -np.inf)), disp)
            sub = apply_detector(BranchedEnsemble([moved], br.mass), det, j, axis)
            for h in sub.groups:
                if h.count(axis) > 1 and g.count(axis) > 1:
                    ratios.append(h.spacing(axis) / g.spacing(axis))
            groups.extend(sub.groups)
        br = recombine_branches(BranchedEnsemble(groups, br.mass), axis)
        row = _stage_row(j, br, units)
        row.update(axis=axis, ratio_min=float(np.min(ratios)) if ratios else np.nan,
                   ratio_max=float(np.max(ratios)) if ratios else np.nan)
        history.append(row)
    return history, br


def sparsity_metrics(history, split_axes=None):
    """Per-stage table plus the fitted growth of the spacing along the splitting axes.

    The growth rate is the slope, per stage, of log2 of the product of the mean
    spacings along the axes that are split during the chain.
    """
    if len(history) < 2:
        raise ValueError("need at least one completed stage")
    if split_axes is None:
        split_axes = sorted({r["axis"] for r in history[1:] if "axis" in r})
    table = []
    prev = None
    for r in history:
        row = dict(r)
        if prev is not None and "axis" in r:
            a = r["axis"]
            row["ratio"] = r[f"spacing_{a}"] / prev[f"spacing_{a}"]
        else:
            row["ratio"] = np.nan
        table.append(row)
        prev = r
    st = np.array([r["stage"] for r in history], dtype=float)
    y = np.array([sum(np.log2(r[f"spacing_{a}"]) for a in split_axes) for r in history])
    ok = np.isfinite(y)
    rate = float(np.polyfit(st[ok], y[ok], 1)[0]) if ok.sum() >= 2 else np.nan
    return {"table": table, "growth_log2_per_stage": rate, "split_axes": split_axes}


# ---------------------------------------------------------------- reduced detector wavefunction check

def detector_wavefunction_check(displacement=0.2, sep=4.0, sigma=0.5, sigma_d=0.3, Mz=256, Md=512,
                                Lz=24.0, Ld=8.0, mass=1.0, duration=0.5, steps=200):
    """Two-coordinate (z, z_d) propagation of an already split spinor coupled to a pointer.

    H_int = lambda(t) diag(a w_up(z), -a w_down(z)) p_zd with a square pulse, so each
    component's pointer should move by +-lambda_0 a dt.  The heavy pointer's own
    kinetic term is dropped.  Returns the measured pointer shifts for the up and
    down components and the pointer-grid resolution.
    """
    z = -0.5 * Lz + Lz / Mz * np.arange(Mz)
    zd = -0.5 * Ld + Ld / Md * np.arange(Md)
    dz, dzd = z[1] - z[0], zd[1] - zd[0]
    kz = oracle.wavenumbers(Mz, dz)
    kd = oracle.wavenumbers(Md, dzd)
    rate = displacement / duration  # lambda_0 * a
    w_up = (z > 0).astype(float)
    w_dn = (z < 0).astype(float)
    D0 = oracle.gaussian_packet(zd, 0.0, sigma_d)
    up = oracle.gaussian_packet(z, sep, sigma)[:, None] * D0[None, :] / np.sqrt(2)
    dn = oracle.gaussian_packet(z, -sep, sigma)[:, None] * D0[None, :] / np.sqrt(2)
    dt = duration / steps
    kin = np.exp(-1j * kz**2 * dt / (2 * mass))[:, None]
    sh_up = np.exp(-1j * kd[None, :] * rate * dt * w_up[:, None])
    sh_dn = np.exp(+1j * kd[None, :] * rate * dt * w_dn[:, None])
    for _ in range(steps):
        up = np.fft.ifft(kin * np.fft.fft(up, axis=0), axis=0)
        dn = np.fft.ifft(kin * np.fft.fft(dn, axis=0), axis=0)
        up = np.fft.ifft(sh_up * np.fft.fft(up, axis=1), axis=1)
        dn = np.fft.ifft(sh_dn * np.fft.fft(dn, axis=1), axis=1)

    def pointer_mean(c):
        pd = np.sum(np.abs(c) ** 2, axis=0)
        return float(np.sum(zd * pd) / np.sum(pd))

    norm = float((np.sum(np.abs(up) ** 2) + np.sum(np.abs(dn) ** 2)) * dz * dzd)
    return {"shift_up": pointer_mean(up), "shift_down": pointer_mean(dn),
            "expected": displacement, "dzd": dzd, "norm": norm}


# ---------------------------------------------------------------- discrete-versus-continuum force study

@dataclass(frozen=True)
class FdConfig:
    K_list: tuple = (50, 100, 200, 400)
    mass: float = SILVER_MASS
    sigma: float = 3e-5
    window_lo: float = 0.1
    window_hi: float = 0.9


def run_fd_study(cfg, units=MM):
    """Gaussian density of width sigma; the inter-world force against -dQ/dz."""
    m = units.to_internal(cfg.mass, "mass")
    s = units.to_internal(cfg.sigma, "length")
    rho = lambda z: np.exp(-0.5 * (z / s) ** 2)
    return fd_consistency_study(rho, list(cfg.K_list), -10 * s, 10 * s, m,
                                window=(cfg.window_lo, cfg.window_hi))
