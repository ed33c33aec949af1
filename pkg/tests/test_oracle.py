import warnings

import numpy as np
import pytest

from dmiw.core import NodeRegion
from dmiw.oracle import (AliasingWarning, SpinorGrid1D, WavefunctionGrid1D, bohmian_trajectories,
                         bohmian_velocity, doubleslit_initial, free_gaussian_width, gaussian_packet,
                         propagate_pauli_z, propagate_schrodinger, transport_by_cdf)
from dmiw.spin_grid import SGField


def packet(M=1024, L=40.0, s=1.0, p0=0.0, m=1.0):
    x = -L / 2 + L / M * np.arange(M)
    return WavefunctionGrid1D.normalized(gaussian_packet(x, 0.0, s, m, p0), x[0], L / M, m)


def width(psi):
    x, r = psi.x, psi.density * psi.dx
    mu = np.sum(x * r)
    return np.sqrt(np.sum((x - mu) ** 2 * r))


def test_norm_checked_on_construction():
    with pytest.raises(ValueError):
        WavefunctionGrid1D(np.ones(8), 0.0, 1.0)


def test_free_width_matches_analytic():
    psi = packet()
    out = propagate_schrodinger(psi, None, 0.01, 300)
    assert width(out) == pytest.approx(free_gaussian_width(1.0, 3.0, 1.0), rel=1e-8)


def test_harmonic_ground_state_is_stationary():
    psi = packet(s=np.sqrt(0.5))
    out = propagate_schrodinger(psi, lambda x: 0.5 * x**2, 0.01, 500)
    assert np.abs(out.amplitudes) == pytest.approx(np.abs(psi.amplitudes), abs=2e-5)


def test_aliasing_warning():
    psi = packet(M=64, L=8.0, s=0.05)
    with pytest.warns(AliasingWarning):
        propagate_schrodinger(psi, None, 0.01, 1)


def test_spinor_product_and_spin_z():
    psi = packet()
    sp = SpinorGrid1D.product(psi, np.sqrt(0.75), np.sqrt(0.25))
    assert sp.component_norms() == pytest.approx((0.75, 0.25), abs=1e-12)
    sz = sp.spin_z()
    assert np.nanmax(np.abs(sz - 0.5)) < 1e-12
    assert np.isnan(sz[0])


def test_pauli_components_move_apart():
    psi = packet(M=2048, L=80.0)
    sp = SpinorGrid1D.product(psi, 1, 1)
    F, T = 0.5, 4.0
    out = propagate_pauli_z(sp, SGField(F), 0.01, 400, mu_b=1.0)
    x = out.x
    mu = lambda c: np.sum(x * np.abs(c) ** 2) / np.sum(np.abs(c) ** 2)
    assert mu(out.up) == pytest.approx(F * T**2 / 2, rel=1e-9)
    assert mu(out.down) == pytest.approx(-F * T**2 / 2, rel=1e-9)


def test_velocity_of_moving_packet():
    psi = packet(p0=1.5, m=2.0)
    assert bohmian_velocity(psi, [0.0, 0.5]) == pytest.approx([0.75, 0.75], rel=1e-8)


def test_velocity_in_node_region_raises():
    psi = packet(M=512, L=80.0)
    with pytest.raises(NodeRegion):
        bohmian_velocity(psi, [39.0])


def test_trajectories_scale_with_width():
    psi = packet()
    x0 = np.array([-1.0, 0.3, 1.2])
    t, traj, _ = bohmian_trajectories(psi, None, x0, 0.01, 200)
    assert traj[-1] == pytest.approx(x0 * free_gaussian_width(1.0, 2.0, 1.0), rel=1e-5)
    assert t[-1] == pytest.approx(2.0)


def test_transport_matches_trajectories_in_a_double_slit():
    psi, _ = doubleslit_initial(4.0, 0.5, 1.0, L=64.0, M=2048)
    x0 = np.array([-2.3, -1.9, 1.7, 2.4])
    _, traj, final = bohmian_trajectories(psi, None, x0, 0.005, 200)
    assert transport_by_cdf(psi, final, x0) == pytest.approx(traj[-1], abs=1e-3)


def test_doubleslit_density_is_normalized():
    psi, rho = doubleslit_initial(4.0, 0.5, 1.0)
    z = np.linspace(-20, 20, 40001)
    assert np.trapezoid(rho(z), z) == pytest.approx(1.0, abs=1e-9)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
