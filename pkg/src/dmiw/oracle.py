"""Wavefunction reference solvers: split-operator propagation and Bohmian trajectories.

All grids are uniform and periodic (FFT kinetic step); states are expected to
vanish at the grid ends.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .core import GridExit, NodeRegion

DENSITY_FLOOR = 1e-12


class AliasingWarning(UserWarning):
    pass


def grid_points(x0, dx, M):
    return x0 + dx * np.arange(M)


def _norm(*comps, dx):
    return float(sum(np.sum(np.abs(c) ** 2) for c in comps) * dx)


@dataclass
class WavefunctionGrid1D:
    amplitudes: np.ndarray
    x0: float
    dx: float
    mass: float = 1.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        n = _norm(self.amplitudes, dx=self.dx)
        if abs(n - 1) > 1e-9:
            raise ValueError(f"wavefunction norm is {n}, expected 1")

    @classmethod
    def normalized(cls, amplitudes, x0, dx, mass=1.0):
        a = np.asarray(amplitudes, dtype=complex)
        return cls(a / np.sqrt(_norm(a, dx=dx)), x0, dx, mass)

    @property
    def x(self):
        return grid_points(self.x0, self.dx, self.amplitudes.size)

    @property
    def density(self):
        return np.abs(self.amplitudes) ** 2

    def norm(self):
        return _norm(self.amplitudes, dx=self.dx)

    def components(self):
        return (self.amplitudes,)


@dataclass
class SpinorGrid1D:
    up: np.ndarray
    down: np.ndarray
    x0: float
    dx: float
    mass: float = 1.0

    def __post_init__(self):
        self.up = np.asarray(self.up, dtype=complex)
        self.down = np.asarray(self.down, dtype=complex)
        n = _norm(self.up, self.down, dx=self.dx)
        if abs(n - 1) > 1e-9:
            raise ValueError(f"spinor norm is {n}, expected 1")

    @classmethod
    def product(cls, psi, c_up, c_down):
        """Spatial state psi times the spin state (c_up, c_down)."""
        s = np.sqrt(abs(c_up) ** 2 + abs(c_down) ** 2)
        return cls(psi.amplitudes * c_up / s, psi.amplitudes * c_down / s, psi.x0, psi.dx, psi.mass)

    @property
    def x(self):
        return grid_points(self.x0, self.dx, self.up.size)

    @property
    def density(self):
        return np.abs(self.up) ** 2 + np.abs(self.down) ** 2

    def norm(self):
        return _norm(self.up, self.down, dx=self.dx)

    def component_norms(self):
        return _norm(self.up, dx=self.dx), _norm(self.down, dx=self.dx)

    def spin_z(self):
        """Local (|up|^2 - |down|^2)/rho; NaN where the density is below the floor."""
        rho = self.density
        out = (np.abs(self.up) ** 2 - np.abs(self.down) ** 2) / np.where(rho > 0, rho, 1.0)
        out[rho < DENSITY_FLOOR * rho.max()] = np.nan
        return out

    def components(self):
        return (self.up, self.down)


def gaussian_packet(x, center, sigma, mass=1.0, p0=0.0, hbar=1.0):
    """Amplitudes of a Gaussian whose density has standard deviation sigma."""
    x = np.asarray(x, dtype=float)
    return (2 * np.pi * sigma**2) ** -0.25 * np.exp(-((x - center) ** 2) / (4 * sigma**2) + 1j * p0 * x / hbar)


def free_gaussian_width(sigma0, t, mass, hbar=1.0):
    return sigma0 * np.sqrt(1 + (hbar * t / (2 * mass * sigma0**2)) ** 2)


def wavenumbers(M, dx):
    return 2 * np.pi * np.fft.fftfreq(M, dx)


def _check_aliasing(comps, band=0.9, tol=1e-10):
    for c in comps:
        P = np.abs(np.fft.fft(c)) ** 2
        kidx = np.abs(np.fft.fftfreq(c.size))
        if P[kidx >= 0.5 * band].sum() > tol * P.sum():
            warnings.warn("momentum spectrum reaches the grid Nyquist band", AliasingWarning, stacklevel=3)
            return True
    return False


def _potential_array(V, x):
    if V is None:
        return np.zeros_like(x)
    if callable(getattr(V, "evaluate", None)):
        return V.evaluate(x)
    if callable(V):
        return V(x)
    return np.broadcast_to(np.asarray(V, dtype=float), x.shape)


def cosine_mask(M, width):
    """Multiplicative absorber: 1 in the interior, cos^(1/8) ramp over ``width`` points at each end."""
    m = np.ones(M)
    if width > 0:
        r = np.cos(0.5 * np.pi * (width - np.arange(width)) / width) ** 0.125
        m[:width] = r
        m[-width:] = r[::-1]
    return m


class _Strang:
    def __init__(self, M, dx, mass, dt, hbar):
        k = wavenumbers(M, dx)
        self.kin = np.exp(-1j * hbar * k**2 * dt / (2 * mass))
        self.dt, self.hbar = dt, hbar

    def half_v(self, V):
        return np.exp(-0.5j * V * self.dt / self.hbar)

    def kinetic(self, c):
        return np.fft.ifft(self.kin * np.fft.fft(c))


def propagate_schrodinger(psi, V, dt, steps, hbar=1.0, mask=None, check=True):
    """Strang split-operator propagation, second order in dt."""
    x = psi.x
    if check:
        _check_aliasing(psi.components())
    S = _Strang(x.size, psi.dx, psi.mass, dt, hbar)
    h = S.half_v(_potential_array(V, x))
    a = psi.amplitudes
    for _ in range(steps):
        a = h * S.kinetic(h * a)
        if mask is not None:
            a = a * mask
    out = WavefunctionGrid1D.__new__(WavefunctionGrid1D)
    out.amplitudes, out.x0, out.dx, out.mass = a, psi.x0, psi.dx, psi.mass
    return out


def pauli_potentials(x, field, mu_b, t=None):
    """Diagonal Zeeman potentials.  The up component sits in -mu_B b z so it is pushed towards +z."""
    on = 1.0 if (t is None or field.active(t)) else 0.0
    V = on * mu_b * field.b * x
    return -V, V


def propagate_pauli_z(spinor, field, dt, steps, mu_b=1.0, hbar=1.0, t0=0.0, mask=None, check=True):
    x = spinor.x
    if check:
        _check_aliasing(spinor.components())
    S = _Strang(x.size, spinor.dx, spinor.mass, dt, hbar)
    up, dn = spinor.up, spinor.down
    for n in range(steps):
        vu, vd = pauli_potentials(x, field, mu_b, t0 + (n + 0.5) * dt)
        hu, hd = S.half_v(vu), S.half_v(vd)
        up = hu * S.kinetic(hu * up)
        dn = hd * S.kinetic(hd * dn)
        if mask is not None:
            up, dn = up * mask, dn * mask
    out = SpinorGrid1D.__new__(SpinorGrid1D)
    out.up, out.down, out.x0, out.dx, out.mass = up, dn, spinor.x0, spinor.dx, spinor.mass
    return out


def velocity_field(state, hbar=1.0, floor=DENSITY_FLOOR):
    """(hbar/m) Im(sum psi* psi') / rho on the grid (spectral derivative); NaN in node regions."""
    comps = state.components()
    k = wavenumbers(comps[0].size, state.dx)
    rho = sum(np.abs(c) ** 2 for c in comps)
    j = sum(np.imag(np.conj(c) * np.fft.ifft(1j * k * np.fft.fft(c))) for c in comps)
    v = hbar / state.mass * j / np.where(rho > 0, rho, 1.0)
    v[rho < floor * rho.max()] = np.nan
    return v


def bohmian_velocity(state, at=None, hbar=1.0, floor=DENSITY_FLOOR):
    """Velocity field on the grid, or interpolated at the points ``at``.

    Asking for the velocity at a point inside a node region raises NodeRegion.
    """
    v = velocity_field(state, hbar, floor)
    if at is None:
        return v
    return _interp_velocity(state.x, v, np.asarray(at, dtype=float))


def _interp_velocity(x, v, pts):
    bad = ~np.isfinite(v)
    idx = np.clip(np.rint((pts - x[0]) / (x[1] - x[0])).astype(int), 0, x.size - 1)
    if np.any(bad[idx]):
        raise NodeRegion("velocity requested inside a node region")
    spl = CubicSpline(x, np.where(bad, 0.0, v))
    return spl(pts)


def bohmian_trajectories(state0, V, x0_list, dt, steps, hbar=1.0, field=None, mu_b=1.0, record_every=1):
    """Guidance-equation trajectories by Heun (RK2) with the wavefunction co-propagated.

    ``state0`` is a WavefunctionGrid1D (potential V) or a SpinorGrid1D (Zeeman ``field``).
    Returns (times, positions[n_records, n_traj], final state).
    """
    q = np.array(x0_list, dtype=float)
    x = state0.x
    lo, hi = x[0], x[-1]
    spin = isinstance(state0, SpinorGrid1D)

    def advance(s, t):
        if spin:
            return propagate_pauli_z(s, field, dt, 1, mu_b, hbar, t0=t, check=False)
        return propagate_schrodinger(s, V, dt, 1, hbar, check=False)

    s = state0
    times, traj = [0.0], [q.copy()]
    v1 = bohmian_velocity(s, q, hbar)
    for n in range(steps):
        t = n * dt
        s2 = advance(s, t)
        qp = q + dt * v1
        if np.any((qp < lo) | (qp > hi)):
            raise GridExit(t + dt)
        v2 = bohmian_velocity(s2, qp, hbar)
        q = q + 0.5 * dt * (v1 + v2)
        if np.any((q < lo) | (q > hi)):
            raise GridExit(t + dt)
        s = s2
        v1 = bohmian_velocity(s, q, hbar)
        if (n + 1) % record_every == 0:
            times.append((n + 1) * dt)
            traj.append(q.copy())
    return np.array(times), np.array(traj), s


def transport_by_cdf(state0, state1, x0_list):
    """Map initial positions to final ones by equal cumulative probability.

    In one dimension the guidance flow preserves both ordering and the Born
    measure, so this gives the trajectory endpoints without integrating.
    """
    def cdf(s):
        c = cumulative_trapezoid(s.density, dx=s.dx, initial=0.0)
        return c / c[-1]
    c0, c1 = cdf(state0), cdf(state1)
    u = np.interp(x0_list, state0.x, c0)
    keep = np.concatenate([[True], np.diff(c1) > 0])
    return np.interp(u, c1[keep], state1.x[keep])


def doubleslit_initial(separation, slit_sigma, mass, L=None, M=2**14, center=0.0):
    """Equal-weight, zero-phase superposition of one Gaussian per slit at +-separation/2.

    ``slit_sigma`` is the density width of each slit packet.  Returns the
    normalized wavefunction and a callable density rho(z) (normalized on the
    real line) for world sampling.
    """
    if not separation > 0:
        raise ValueError("separation must be positive")
    a = 0.5 * separation
    if L is None:
        L = 2 * (a + 12 * slit_sigma)
    x0 = center - 0.5 * L
    dx = L / M
    x = grid_points(x0, dx, M)
    g = lambda z: gaussian_packet(z, center - a, slit_sigma) + gaussian_packet(z, center + a, slit_sigma)
    overlap = np.exp(-(a**2) / (2 * slit_sigma**2))
    nrm = 2 * (1 + overlap)

    def density(z):
        return np.abs(g(np.asarray(z, dtype=float))) ** 2 / nrm

    psi = WavefunctionGrid1D.normalized(g(x), x0, dx, mass)
    return psi, density
