"""Separable grid DMIW with spin for a Stern-Gerlach field B = (0, 0, b z).

Worlds sit on an I x J x K grid.  The x and y levels follow free 1D DMIW
dynamics; each z level additionally carries a spin direction

    n = (sin(theta) sin(phi), sin(theta) cos(phi), cos(theta)).

The z levels feel the inter-world force, a spin inter-world force from the
angle differences between neighbouring levels, and the Zeeman force
mu_B b cos(theta).  The spin angles precess at the Larmor rate 2 mu_B b z / hbar
and are coupled to neighbouring levels through the spin-gradient terms.

Two integration schemes are provided.  "vector" (default) advances the unit
vectors n_k directly:

    dn_k/dt = (hbar/2m) n_k x W_k + omega_k n_k x e_z,
    W_k = (n_{k+1} - n_k)/d_k^2 - (n_k - n_{k-1})/d_{k-1}^2,

with the matching spin force (hbar^2/4m)(|n_k - n_{k-1}|^2/d_{k-1}^3 - |n_{k+1} - n_k|^2/d_k^3).
For small neighbour angle differences these reduce to the angle equations
implemented by ``theta_rate``, ``phi_rate`` and ``spin_force``, but they stay
regular at the poles theta = 0, pi, where the angle form develops a
finite-time blow-up.  "angles" integrates the angle equations directly.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import DegenerateSpacing, Ensemble1D, InsufficientSeparation, OrderingBreach
from .dmiw1d import ETA, interworld_force, stable_dt

EPS_THETA = 1e-8
E_Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class SGField:
    b: float
    active_window: tuple = (0.0, np.inf)

    def __post_init__(self):
        on, off = self.active_window
        if not on < off:
            raise ValueError("field window must have t_on < t_off")

    def active(self, t):
        on, off = self.active_window
        return on <= t < off

    def gradient_at(self, t):
        return self.b if t is None or self.active(t) else 0.0


@dataclass(frozen=True)
class SpinLevels:
    """The z levels: positions, velocities and spin angles (phi unwrapped)."""

    z: np.ndarray
    vz: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=float).reshape(-1)
        K = z.size
        arrs = [np.broadcast_to(np.asarray(a, dtype=float), (K,)).copy() for a in (self.vz, self.theta, self.phi)]
        if K < 1:
            raise ValueError("need at least one level")
        if np.any(np.diff(z) <= 0):
            raise DegenerateSpacing("z levels must be strictly increasing")
        arrs[1] = np.clip(arrs[1], EPS_THETA, np.pi - EPS_THETA)
        for name, a in zip(("z", "vz", "theta", "phi"), [z] + arrs):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def K(self):
        return self.z.size

    @classmethod
    def from_vectors(cls, z, vz, n, phi_ref=None):
        theta, phi = angles_from_vectors(n, phi_ref)
        return cls(z, vz, theta, phi)

    def vectors(self):
        return unit_vectors(self.theta, self.phi)


@dataclass(frozen=True)
class SpinGridEnsemble:
    x_levels: Ensemble1D
    y_levels: Ensemble1D
    z_levels: SpinLevels
    mass: float = 1.0

    @property
    def shape(self):
        return (self.x_levels.K, self.y_levels.K, self.z_levels.K)

    @property
    def n_worlds(self):
        I, J, K = self.shape
        return I * J * K


@dataclass
class SpinDiagnostics:
    theta_clamps: int = 0
    steps: int = 0
    halvings: int = 0
    extra: dict = field(default_factory=dict)


def unit_vectors(theta, phi):
    theta, phi = np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    s = np.sin(theta)
    return np.stack([s * np.sin(phi), s * np.cos(phi), np.cos(theta)], axis=-1)


def angles_from_vectors(n, phi_ref=None):
    """(theta, phi); phi is shifted by multiples of 2 pi to lie nearest ``phi_ref``."""
    n = np.asarray(n, dtype=float)
    theta = np.arccos(np.clip(n[..., 2], -1.0, 1.0))
    phi = np.arctan2(n[..., 0], n[..., 1])
    if phi_ref is not None:
        phi = phi + 2 * np.pi * np.round((np.asarray(phi_ref) - phi) / (2 * np.pi))
    return theta, phi


def spin_vector(theta, phi, hbar=1.0):
    return 0.5 * hbar * unit_vectors(theta, phi)


def zeeman_force(theta, field, mu_b=1.0, t=None):
    return mu_b * field.gradient_at(t) * np.cos(theta)


def _bond_terms(z, theta, phi):
    z = np.asarray(z, dtype=float)
    d = np.diff(z)
    if np.any(d <= 0):
        raise DegenerateSpacing("degenerate z spacing")
    dth = np.diff(theta)
    dph = np.diff(phi)
    sb = np.sin(0.5 * (theta[1:] + theta[:-1])) ** 2
    return d, dth, dph, sb


def _pad(a):
    return np.concatenate([[0.0], a, [0.0]])


def spin_energy(z, theta, phi, mass, hbar=1.0):
    """U_S = (hbar^2/8m) sum over bonds of (dphi^2 sin^2(theta_mid) + dtheta^2)/dz^2."""
    if len(z) < 2:
        return 0.0
    d, dth, dph, sb = _bond_terms(z, theta, phi)
    return hbar**2 / (8 * mass) * np.sum((dph**2 * sb + dth**2) / d**2)


def spin_force(z, theta, phi, mass, hbar=1.0):
    """Spin inter-world force on each z level; bonds past the ends are absent."""
    if len(z) < 2:
        return np.zeros(len(z))
    d, dth, dph, sb = _bond_terms(z, theta, phi)
    G = _pad((dph**2 * sb + dth**2) / d**3)
    return hbar**2 / (4 * mass) * (G[:-1] - G[1:])


def theta_rate(z, theta, phi, mass, hbar=1.0, prefactor="inverse"):
    """d theta_k / dt from the azimuthal currents through the two neighbouring bonds.

    ``prefactor="inverse"`` divides by sin(theta_k), which is what the
    continuum equation requires; ``"sine"`` multiplies by it instead.
    """
    theta = np.asarray(theta, dtype=float)
    if len(z) < 2:
        return np.zeros(len(z))
    d, dth, dph, sb = _bond_terms(z, theta, phi)
    J = _pad(dph * sb / d**2)
    s = np.clip(np.sin(theta), EPS_THETA, None)
    if prefactor == "inverse":
        pre = 1.0 / s
    elif prefactor == "sine":
        pre = s
    else:
        raise ValueError(f"unknown prefactor {prefactor!r}")
    return hbar / (2 * mass) * pre * (J[1:] - J[:-1])


def phi_gradient(z, phi):
    """Central (phi_{k+1} - phi_{k-1})/(z_{k+1} - z_{k-1}), one-sided at the ends."""
    z, phi = np.asarray(z, dtype=float), np.asarray(phi, dtype=float)
    g = np.empty_like(z)
    g[1:-1] = (phi[2:] - phi[:-2]) / (z[2:] - z[:-2])
    g[0] = (phi[1] - phi[0]) / (z[1] - z[0])
    g[-1] = (phi[-1] - phi[-2]) / (z[-1] - z[-2])
    return g


def phi_rate(z, theta, phi, field, mass, mu_b=1.0, hbar=1.0, t=None, diagnostics=None):
    theta = np.asarray(theta, dtype=float)
    z = np.asarray(z, dtype=float)
    larmor = 2 * mu_b * field.gradient_at(t) * z / hbar
    if len(z) < 2:
        return larmor
    d, dth, dph, sb = _bond_terms(z, theta, phi)
    s = np.sin(theta)
    small = np.abs(s) < EPS_THETA
    if np.any(small) and diagnostics is not None:
        diagnostics.theta_clamps += int(small.sum())
    s = np.where(small, EPS_THETA, s)
    L = _pad(dth / d**2)
    g = phi_gradient(z, phi)
    return hbar / (2 * mass) * (g**2 * np.cos(theta) - (L[1:] - L[:-1]) / s) + larmor


def spin_force_vec(z, n, mass, hbar=1.0):
    if len(z) < 2:
        return np.zeros(len(z))
    d = np.diff(z)
    dn2 = np.sum(np.diff(n, axis=0) ** 2, axis=-1)
    G = _pad(dn2 / d**3)
    return hbar**2 / (4 * mass) * (G[:-1] - G[1:])


def spin_torque(z, n, omega, mass, hbar=1.0):
    """dn/dt for the unit-vector scheme."""
    W = np.zeros_like(n)
    if len(z) >= 2:
        q = np.diff(n, axis=0) / (np.diff(z) ** 2)[:, None]
        W[:-1] += q
        W[1:] -= q
    out = hbar / (2 * mass) * np.cross(n, W)
    # n x e_z = (n_y, -n_x, 0)
    out[:, 0] += omega * n[:, 1]
    out[:, 1] -= omega * n[:, 0]
    return out


def _renorm(n):
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


class _AxisState:
    """Raw arrays for the spin axis during integration."""

    def __init__(self, levels, scheme):
        self.z = levels.z.copy()
        self.v = levels.vz.copy()
        self.scheme = scheme
        if scheme == "vector":
            self.n = levels.vectors()
            self.phi_ref = levels.phi.copy()
        else:
            self.theta = levels.theta.copy()
            self.phi = levels.phi.copy()

    def cos_theta(self):
        return self.n[:, 2] if self.scheme == "vector" else np.cos(self.theta)

    def levels(self):
        if self.scheme == "vector":
            th, ph = angles_from_vectors(self.n, self.phi_ref)
            return SpinLevels(self.z, self.v, th, ph)
        return SpinLevels(self.z, self.v, self.theta, self.phi)


def _spin_accel(st, mass, F, hbar):
    if st.scheme == "vector":
        fs = spin_force_vec(st.z, st.n, mass, hbar)
    else:
        fs = spin_force(st.z, st.theta, st.phi, mass, hbar)
    return (interworld_force(st.z, mass, hbar) + fs + F * st.cos_theta()) / mass


def _spin_update(st, zm, dt, F, mass, hbar, diag):
    """Explicit midpoint for the spin variables, evaluated at the midpoint z."""
    if st.scheme == "vector":
        om = 2 * F * zm / hbar
        k1 = spin_torque(zm, st.n, om, mass, hbar)
        nm = _renorm(st.n + 0.5 * dt * k1)
        k2 = spin_torque(zm, nm, om, mass, hbar)
        st.n = _renorm(st.n + dt * k2)
        st.phi_ref = st.phi_ref + dt * om
        return
    fld = SGField(F)  # rates below take mu_b * b = F
    def rates(th, ph):
        return (theta_rate(zm, th, ph, mass, hbar),
                phi_rate(zm, th, ph, fld, mass, 1.0, hbar, diagnostics=diag))
    a1, b1 = rates(st.theta, st.phi)
    thm = np.clip(st.theta + 0.5 * dt * a1, EPS_THETA, np.pi - EPS_THETA)
    a2, b2 = rates(thm, st.phi + 0.5 * dt * b1)
    new = st.theta + dt * a2
    diag.theta_clamps += int(np.sum((new < EPS_THETA) | (new > np.pi - EPS_THETA)))
    st.theta = np.clip(new, EPS_THETA, np.pi - EPS_THETA)
    st.phi = st.phi + dt * b2


def _free_step(x, v, a, dt, mass, hbar):
    v = v + 0.5 * dt * a
    x = x + dt * v
    return x, v


def axis_dt(x, mass, eta=ETA, hbar=1.0, v=None):
    return float(stable_dt(x, mass, eta, hbar, v))


class SpinGridIntegrator:
    """Steps a spin grid (or a single spin axis plus any number of free axes) in lockstep.

    All axes share one dt per step: the minimum of the per-axis stability rule.
    """

    def __init__(self, levels, free_axes=(), mass=1.0, mu_b=1.0, hbar=1.0, scheme="vector", eta=ETA):
        if scheme not in ("vector", "angles"):
            raise ValueError(f"unknown spin scheme {scheme!r}")
        self.mass, self.mu_b, self.hbar, self.eta = mass, mu_b, hbar, eta
        self.st = _AxisState(levels, scheme)
        self.free = [[np.array(e.positions), np.array(e.velocities)] for e in free_axes]
        self.diag = SpinDiagnostics()
        self.t = 0.0
        self._F = None
        self._a = None
        self._afree = [interworld_force(x, mass, hbar) / mass for x, _ in self.free]

    def _accel(self, F):
        return _spin_accel(self.st, self.mass, F, self.hbar)

    def dt_rule(self):
        dt = axis_dt(self.st.z, self.mass, self.eta, self.hbar, self.st.v)
        for x, v in self.free:
            dt = min(dt, axis_dt(x, self.mass, self.eta, self.hbar, v))
        return dt

    def step(self, dt, field):
        F = self.mu_b * field.gradient_at(self.t)
        st, m, hb = self.st, self.mass, self.hbar
        if self._a is None or F != self._F:
            self._a = self._accel(F)
            self._F = F
        v = st.v + 0.5 * dt * self._a
        zn = st.z + dt * v
        if np.any(np.diff(zn) <= 0):
            raise OrderingBreach(self.diag.steps, f"z ordering violated at step {self.diag.steps}")
        newfree = []
        for i, (x, vx) in enumerate(self.free):
            xn, vh = _free_step(x, vx, self._afree[i], dt, m, hb)
            if np.any(np.diff(xn) <= 0):
                raise OrderingBreach(self.diag.steps, f"free-axis ordering violated at step {self.diag.steps}")
            newfree.append((xn, vh))
        _spin_update(st, 0.5 * (st.z + zn), dt, F, m, hb, self.diag)
        st.z = zn
        self._a = self._accel(F)
        st.v = v + 0.5 * dt * self._a
        for i, (xn, vh) in enumerate(newfree):
            a = interworld_force(xn, m, hb) / m
            self._afree[i] = a
            self.free[i] = [xn, vh + 0.5 * dt * a]
        self.t += dt
        self.diag.steps += 1

    def run(self, field, t_end):
        """Advance to t_end, landing exactly on the field switching times."""
        edges = [e for e in field.active_window if self.t < e < t_end]
        while self.t < t_end:
            dt = min(self.dt_rule(), t_end - self.t)
            F = abs(self.mu_b * field.gradient_at(self.t))
            if F > 0:
                dt = min(dt, 0.05 * self.hbar / (2 * F * np.max(np.abs(self.st.z)) + 1e-300))
            for e in edges:
                if self.t < e:
                    dt = min(dt, e - self.t)
            if dt <= 0:
                break
            self.step(dt, field)
        return self

    def levels(self):
        return self.st.levels()

    def free_ensembles(self):
        return [Ensemble1D(x, v, self.mass) for x, v in self.free]


def step_spin_grid(ensemble, field, dt, t=0.0, mu_b=1.0, hbar=1.0, scheme="vector", diagnostics=None):
    """One step of the whole grid: z levels with spin, x and y levels free."""
    integ = SpinGridIntegrator(ensemble.z_levels, (ensemble.x_levels, ensemble.y_levels),
                               ensemble.mass, mu_b, hbar, scheme)
    integ.t = t
    integ.step(dt, field)
    if diagnostics is not None:
        diagnostics.theta_clamps += integ.diag.theta_clamps
        diagnostics.steps += 1
    xe, ye = integ.free_ensembles()
    return SpinGridEnsemble(xe, ye, integ.levels(), ensemble.mass)


def evolve_spin_grid(ensemble, field, t_end, mu_b=1.0, hbar=1.0, scheme="vector", eta=ETA):
    integ = SpinGridIntegrator(ensemble.z_levels, (ensemble.x_levels, ensemble.y_levels),
                               ensemble.mass, mu_b, hbar, scheme, eta)
    integ.run(field, t_end)
    xe, ye = integ.free_ensembles()
    return SpinGridEnsemble(xe, ye, integ.levels(), ensemble.mass), integ.diag


def mean_spacing(x):
    """Interquartile mean spacing (x[q3] - x[q1])/(q3 - q1); full range below 8 levels.

    The interquartile form tracks the bulk of a branch and is insensitive to
    the few sparse tail levels, whose spacings are set by the extreme quantiles.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        return np.nan
    if n < 8:
        return (x[-1] - x[0]) / (n - 1)
    q1, q3 = n // 4, (3 * n) // 4
    return (x[q3] - x[q1]) / (q3 - q1)


def classify_branches(z, min_gap_ratio=5.0):
    """Split ordered levels at the largest gap (the mid-gap plane).

    Returns a boolean "up" mask.  Raises InsufficientSeparation unless the gap
    is at least ``min_gap_ratio`` times the mean spacing inside the branches.
    """
    z = np.asarray(z, dtype=float)
    if z.size < 2:
        raise InsufficientSeparation("need at least two levels to split")
    d = np.diff(z)
    i = int(np.argmax(d))
    inner = np.delete(d, i)
    ref = inner.mean() if inner.size else np.inf
    ratio = d[i] / ref
    if not ratio >= min_gap_ratio:
        raise InsufficientSeparation(f"largest gap is only {ratio:.2f} x the branch spacing")
    up = np.zeros(z.size, dtype=bool)
    up[i + 1:] = True
    return up, float(ratio)


def median_split(z):
    """Up mask for the plane midway between the two middle levels.

    The lower floor(n/2) levels are "down".  This is the chain rule: a detector or
    absorber acts at a fixed plane, so sparse groups that have not opened a clear
    gap still divide into equal halves.
    """
    z = np.asarray(z, dtype=float)
    if z.size < 2:
        raise InsufficientSeparation("need at least two levels to split")
    up = np.zeros(z.size, dtype=bool)
    up[z.size // 2:] = True
    return up
