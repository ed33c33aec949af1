"""One-dimensional DMIW dynamics: inter-world potential, force and a Verlet stepper.

Worlds interact with nearest neighbours only.  Writing d_k = x_{k+1} - x_k and
B_k = 1/d_k - 1/d_{k-1} (reciprocals of spacings that do not exist are taken as
zero), the interaction energy is U = hbar^2/(8m) sum_k B_k^2.  The force is its
exact gradient, so momentum and energy are conserved by construction, including
at the two edge worlds.
"""

import numpy as np
from scipy.interpolate import CubicSpline

from .core import DegenerateSpacing, Ensemble1D, OrderingBreach

ETA = 0.1
MAX_HALVINGS = 20


class ClassicalPotential:
    """External potential V(x); ``gradient`` returns dV/dx, ``force`` returns -dV/dx."""

    def __init__(self, evaluate, gradient, kind="Custom", **params):
        self._v = evaluate
        self._g = gradient
        self.kind = kind
        self.params = params

    def evaluate(self, x):
        return self._v(np.asarray(x, dtype=float))

    def gradient(self, x):
        return self._g(np.asarray(x, dtype=float))

    def force(self, x):
        return -self.gradient(x)

    @classmethod
    def free(cls):
        return cls(np.zeros_like, np.zeros_like, kind="Free")

    @classmethod
    def harmonic(cls, omega, mass, center=0.0):
        k = mass * omega**2
        return cls(lambda x: 0.5 * k * (x - center) ** 2, lambda x: k * (x - center),
                   kind="Harmonic", omega=omega, mass=mass, center=center)

    @classmethod
    def tabulated(cls, grid, values):
        spl = CubicSpline(grid, values, extrapolate=True)
        return cls(spl, spl.derivative(), kind="Custom")


def _spacings(x):
    d = np.diff(x, axis=-1)
    if np.any(d <= 0):
        raise DegenerateSpacing("coincident or unordered worlds")
    return d


def _brackets(d):
    # B_k for k = 0..K-1 from the padded reciprocal spacings
    pad = np.zeros(d.shape[:-1] + (1,))
    inv = np.concatenate([pad, 1.0 / d, pad], axis=-1)
    return inv[..., 1:] - inv[..., :-1]


def interworld_potential(x, mass, hbar=1.0):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
    B = _brackets(_spacings(x))
    return hbar**2 / (8 * mass) * np.sum(B**2, axis=-1)


def interworld_force(x, mass, hbar=1.0):
    """-dU/dx_k for every world; accepts a leading batch axis."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        return np.zeros_like(x)
    d = _spacings(x)
    B = _brackets(d)
    g = np.diff(B, axis=-1) / d**2
    pad = np.zeros(x.shape[:-1] + (1,))
    g = np.concatenate([pad, g, pad], axis=-1)
    return hbar**2 / (4 * mass) * (g[..., 1:] - g[..., :-1])


def stable_dt(x, mass, eta=ETA, hbar=1.0, v=None):
    """dt = eta * min spacing^2 * m / hbar, infinite for a single world.

    With velocities, dt is further capped at eta * d_k / (closing speed of pair k),
    so two worlds approaching fast cannot close most of their gap in one step.
    Works row-wise on a leading batch axis.
    """
    x = np.asarray(x)
    if x.shape[-1] < 2:
        return np.inf if x.ndim == 1 else np.full(x.shape[:-1], np.inf)
    d = np.diff(x, axis=-1)
    dt = eta * np.min(d, axis=-1) ** 2 * mass / hbar
    if v is not None:
        closing = -np.diff(v, axis=-1)
        with np.errstate(divide="ignore"):
            kin = np.where(closing > 0, d / np.where(closing > 0, closing, 1.0), np.inf)
        dt = np.minimum(dt, eta * np.min(kin, axis=-1))
    return dt


def total_energy(ens, potential=None, hbar=1.0):
    potential = potential or ClassicalPotential.free()
    x, v, m = ens.positions, ens.velocities, ens.mass
    return 0.5 * m * np.sum(v**2) + np.sum(potential.evaluate(x)) + interworld_potential(x, m, hbar)


def acceleration(x, mass, potential=None, hbar=1.0):
    f = interworld_force(x, mass, hbar)
    if potential is not None:
        f = f + potential.force(x)
    return f / mass


def verlet(x, v, a, dt, accel):
    """One velocity-Verlet step on raw arrays; returns (x, v, a) without checks."""
    v = v + 0.5 * dt * a
    x = x + dt * v
    a = accel(x)
    v = v + 0.5 * dt * a
    return x, v, a


def step(ens, potential, dt, step_index=0, hbar=1.0):
    if not dt > 0:
        raise ValueError("dt must be positive")
    m = ens.mass
    accel = lambda y: acceleration(y, m, potential, hbar)
    x, v, a = ens.positions, ens.velocities, accel(ens.positions)
    v = v + 0.5 * dt * a
    x = x + dt * v
    if np.any(np.diff(x) <= 0):
        raise OrderingBreach(step_index)
    v = v + 0.5 * dt * accel(x)
    return Ensemble1D(x, v, m)


def evolve(ens, potential, t_end, eta=ETA, hbar=1.0, dt_max=np.inf, record=None):
    """Integrate to t_end with the adaptive stability rule.

    A step that breaks the ordering is retried with dt halved, at most 20 times.
    ``record``, if a list, receives (t, energy) after every step.
    Returns (ensemble, number of steps).
    """
    m = ens.mass
    potential = potential or ClassicalPotential.free()
    accel = lambda y: acceleration(y, m, potential, hbar)
    x, v = ens.positions.copy(), ens.velocities.copy()
    a = accel(x)
    t, n = 0.0, 0
    while t < t_end:
        dt = min(stable_dt(x, m, eta, hbar, v), dt_max, t_end - t)
        for _ in range(MAX_HALVINGS + 1):
            vh = v + 0.5 * dt * a
            xn = x + dt * vh
            if np.all(np.diff(xn) > 0):
                break
            dt *= 0.5
        else:
            raise OrderingBreach(n)
        a = accel(xn)
        x, v = xn, vh + 0.5 * dt * a
        t += dt
        n += 1
        if record is not None:
            record.append((t, total_energy(Ensemble1D(x, v, m), potential, hbar)))
    return Ensemble1D(x, v, m), n
