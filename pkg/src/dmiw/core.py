"""Units, constants and the basic ensemble state shared by the dynamics modules.

Internal units: hbar = 1, masses in ``mass_unit`` (electron masses by
default), lengths in ``length_unit``.  The time unit is fixed by those three,
``mass_unit * length_unit**2 / hbar``, so it is not an independent input.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import constants as sc

HBAR = sc.hbar
M_E = sc.m_e
MU_B = sc.physical_constants["Bohr magneton"][0]
SILVER_MASS_ME = 196632.0


class DmiwError(Exception):
    """Base class for simulation errors."""


class DegenerateSpacing(DmiwError):
    pass


class OrderingBreach(DmiwError):
    def __init__(self, step, msg=None):
        self.step = step
        super().__init__(msg or f"world ordering violated at step {step}")


class NodeRegion(DmiwError):
    pass


class GridExit(DmiwError):
    def __init__(self, time, msg=None):
        self.time = time
        super().__init__(msg or f"trajectory left the grid at t={time:g}")


class InsufficientSeparation(DmiwError):
    pass


# exponents of (mass, length, time, tesla)
DIMENSIONS = {
    "dimensionless": (0, 0, 0, 0),
    "mass": (1, 0, 0, 0),
    "length": (0, 1, 0, 0),
    "time": (0, 0, 1, 0),
    "velocity": (0, 1, -1, 0),
    "acceleration": (0, 1, -2, 0),
    "force": (1, 1, -2, 0),
    "energy": (1, 2, -2, 0),
    "action": (1, 2, -1, 0),
    "field_gradient": (0, -1, 0, 1),
    "magnetic_moment": (1, 2, -2, -1),
}


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = HBAR
    mass_unit: float = M_E
    length_unit: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass_unit", "length_unit"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")

    @property
    def time_unit(self):
        return self.mass_unit * self.length_unit**2 / self.hbar

    def scale(self, kind):
        try:
            m, l, t, b = DIMENSIONS[kind]
        except KeyError:
            raise ValueError(f"unknown quantity kind {kind!r}") from None
        return self.mass_unit**m * self.length_unit**l * self.time_unit**t

    def to_internal(self, value, kind):
        value = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(value)):
            raise ValueError("non-finite input")
        out = value / self.scale(kind)
        return float(out) if out.ndim == 0 else out

    def from_internal(self, value, kind):
        value = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(value)):
            raise ValueError("non-finite input")
        out = value * self.scale(kind)
        return float(out) if out.ndim == 0 else out

    @property
    def mu_b(self):
        return self.to_internal(MU_B, "magnetic_moment")


SI = UnitSystem()
# convenient for the experiment scales (sub-millimetre beams, ~1 s transits)
MM = UnitSystem(length_unit=1e-3)


def to_internal(value, kind, units=SI):
    return units.to_internal(value, kind)


def from_internal(value, kind, units=SI):
    return units.from_internal(value, kind)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def check_ordered(x):
    d = np.diff(x, axis=-1)
    if np.any(d <= 0):
        raise DegenerateSpacing("positions must be strictly increasing")
    return d


@dataclass(frozen=True)
class Ensemble1D:
    positions: np.ndarray
    velocities: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        x = _frozen(self.positions).reshape(-1)
        v = _frozen(self.velocities).reshape(-1)
        if x.size < 1:
            raise ValueError("an ensemble needs at least one world")
        if v.shape != x.shape:
            raise ValueError("positions and velocities differ in length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise ValueError("non-finite state")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        check_ordered(x)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "velocities", v)

    @classmethod
    def at_rest(cls, positions, mass=1.0):
        return cls(positions, np.zeros(len(positions)), mass)

    @property
    def K(self):
        return self.positions.size

    @property
    def world_weight(self):
        return 1.0 / self.K


def normalized_histogram(samples, bins=200, range=None):
    counts, edges = np.histogram(np.ravel(samples), bins=bins, range=range)
    total = counts.sum()
    if total == 0:
        raise ValueError("no samples inside the histogram range")
    density = counts / (total * np.diff(edges))
    return edges, density


@dataclass
class RunSummary:
    final_positions: np.ndarray
    histogram: tuple
    metrics: dict = field(default_factory=dict)
    energy_series: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        edges, density = self.histogram
        mass = float(np.sum(np.asarray(density) * np.diff(edges)))
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"histogram integrates to {mass}, not 1")
