"""Discrete many-interacting-worlds (DMIW) simulation toolkit."""

from .core import (Ensemble1D, RunSummary, UnitSystem, SI, MM, DmiwError, DegenerateSpacing,
                   OrderingBreach, NodeRegion, GridExit, InsufficientSeparation, to_internal, from_internal)
from .dmiw1d import (ClassicalPotential, interworld_potential, interworld_force, step, evolve,
                     total_energy, stable_dt)
from .sampling import (CdfSampler, sample_worlds, density_from_spacings, continuum_quantum_force,
                       fd_consistency_study)
from .spin_grid import (SGField, SpinLevels, SpinGridEnsemble, spin_force, zeeman_force, theta_rate,
                        phi_rate, step_spin_grid, evolve_spin_grid, spin_vector, classify_branches,
                        mean_spacing)
from .oracle import (WavefunctionGrid1D, SpinorGrid1D, propagate_schrodinger, propagate_pauli_z,
                     bohmian_velocity, bohmian_trajectories, doubleslit_initial)

__version__ = "0.1.0"
