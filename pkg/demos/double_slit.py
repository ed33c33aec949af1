# %% [markdown]
# Double slit with few worlds per run
#
# Each run starts K worlds on the two-slit density and lets them repel each
# other for 0.5 s.  With one world per run nothing acts on it, so the screen
# shows the slits.  More worlds per run bring back the fringes, and the
# wavefunction (Bohmian) run sets the scale.

# %%
import numpy as np

from dmiw.experiments import DoubleSlitConfig, run_double_slit, run_oracle_double_slit

cfg = DoubleSlitConfig(runs=20000, seed=1)
oracle = run_oracle_double_slit(cfg, samples=200000)
print(f"fringe period {oracle.metrics['fringe_period_m'] * 1e3:.4f} mm")
print(f"{'worlds/run':>10} {'contrast':>9} {'KS vs slits':>12}")
print(f"{'oracle':>10} {oracle.metrics['fringe_contrast']:9.3f} {'':>12}")

# %%
for K in (10, 5, 3, 2, 1):
    s = run_double_slit(DoubleSlitConfig(K=K, runs=20000 // K, seed=1))
    print(f"{K:>10d} {s.metrics['fringe_contrast']:9.3f} {s.metrics['ks_initial']:12.4f}")

# %% [markdown]
# The screen histogram of the single-world runs, coarsely binned.

# %%
s = run_double_slit(DoubleSlitConfig(K=1, runs=20000, seed=1))
counts, edges = np.histogram(s.final_positions * 1e3, bins=30, range=(-0.06, 0.06))
for c, lo in zip(counts, edges):
    print(f"{lo:+.3f} mm {'#' * int(60 * c / counts.max())}")
