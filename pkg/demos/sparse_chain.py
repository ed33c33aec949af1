# %% [markdown]
# Repeated measurements thin out the worlds
#
# A chain of analyzers alternating along z and x.  In the absorber chain the
# down branch is thrown away at each stage; in the flux-conserving chain a
# detector records every outcome and all worlds are kept, split into ever
# smaller groups that no longer interact.  Either way the spacing between
# neighbouring worlds of a group doubles per stage along the split axis.
# Groups need about a hundred levels along the split axis for a clean
# doubling; smaller groups keep spreading after the split and the ratio climbs.

# %%
from dmiw.experiments import (ChainConfig, run_sg_chain_absorber, run_sg_chain_fluxconserving,
                              sparsity_metrics, stage_count_estimate)


def show(history):
    m = sparsity_metrics(history)
    print(f"{'stage':>5} {'worlds':>7} {'groups':>6} {'dx (um)':>8} {'dz (um)':>8} {'ratio':>6}")
    for r in m["table"]:
        print(f"{r['stage']:5d} {r['K']:7d} {r['groups']:6d} {r['spacing_x'] * 1e6:8.3f} "
              f"{r['spacing_z'] * 1e6:8.3f} {r['ratio']:6.2f}")
    print(f"fitted log2 growth per stage {m['growth_log2_per_stage']:.2f}")


# %%
show(run_sg_chain_absorber(ChainConfig(stages=3, I=256, K=256))[0])

# %%
show(run_sg_chain_fluxconserving(ChainConfig(stages=3, I=128, K=128))[0])

# %% [markdown]
# How many doublings take a Planck-length spacing between worlds up to the
# 0.1 mm width of the packet?

# %%
print(stage_count_estimate(1e-4, 1.6e-35))
