# %% [markdown]
# One Stern-Gerlach stage on a grid of worlds
#
# A 400-level stack along z with spin up/down amplitudes (C_up, C_down) passes
# a field gradient.  The levels sort themselves into two branches; the share of
# levels in the upper branch follows |C_up|^2, and the spacing inside each
# branch doubles along z while x and y are left alone.

# %%
from dmiw.experiments import SGConfig, run_sg_single

for c2 in (0.25, 0.5, 0.75):
    m = run_sg_single(SGConfig(K=400, I=1, J=1, c_up2=c2)).metrics
    print(f"|C_up|^2 = {c2:.2f}: {m['K_up']} of {m['K']} levels go up, gap {m['gap_ratio']:.1f} spacings")

# %%
m = run_sg_single(SGConfig(I=400, J=400, K=400)).metrics
print(f"z spacing ratio up {m['spacing_ratio_z_up']:.3f}, down {m['spacing_ratio_z_down']:.3f}")
print(f"x spacing ratio {m['spacing_ratio_x']:.3f}, y spacing ratio {m['spacing_ratio_y']:.3f}")
print(f"spin alignment: median cos(theta) up {m['cos_up_median']:.3f}, down {m['cos_down_median']:.3f}")
