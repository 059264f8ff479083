# %% [markdown]
# # Deviation along an hbar ladder
#
# Two ways of shrinking hbar. Holding q/l and gamma l^2 fixed leaves l K_HK
# unchanged, so the deviations do not move. Holding q and hbar*gamma fixed
# (coherent states of fixed phase-space aspect in classical units) shows the
# allowed and shallow regions converging and the deep tail pulling away.

# %%
from hktunnel import hbar_scaling_study

ladder = [1.0, 0.5, 0.25, 0.125]
for protocol in ("fixed_width", "classical"):
    print(protocol)
    for region, target in (("allowed", -4.0), ("shallow", 0.5), ("deep", 2.0)):
        rows = hbar_scaling_study(target, region, ladder, protocol=protocol)
        dev = " ".join(f"{r.deviation:.4g}" for r in rows)
        lr = " ".join(f"{r.log_ratio:.4g}" for r in rows)
        print(f"  {region:8s} deviation: {dev}")
        print(f"  {'':8s} |ln ratio|: {lr}")

# %% [markdown]
# In the deep region the closed-form branch-point estimate should approach
# the HK integral as hbar shrinks. Double precision runs out first: below
# hbar of about 1/100 the integral at q = 3 is lost in cancellation and the
# call raises. The test suite follows the ratio further with a
# multiprecision contour through p_I (0.997 at hbar = 2^-15).

# %%
from hktunnel import ModelParams, hk_kernel_reduced, hksc_deep
from hktunnel.errors import QuadratureError

for hb in (1.0, 0.25, 1 / 16, 1 / 256, 1 / 4096):
    p = ModelParams(hbar=hb, gamma=0.5 / hb)
    try:
        r = hksc_deep(3.0, p) / hk_kernel_reduced(3.0, p).real
        print(f"hbar={hb:<8g} formula/quadrature = {r:.4f}")
    except QuadratureError as exc:
        print(f"hbar={hb:<8g} double precision exhausted: {exc}")
