# %% [markdown]
# # Kernel profile across the caustic
#
# Exact Airy kernel, the reduced HK integral and the region-wise saddle
# approximation at g = tau = hbar = 1, gamma = 1/2, where l = l_gamma = 1.

# %%
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from hktunnel import ModelParams, exact_kernel, hk_kernel_reduced, hk_semiclassical
from hktunnel.errors import CausticError

params = ModelParams()
print(params.scales)

# %% [markdown]
# The saddle formula is undefined in thin bands around q = 0 and q = l_gamma
# and raises there; those nodes are stored as nan.

# %%
q = np.linspace(-5, 5, 501)
exact = exact_kernel(q, params)
hk = np.array([hk_kernel_reduced(x, params).real for x in q])


def saddle_value(x):
    try:
        return hk_semiclassical(x, params)
    except CausticError:
        return np.nan


sc = np.array([saddle_value(x) for x in q])

# %%
fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
top.plot(q, exact, "k", label="exact")
top.plot(q, hk, "C0--", label="HK")
top.plot(q, sc, "C1:", label="saddles")
top.set_ylabel("K(q)")
top.legend()
bottom.semilogy(q[q > 0], np.abs(exact[q > 0]), "k")
bottom.semilogy(q[q > 0], np.abs(hk[q > 0]), "C0--")
bottom.semilogy(q[q > 0], np.abs(sc[q > 0]), "C1:")
bottom.axvline(params.scales.l_gamma, color="grey", lw=0.5)
bottom.set_xlabel("q / l")
bottom.set_ylabel("|K(q)|")
out = Path(__file__).with_name("figures")
out.mkdir(exist_ok=True)
fig.savefig(out / "kernel_profile.png", dpi=120)

# %% [markdown]
# The HK tail falls like a Gaussian in q beyond l_gamma, while the exact tail
# falls like exp(-(2/3) q^(3/2)). Ratio of the two at a few points:

# %%
for x in (1.5, 2.0, 3.0, 4.0):
    print(f"q={x:3.1f}  HK/exact = {hk_kernel_reduced(x, params).real / exact_kernel(x, params):.4f}")
