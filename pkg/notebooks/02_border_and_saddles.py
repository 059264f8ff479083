# %% [markdown]
# # Saddles and the shallow/deep border
#
# The reduced HK exponent has three stationary points: the two conventional
# ones (real for q < 0, imaginary for q > 0) and the branch point p_I of the
# prefactor. The tunnelling saddle meets p_I at q = l_gamma.

# %%
import numpy as np

from hktunnel import ModelParams, contributing_set, find_border, find_saddles
from hktunnel.errors import CausticError

params = ModelParams()
for q in (-1.0, 0.5, 2.0):
    print(f"q = {q}")
    for s in contributing_set(q, params):
        print(f"   {s.kind.value:9s} p = {s.p:.6f}  contributing = {s.contributing}")

# %% [markdown]
# Degenerate points are flagged, and asking which saddles contribute there
# raises.

# %%
for q in (0.0, 1.0):
    print(q, [(s.kind.value, s.degenerate) for s in find_saddles(q, params)])
    try:
        contributing_set(q, params)
    except CausticError as exc:
        print("   ", exc)

# %% [markdown]
# The border moves in as the coherent states get narrower.

# %%
for gamma in (0.25, 0.5, 1.0, 2.0):
    p = params.replace(gamma=gamma)
    b = find_border(p)
    print(f"gamma={gamma:5.2f}  q_border={b.q_border:.6f}  l_gamma={p.scales.l_gamma:.6f}")
