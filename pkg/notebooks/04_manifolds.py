# %% [markdown]
# # Folded manifolds and caustics
#
# A vertical line in phase space folds into the parabola q = -g tau p^2 under
# the cubic Hamiltonian. The softened Morse oscillator folds it twice.

# %%
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from hktunnel import (
    MorseParams,
    build_line_manifold,
    detect_caustics,
    evolve_manifold,
    folding_hamiltonian,
    morse_hamiltonian,
)

fold = evolve_manifold(folding_hamiltonian(), build_line_manifold(0.0, -2.0, 2.0, 201), 1.0, 1e-3)
morse = evolve_manifold(morse_hamiltonian(MorseParams()), build_line_manifold(9.0, -3.0, 3.0, 301), 18.0, 5e-3)
print("folding caustics:", detect_caustics(fold))
print("Morse caustics:", detect_caustics(morse))

# %%
fig, axes = plt.subplots(1, 2, figsize=(9, 4))
for ax, ev, title in ((axes[0], fold, "cubic"), (axes[1], morse, "Morse")):
    ax.plot(ev.initial.q, ev.initial.p, "grey", lw=0.8)
    ax.plot(ev.final.q, ev.final.p, "C0")
    for c in detect_caustics(ev):
        ax.axvline(c, color="C3", lw=0.5)
    ax.set_title(title)
    ax.set_xlabel("q")
axes[0].set_ylabel("p")
out = Path(__file__).with_name("figures")
out.mkdir(exist_ok=True)
fig.savefig(out / "manifolds.png", dpi=120)
