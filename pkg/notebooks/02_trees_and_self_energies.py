# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Trees, scales and self-energies

# %%
from fractions import Fraction

import numpy as np

from lindborel import load_system, solve_up_to
from lindborel.freq_diophantine import ScaleSequence, build_scale_sequence, modes_on_scale, verify_scale_sequence
from lindborel.tree_engine import (PropagatorTable, Ring, TreeEnumerator, assign_scales_and_clusters, flatten,
                                   formal_series, reexpand_in_eps)

sys = load_system()
H = solve_up_to(sys, 4)

# %% [markdown]
# ## Formal trees reproduce the recursion

# %%
en = TreeEnumerator(sys, "formal")
[sum(len(v) for v in en.subtrees(m).values()) for m in range(1, 4)]

# %%
F = formal_series(sys, 3, en)
[(F.orders[k] - H.h.orders[k]).max_abs() for k in range(1, 4)]

# %% [markdown]
# ## Scale sequence
#
# Thresholds gamma_p in dyadic windows, kept away from every small divisor.

# %%
seq = build_scale_sequence(sys.freq, 12)
verify_scale_sequence(seq, sys.freq).ok, [float(g) for g in seq.gammas[:5]]

# %%
for n in range(1, 5):
    print(n, modes_on_scale(sys.freq, seq, n)[:3])

# %% [markdown]
# ## Clusters on a coarse sequence
#
# The verified sequence puts every low-order line on scale 0.  A coarse set of
# thresholds spreads them over several scales, so self-energy clusters appear.

# %%
coarse = ScaleSequence([Fraction(8, 10), Fraction(5, 10), Fraction(2, 10), Fraction(1, 10), Fraction(1, 20)],
                       sys.freq.C0)
form = TreeEnumerator(sys, "formal", coarse)
n_se = sum(bool(assign_scales_and_clusters(flatten(t), coarse, sys.freq).self_energies()) for t in form.trees(3))
res = TreeEnumerator(sys, "resummed", coarse)
n_se, len(form.trees(3)), len(res.trees(3))

# %% [markdown]
# ## Dressed propagators and their eps-expansion

# %%
for scheme in "AB":
    R = reexpand_in_eps(sys, coarse, 3, scheme)
    print(scheme, [(R.orders[k] - H.h.orders[k]).max_abs() for k in range(1, 4)])

# %%
# the self-energy correction beyond eta^2 M0 starts at eta^4
nu = modes_on_scale(sys.freq, seq, 2)[0]
etas = np.array([0.05, 0.025, 0.0125])
d = [np.linalg.norm(PropagatorTable(sys, seq, Ring.numeric(e), "A", K_se=2).build_M(nu, 2)[0]
                    - e * e * sys.M0_full) for e in etas]
np.polyfit(np.log(etas), np.log(d), 1)[0]
