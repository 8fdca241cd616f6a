# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Lindstedt series by direct recursion
#
# The golden pendulum: two fast angles with frequency (1, (sqrt(5)-1)/2), one
# slow angle sitting at the top of the averaged potential.

# %%
import numpy as np

from lindborel import load_system, residual, solve_up_to

sys = load_system()
sys.omega, sys.M0

# %% [markdown]
# ## Coefficients order by order

# %%
H = solve_up_to(sys, 5)
[len(p) for p in H.h.orders]

# %%
# first order: the two fast cosines divided by their squared divisors
H.coefficient(1, (1, 0), 0), H.coefficient(1, (0, 1), 1)

# %%
# Wiener norms of the eps-coefficients
np.array(H.h.sup_norms())

# %% [markdown]
# ## Residual of the truncated series
#
# Truncating at eps^K leaves a residual of size eta^(2K+2).

# %%
etas = np.array([0.05, 0.025, 0.0125])
for K in range(1, 5):
    r = np.array([residual(sys, H.h.truncate(K), e) for e in etas])
    slope = np.polyfit(np.log(etas), np.log(r), 1)[0]
    print(f"K={K}  residuals={r}  slope={slope:.3f}")
