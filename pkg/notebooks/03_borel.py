# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Borel transforms and Laplace sums

# %%
import math

import mpmath
import numpy as np

from lindborel import load_system, solve_up_to
from lindborel.borel_lab import borel_convolve, borel_transform, growth_fit, inverse_laplace_contour, laplace_sum

# %% [markdown]
# ## Coefficient identities

# %%
alpha = -1.0
F = borel_transform([0.0] + [alpha ** (k - 1) for k in range(1, 9)])
F.monomials(), [alpha**j / math.factorial(j) for j in range(8)]

# %%
a = borel_transform([0.0, 0.0, 1.0])
b = borel_transform([0.0, 0.0, 0.0, 1.0])
borel_convolve(a, b).coeffs

# %% [markdown]
# ## Laplace sum and inversion along a vertical line

# %%
eta = 0.1
s = laplace_sum(lambda p: mpmath.exp(alpha * p), eta, bound=(1.0, 0.0))
float(s), eta / (1 - alpha * eta), s.p_max

# %%
for p in (0.5, 1.0, 2.0):
    r = inverse_laplace_contour(lambda e: e / (1 - alpha * e), 1.0, p)
    print(p, r.value, math.exp(alpha * p), r.truncation)

# %% [markdown]
# ## Growth of the eta-coefficients of h

# %%
coeffs = solve_up_to(load_system(), 4).eta_coefficients()
fit = growth_fit(coeffs, tau_fixed=1.0)
fit.D, fit.C, fit.holds(coeffs)

# %%
np.array([c / fit.envelope(k) for k, c in enumerate(coeffs) if c])
