# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Integrating the equations of motion

# %%
import numpy as np

from lindborel import load_system, solve_up_to
from lindborel.verify_dynamics import horizon, instability_rate, parametrized_trajectory, torus_deviation

sys = load_system()
H = solve_up_to(sys, 6)

# %% [markdown]
# ## Parametrized torus motion

# %%
eta = 0.05
T = horizon(sys, eta)
times = np.linspace(0, T, 5)
parametrized_trajectory(sys, H.h.truncate(2), (0.0, 0.0), eta, times).phi

# %% [markdown]
# ## Deviation from the integrated flow
#
# The trajectory starts on the order K+2 parametrization and is compared with
# order K over the horizon 0.5 / (eta sqrt|M0|).

# %%
etas = np.array([0.05, 0.025, 0.0125])
for K in (1, 2):
    devs = [torus_deviation(sys, H.h.truncate(K), e, reference=H.h.truncate(K + 2))[0].sup for e in etas]
    print(K, devs, np.polyfit(np.log(etas), np.log(devs), 1)[0])

# %% [markdown]
# ## Hyperbolicity
#
# A small kick in the slow angle grows at rate eta sqrt(M0).

# %%
instability_rate(sys, 0.05), 0.05 * np.sqrt(sys.M0[0, 0])
