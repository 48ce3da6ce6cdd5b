# %% [markdown]
# Two prepared states, flagged by a control qubit, become one state whose
# distance to its twirl is a quarter of their trace distance.

# %%
import numpy as np

from symkit import measures as ms
from symkit import reductions as red
from symkit.numerics import trace_norm
from symkit.optimize.haar import make_rng

inst = red.random_qsd(make_rng(5))
w0, w1 = inst.payload["omega0"], inst.payload["omega1"]
print("twirl_td          ", ms.twirl_td(inst.state, inst.rep))
print("||w0 - w1||_1 / 4 ", trace_norm(w0 - w1) / 4)

# %% [markdown]
# Optimizing over all symmetric states instead of the twirl only changes
# the value by at most a factor of two.

# %%
lo, hi = ms.min_td_sandwich(inst.state, inst.rep)
td = ms.min_td_sym(inst.state, inst.rep)
print(f"sandwich [{lo:.6f}, {hi:.6f}]  SDP {td.value:.6f}  (duality gap {td.gap:.1e})")

fid = ms.max_fid_sym(inst.state, inst.rep)
print("max_fid_sym ", fid.value, " twirl_fid ", ms.twirl_fid(inst.state, inst.rep))
print("1 - TD^2    ", 1 - td.value ** 2)

# %% [markdown]
# Threshold bookkeeping for the fidelity version and for polarized inputs.

# %%
print(red.map_td_to_fid_thresholds(0.9, 0.1))
for n in range(1, 5):
    print(n, red.polarized_thresholds(n), red.polarized_gap(n))
