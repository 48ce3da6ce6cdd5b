# %% [markdown]
# How far does time evolution break a symmetry? The worst-case and average
# squared commutator norms, and the Hadamard-test protocols that estimate them.

# %%
import numpy as np

from symkit import measures as ms
from symkit import protocols as pr
from symkit.symmetry import shift_operator, shift_rep

rep = shift_rep(4)
s = shift_operator(4)
rng = np.random.default_rng(0)
a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
generic = (a + a.conj().T) / 2
hopping = s + s.conj().T  # commutes with every shift

for t in (0.25, 0.5, 1.0, 2.0):
    mx = ms.ham_max_spec(generic, t, rep)
    avg = ms.ham_avg_spec(generic, t, rep).value
    print(f"t={t:4.2f}  max {mx.value:.4f} (g={mx.argmax_g})  avg {avg:.4f}  "
          f"hopping {ms.ham_max_spec(hopping, t, rep).value:.1e}")

# %%
t = 1.0
print("QMA protocol", pr.run_exact(pr.ham_qma_protocol(generic, t, rep)), "= max / 4 =",
      ms.ham_max_spec(generic, t, rep).value / 4)
print("QAM protocol", pr.run_exact(pr.ham_qam_protocol(generic, t, rep)), "= avg / 4 =",
      ms.ham_avg_spec(generic, t, rep).value / 4)
