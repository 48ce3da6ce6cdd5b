# %% [markdown]
# Two-message proof systems: the best prover's acceptance probability is a
# Bose-symmetric-extension fidelity. The SDP and a see-saw over prover
# isometries should land on the same number.

# %%
from symkit import measures as ms
from symkit import reductions as red
from symkit.optimize.haar import make_rng

rng = make_rng(11)
for _ in range(5):
    inst = red.random_qip2(rng)
    sdp = ms.bse_fidelity(inst.state, inst.rep, seesaw=False).value
    print(f"dims {inst.payload['dims']}: SDP {sdp:.8f}  see-saw {red.qip2_accept(inst):.8f}")

# %% [markdown]
# Verifiers that ignore the prover give exactly 1 or 0.

# %%
for accept in (True, False):
    inst = red.degenerate_qip2(accept, make_rng(0))
    print("always", "accept" if accept else "reject", inst.measure().value)

# %% [markdown]
# Three messages: the prover also acts before the verifier's first move, so
# the object is a channel. Entanglement-breaking provers give a lower value.

# %%
inst = red.random_qip3(make_rng(2))
print("channel_bse", inst.measure().value, " nested optimizer", red.qip3_accept(inst))

eb = red.random_qipeb2(make_rng(4))
sep = ms.sep_ext_bose(eb.state, eb.rep)
print("sep_ext_bose", sep.value, "<= bse", ms.bse_fidelity(eb.state, eb.rep).value)
