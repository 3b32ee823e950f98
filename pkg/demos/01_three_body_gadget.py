"""
A three-body constraint from pair interactions
==============================================

One ancilla and six pair couplings reproduce the ground manifold of an
even three-body term ``-C s1 s2 s3``.
"""

# %%
# Build the gadget at unit strength; spin 3 is the ancilla.
from parity_annealer import ParityConstraint, enumerate_spectrum, gadgetize_3body, ground_manifold

gadget = gadgetize_3body(ParityConstraint((0, 1, 2), strength=1.0), ancilla_id=3)
print("pair terms:", gadget.pair_terms)
print("fields:    ", gadget.z_terms)

# %%
# The 16 classical states fall into four levels. The gap above the
# four-fold ground level equals the gap of the bare constraint, 2C.
for energy, mult in enumerate_spectrum(gadget):
    print(f"E = {energy:+5.1f}  x{mult}")

# %%
# Marginalised over the ancilla, the ground states are exactly the states
# with an even number of down spins.
report = ground_manifold(gadget, shared_spins=[0, 1, 2])
for a in report.ground_assignments():
    print([a[k] for k in range(3)], "ancilla", a[3])
