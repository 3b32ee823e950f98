"""
Compiling a four-spin glass and decoding its ground state
=========================================================

Six pair qubits store the relative alignment of each logical pair, three
plaquette constraints keep them consistent, and every constraint is
rewritten with pair couplings and ancillas.
"""

# %%
import itertools

import numpy as np

from parity_annealer import SpinGlassProblem, classical_energy, compile_full, ground_manifold

problem = SpinGlassProblem.random(4, np.random.default_rng(11))
program = compile_full(problem)
kinds = [q.kind.value for q in program.layout.qubits]
print("physical spins:", program.n_spins, {k: kinds.count(k) for k in sorted(set(kinds))})
print("constraint strength:", round(program.constraint_strength, 3))
print("layout crossing free:", program.model.crossing_free)

# %%
# The compiled ground states decode to a logical optimum. Logical spin 1 is
# fixed to +1, the remaining global flip is a symmetry of the problem.
best = min(itertools.product((1, -1), repeat=4), key=lambda s: classical_energy(problem, s))
for a in ground_manifold(program.model).ground_assignments():
    s = program.decode([a[k] for k in range(program.n_spins)])
    print("decoded", s, "energy", round(classical_energy(problem, s), 6))
print("brute-force optimum energy", round(classical_energy(problem, best), 6))
