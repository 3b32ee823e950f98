"""Parity-encoded quantum annealing with pair interactions only.

A fully connected spin glass is mapped to parity qubits with local
constraints; every constraint is reduced to pair couplings plus ancillas,
and the resulting model can be simulated, brute-force checked and mapped to
transmon/JRM circuit parameters.
"""

from . import annealer, hardware, model, oracle, parity_compiler
from .annealer import ScheduleSpec, compare_protocols, evolve, spectrum_trace
from .model import (
    Parity,
    ParityConstraint,
    SchemaError,
    SpinGlassProblem,
    TwoBodyModel,
    classical_energy,
    dump_problem,
    load_problem,
)
from .oracle import CapExceededError, enumerate_spectrum, ground_manifold, verify_equivalence
from .parity_compiler import (
    CompiledProgram,
    CompileOptions,
    DecodeError,
    compile_full,
    decompose_to_tree,
    gadgetize_3body,
    parity_encode,
    single_plaquette_program,
    split_constraint,
)

__version__ = "0.1.0"
