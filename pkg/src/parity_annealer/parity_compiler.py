"""Parity encoding and decomposition of plaquette constraints into pair terms.

The pipeline is::

    SpinGlassProblem --parity_encode--> ParityLayout
        --split_constraint / decompose_to_tree--> 3-body leaves
        --gadgetize_3body--> TwoBodyModel

:func:`compile_full` chains the steps and :func:`decode` maps physical
readouts back to logical spins.

Geometry: logical qubit ``(i, j)`` sits at ``x = i + j``, ``y = j - i`` on a
diagonal grid. Stored positions are ``(row, col) = (3y, 3x)`` so that
plaquette centres and triangle centroids are integers too.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import (
    Parity,
    ParityConstraint,
    ParityQubit,
    QubitKind,
    SpinGlassProblem,
    TwoBodyModel,
)
from .oracle import gf2_rank

__all__ = [
    "DecodeError",
    "SplitPolicy",
    "ParityLayout",
    "ConstraintTree",
    "CompileOptions",
    "CompiledProgram",
    "parity_encode",
    "encode_state",
    "split_constraint",
    "decompose_to_tree",
    "gadgetize_3body",
    "compile_full",
    "single_plaquette_program",
    "decode",
    "segments_cross",
]

_SCALE = 3


class DecodeError(ValueError):
    pass


class SplitPolicy(str, enum.Enum):
    BALANCED = "balanced"
    PAPER_EXAMPLE = "paper_example"
    LEFT_PAIR = "left_pair"


@dataclass(frozen=True)
class ParityLayout:
    """Physical qubits on the planar lattice plus the plaquette constraints.

    Four-body plaquettes list their members as ``(n, e, s, w)``; three-body
    boundary plaquettes as ``(w, n, e)``.
    """

    n_logical: int
    qubits: tuple[ParityQubit, ...]
    plaquettes: tuple[ParityConstraint, ...]

    def __post_init__(self):
        ids = [q.id for q in self.qubits]
        if ids != list(range(len(ids))):
            raise ValueError("qubit ids must be unique and contiguous from 0")
        known = set(ids)
        for p in self.plaquettes:
            if not set(p.member_ids) <= known:
                raise ValueError(f"plaquette {p.member_ids} references unknown qubits")

    @property
    def logical_qubits(self) -> tuple[ParityQubit, ...]:
        return tuple(q for q in self.qubits if q.kind is QubitKind.LOGICAL_PAIR)

    @property
    def n_logical_qubits(self) -> int:
        return len(self.logical_qubits)

    @property
    def pair_to_id(self) -> dict[tuple[int, int], int]:
        return {q.pair: q.id for q in self.logical_qubits}

    def check_rank(self) -> int:
        """GF(2) rank of the plaquette checks; must equal ``K - (N - 1)``."""
        return gf2_rank([p.member_ids for p in self.plaquettes], len(self.qubits))

    def to_dict(self) -> dict:
        return {
            "n_logical": self.n_logical,
            "qubits": [q.to_dict() for q in self.qubits],
            "plaquettes": [p.to_dict() for p in self.plaquettes],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ParityLayout":
        return cls(int(d["n_logical"]),
                   tuple(ParityQubit.from_dict(q) for q in d["qubits"]),
                   tuple(ParityConstraint.from_dict(p) for p in d["plaquettes"]))


def _grid(i: int, j: int) -> tuple[int, int]:
    return (_SCALE * (j - i), _SCALE * (i + j))


def _pair_order(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def _plaquette_roles(n: int, pair_id: Mapping[tuple[int, int], int]):
    """Yield ``(roles, members)`` per plaquette, ``roles`` mapping n/e/s/w to ids."""
    for i, j in _pair_order(n - 1):
        roles = {"w": pair_id[(i, j)], "n": pair_id[(i, j + 1)], "e": pair_id[(i + 1, j + 1)]}
        if i + 1 < j:
            roles["s"] = pair_id[(i + 1, j)]
            yield roles, (roles["n"], roles["e"], roles["s"], roles["w"])
        else:
            yield roles, (roles["w"], roles["n"], roles["e"])


def parity_encode(problem: SpinGlassProblem | int, strength: float = 1.0) -> ParityLayout:
    """Place the ``K = N(N-1)/2`` pair qubits and generate one constraint per unit cell.

    Every plaquette is an even constraint: its members' product is +1 for any
    logical assignment, since each logical spin appears twice in it.
    """
    n = problem if isinstance(problem, int) else problem.n_logical
    if n < 3:
        raise ValueError(f"no constraints exist for N = {n}; need N >= 3")
    pairs = _pair_order(n)
    qubits = tuple(ParityQubit(k, QubitKind.LOGICAL_PAIR, p, _grid(*p)) for k, p in enumerate(pairs))
    pair_id = {p: k for k, p in enumerate(pairs)}
    plaquettes = tuple(ParityConstraint(members, strength, Parity.EVEN)
                       for _, members in _plaquette_roles(n, pair_id))
    return ParityLayout(n, qubits, plaquettes)


def encode_state(layout: ParityLayout, logical: Sequence[int]) -> np.ndarray:
    """Physical pair-qubit values ``q_ij = s_i s_j`` for a logical assignment."""
    s = np.asarray(logical)
    if s.shape != (layout.n_logical,):
        raise ValueError(f"expected {layout.n_logical} logical spins, got {s.size}")
    out = np.ones(len(layout.qubits), dtype=int)
    for q in layout.logical_qubits:
        i, j = q.pair
        out[q.id] = s[i - 1] * s[j - 1]
    return out


def split_constraint(c: ParityConstraint, cut: int, ancilla_id: int,
                     child_parity: Parity | str = Parity.EVEN) -> tuple[ParityConstraint, ParityConstraint]:
    """Split ``c`` into ``members[:cut] + (a,)`` and ``(a,) + members[cut:]``.

    The ancilla carries the parity of the first subset to the second. The
    first child gets ``child_parity``; the second gets whatever makes the
    product of both targets equal the root's target. Both keep the root's
    strength, so the gap stays ``2 * strength``.
    """
    k = c.order
    if not 1 <= cut <= k - 1:
        raise ValueError(f"degenerate cut {cut} for a constraint of order {k}")
    if ancilla_id in c.member_ids:
        raise ValueError(f"ancilla id {ancilla_id} is already a member")
    first = Parity(child_parity)
    second = first if c.parity is Parity.EVEN else first.flipped()
    return (ParityConstraint(c.member_ids[:cut] + (ancilla_id,), c.strength, first),
            ParityConstraint((ancilla_id,) + c.member_ids[cut:], c.strength, second))


@dataclass(frozen=True)
class ConstraintTree:
    """Recursive split of a constraint; leaves are 3-body (or the unsplit root)."""

    constraint: ParityConstraint
    ancilla: int | None = None
    children: tuple["ConstraintTree", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list[ParityConstraint]:
        if self.is_leaf:
            return [self.constraint]
        return [leaf for child in self.children for leaf in child.leaves()]

    def ancillas(self) -> list[int]:
        if self.is_leaf:
            return []
        return [self.ancilla] + [a for child in self.children for a in child.ancillas()]

    def is_acyclic(self) -> bool:
        """Leaves as nodes, shared ancillas as edges: must form a tree."""
        leaves = self.leaves()
        anc = self.ancillas()
        if len(anc) != len(leaves) - 1:
            return False
        owners = {a: [k for k, leaf in enumerate(leaves) if a in leaf.member_ids] for a in anc}
        if any(len(v) != 2 for v in owners.values()):
            return False
        adj: dict[int, set[int]] = {k: set() for k in range(len(leaves))}
        for u, v in owners.values():
            adj[u].add(v)
            adj[v].add(u)
        seen, stack = {0}, [0]
        while stack:
            for nxt in adj[stack.pop()] - seen:
                seen.add(nxt)
                stack.append(nxt)
        return len(seen) == len(leaves)

    def to_dict(self) -> dict:
        return {"constraint": self.constraint.to_dict(), "ancilla": self.ancilla,
                "children": [c.to_dict() for c in self.children]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ConstraintTree":
        return cls(ParityConstraint.from_dict(d["constraint"]), d.get("ancilla"),
                   tuple(cls.from_dict(c) for c in d.get("children", [])))


def _cut_for(policy: SplitPolicy, order: int, is_root: bool, ancilla_first: bool) -> int:
    if policy is SplitPolicy.BALANCED:
        return order // 2
    if policy is SplitPolicy.LEFT_PAIR or is_root or not ancilla_first:
        return 2
    # PAPER_EXAMPLE: a branch that starts with an ancilla peels its trailing pair
    return order - 2


def decompose_to_tree(c: ParityConstraint, policy: SplitPolicy | str = SplitPolicy.BALANCED,
                      next_id: int | None = None,
                      child_parity: Parity | str = Parity.EVEN) -> ConstraintTree:
    """Recursively split ``c`` until every leaf is a 3-body constraint.

    Fresh ancilla ids count up from ``next_id`` (default: one past the
    largest member id), allocated depth first. An order-k root yields
    ``k - 3`` ancillas and ``k - 2`` leaves.
    """
    policy = SplitPolicy(policy)
    if c.order < 3:
        raise ValueError(f"constraint of order {c.order} cannot be decomposed; need >= 3")
    counter = [max(c.member_ids) + 1 if next_id is None else next_id]
    ancillas: set[int] = set()

    def build(node: ParityConstraint, is_root: bool) -> ConstraintTree:
        if node.order == 3:
            return ConstraintTree(node)
        a = counter[0]
        counter[0] += 1
        cut = _cut_for(policy, node.order, is_root, node.member_ids[0] in ancillas)
        ancillas.add(a)
        left, right = split_constraint(node, cut, a, child_parity)
        return ConstraintTree(node, a, (build(left, False), build(right, False)))

    return build(c, True)


def gadgetize_3body(c: ParityConstraint, ancilla_id: int) -> TwoBodyModel:
    """Pair-interaction gadget whose ground manifold reproduces a 3-body constraint.

    For strength ``C`` the fragment is ``C (s1 s2 + s2 s3 + s3 s1)``
    ``+ 2C sum_i s_i s_a - t C sum_i s_i - 2 t C s_a`` with ``t = +1`` for even
    and ``-1`` for odd parity. Pair weights are always positive; the odd form
    is the even form under a global flip.
    """
    if c.order != 3:
        raise ValueError(f"gadgetize_3body needs exactly 3 members, got {c.order}")
    if ancilla_id in c.member_ids:
        raise ValueError(f"ancilla id {ancilla_id} is already a member")
    s, t = c.strength, c.parity.target
    m1, m2, m3 = c.member_ids
    pairs = [(m1, m2, s), (m2, m3, s), (m3, m1, s)] + [(m, ancilla_id, 2 * s) for m in c.member_ids]
    fields = [(m, -t * s) for m in c.member_ids] + [(ancilla_id, -2 * t * s)]
    n = max(max(c.member_ids), ancilla_id) + 1
    return TwoBodyModel.build(n, pairs, fields, ancilla_ids=[ancilla_id])


def _orientation(p, q, r) -> int:
    v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (v > 0) - (v < 0)


def _on_segment(p, q, r) -> bool:
    return min(p[0], r[0]) <= q[0] <= max(p[0], r[0]) and min(p[1], r[1]) <= q[1] <= max(p[1], r[1])


def segments_cross(a, b, c, d) -> bool:
    """True if segments ``ab`` and ``cd`` meet anywhere other than a shared endpoint."""
    shared = {a, b} & {c, d}
    o1, o2 = _orientation(a, b, c), _orientation(a, b, d)
    o3, o4 = _orientation(c, d, a), _orientation(c, d, b)
    if shared:
        if len(shared) == 2:
            return True  # identical edge
        # sharing one endpoint: only a collinear overlap counts
        if o1 == 0 and o2 == 0:
            (p,) = shared
            u = b if a == p else a
            v = d if c == p else c
            return (u[0] - p[0]) * (v[0] - p[0]) + (u[1] - p[1]) * (v[1] - p[1]) > 0
        return False
    if o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4):
        return True
    return ((o1 == 0 and _on_segment(a, c, b)) or (o2 == 0 and _on_segment(a, d, b))
            or (o3 == 0 and _on_segment(c, a, d)) or (o4 == 0 and _on_segment(c, b, d)))


def _crossing_free(pairs: Iterable[tuple[int, int, float]], positions: Mapping[int, tuple[int, int]]) -> bool:
    segs = [(positions[a], positions[b]) for a, b, _ in pairs]
    if len(set(positions.values())) != len(positions):
        return False
    for (a, b), (c, d) in combinations(segs, 2):
        if segments_cross(a, b, c, d):
            return False
    return True


@dataclass(frozen=True)
class CompileOptions:
    """Knobs for :func:`compile_full`.

    ``constraint_strength`` defaults to ``strength_ratio * sum|J_ij| + 1``.
    ``driver_scope`` is ``"all"`` (every spin gets a transverse field) or
    ``"logical"`` (pair qubits only).
    """

    constraint_strength: float | None = None
    strength_ratio: float = 4.0
    grouping: str = "ne-sw"
    driver_scope: str = "all"
    driver_weight: float = 1.0
    policy: SplitPolicy = SplitPolicy.BALANCED

    def __post_init__(self):
        object.__setattr__(self, "policy", SplitPolicy(self.policy))
        if self.grouping not in ("ne-sw", "nw-es"):
            raise ValueError(f"unknown grouping {self.grouping!r}")
        if self.driver_scope not in ("all", "logical"):
            raise ValueError(f"unknown driver scope {self.driver_scope!r}")

    def strength_for(self, problem: SpinGlassProblem) -> float:
        if self.constraint_strength is not None:
            return float(self.constraint_strength)
        return self.strength_ratio * problem.total_abs_coupling() + 1.0

    def to_dict(self) -> dict:
        return {"constraint_strength": self.constraint_strength, "strength_ratio": self.strength_ratio,
                "grouping": self.grouping, "driver_scope": self.driver_scope,
                "driver_weight": self.driver_weight, "policy": self.policy.value}


@dataclass(frozen=True)
class CompiledProgram:
    """Output of :func:`compile_full`.

    ``layout`` holds every physical spin (pair qubits first, then ancillas)
    and the original plaquettes; ``trees`` has one entry per plaquette.
    When the problem has longitudinal fields, ``field_spin`` is set and the
    layout encodes an extra logical spin ``N + 1`` gauged to +1.
    """

    problem: SpinGlassProblem
    layout: ParityLayout
    trees: tuple[ConstraintTree, ...]
    model: TwoBodyModel
    decode_map: Mapping[int, tuple[int, int]]
    constraint_strength: float
    field_spin: bool = False
    options: CompileOptions = field(default_factory=CompileOptions)

    @property
    def n_spins(self) -> int:
        return self.model.n_spins

    @property
    def logical_ids(self) -> list[int]:
        return sorted(self.decode_map)

    def decode(self, physical: Sequence[int]) -> np.ndarray:
        """Logical assignment (spin 1 gauged to +1 unless a field spin fixes the gauge)."""
        s = decode(self.layout, physical)
        if self.field_spin:
            s = s[:-1] * s[-1]
        return s

    def to_dict(self) -> dict:
        return {
            "problem": self.problem.to_dict(),
            "layout": self.layout.to_dict(),
            "trees": [t.to_dict() for t in self.trees],
            "model": self.model.to_dict(),
            "decode_map": [[qid, list(pair)] for qid, pair in sorted(self.decode_map.items())],
            "constraint_strength": self.constraint_strength,
            "field_spin": self.field_spin,
            "options": self.options.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping) -> "CompiledProgram":
        from .model import load_problem

        return cls(
            problem=load_problem(d["problem"]),
            layout=ParityLayout.from_dict(d["layout"]),
            trees=tuple(ConstraintTree.from_dict(t) for t in d["trees"]),
            model=TwoBodyModel.from_dict(d["model"]),
            decode_map={int(q): tuple(p) for q, p in d["decode_map"]},
            constraint_strength=float(d["constraint_strength"]),
            field_spin=bool(d.get("field_spin", False)),
            options=CompileOptions(**d.get("options", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "CompiledProgram":
        return cls.from_dict(json.loads(text))


def _centroid(points: Sequence[tuple[int, int]]) -> tuple[int, int]:
    rows = sum(p[0] for p in points)
    cols = sum(p[1] for p in points)
    return (rows // len(points), cols // len(points))


def compile_full(problem: SpinGlassProblem, options: CompileOptions | None = None) -> CompiledProgram:
    """Compile a spin glass all the way down to pair interactions with ancillas.

    Each 4-body plaquette is split once (one split ancilla) and both 3-body
    halves are gadgetized (one ancilla each), i.e. 3 ancillas per plaquette;
    3-body boundary plaquettes are gadgetized directly (one ancilla). Ancilla
    ids are allocated plaquette by plaquette, so output is deterministic.
    """
    options = options or CompileOptions()
    work = problem.with_field_spin() if problem.has_z_fields else problem
    strength = options.strength_for(problem)
    base = parity_encode(work, strength)
    n_logical = work.n_logical
    pair_id = base.pair_to_id
    positions = {q.id: q.position for q in base.qubits}
    qubits = list(base.qubits)
    next_id = len(qubits)

    def new_qubit(kind: QubitKind, pos: tuple[int, int]) -> int:
        nonlocal next_id
        qubits.append(ParityQubit(next_id, kind, None, pos))
        positions[next_id] = pos
        next_id += 1
        return next_id - 1

    trees, fragments = [], []
    for (roles, _), plaquette in zip(_plaquette_roles(n_logical, pair_id), base.plaquettes):
        if plaquette.order == 4:
            if options.grouping == "ne-sw":
                ordered = (roles["n"], roles["e"], roles["s"], roles["w"])
            else:
                ordered = (roles["n"], roles["w"], roles["e"], roles["s"])
            root = ParityConstraint(ordered, plaquette.strength, plaquette.parity)
            tree = decompose_to_tree(root, options.policy, next_id=next_id)
            centre = _centroid([positions[m] for m in ordered])
            for a in tree.ancillas():
                assert new_qubit(QubitKind.SPLIT_ANCILLA, centre) == a
            for leaf in tree.leaves():
                g = new_qubit(QubitKind.GADGET_ANCILLA, _centroid([positions[m] for m in leaf.member_ids]))
                fragments.append(gadgetize_3body(leaf, g))
            trees.append(ConstraintTree(plaquette, tree.ancilla, tree.children))
        else:
            g = new_qubit(QubitKind.GADGET_ANCILLA, _centroid([positions[m] for m in plaquette.member_ids]))
            fragments.append(gadgetize_3body(plaquette, g))
            trees.append(ConstraintTree(plaquette))

    n_total = len(qubits)
    pairs = [t for f in fragments for t in f.pair_terms]
    zs = [t for f in fragments for t in f.z_terms]
    ancillas = [q.id for q in qubits if q.kind is not QubitKind.LOGICAL_PAIR]
    driven = range(n_total) if options.driver_scope == "all" else [q.id for q in base.qubits]
    problem_terms = [(pair_id[(i, j)], J) for i, j, J in work.couplings]
    merged = TwoBodyModel.build(n_total, pairs, zs)
    model = TwoBodyModel.build(
        n_total, merged.pair_terms, merged.z_terms,
        x_terms=[(q, options.driver_weight) for q in driven],
        problem_terms=problem_terms,
        ancilla_ids=ancillas,
        crossing_free=_crossing_free(merged.pair_terms, positions),
    )
    layout = ParityLayout(n_logical, tuple(qubits), base.plaquettes)
    decode_map = {q.id: q.pair for q in base.qubits}
    return CompiledProgram(problem, layout, tuple(trees), model, decode_map, strength,
                           problem.has_z_fields, options)


def single_plaquette_program(fields: Sequence[float] = (0.0, 0.0, 0.0, 0.0), strength: float = 1.0,
                             grouping: str = "ne-sw", driver_scope: str = "all") -> TwoBodyModel:
    """The 7-spin pair model of one even 4-body plaquette with local fields on its 4 qubits.

    Spins 0..3 are the plaquette qubits ``(n, e, s, w)``, spin 4 the split
    ancilla and spins 5, 6 the gadget ancillas.
    """
    if len(fields) != 4:
        raise ValueError("expected four local fields")
    root = ParityConstraint((0, 1, 2, 3) if grouping == "ne-sw" else (0, 3, 1, 2), strength)
    left, right = split_constraint(root, 2, 4)
    frags = [gadgetize_3body(left, 5), gadgetize_3body(right, 6)]
    driven = range(7) if driver_scope == "all" else range(4)
    return TwoBodyModel.build(
        7,
        [t for f in frags for t in f.pair_terms],
        [t for f in frags for t in f.z_terms],
        x_terms=[(q, 1.0) for q in driven],
        problem_terms=list(enumerate(fields)),
        ancilla_ids=[4, 5, 6],
    )


def decode(layout: ParityLayout, physical: Sequence[int] | Mapping[int, int]) -> np.ndarray:
    """Recover logical spins from a physical readout.

    All plaquettes must be satisfied. Logical spin 1 is fixed to +1 and
    ``s_j = q_(1,j)``; every other pair qubit must then agree with
    ``s_i s_j``.
    """
    if isinstance(physical, Mapping):
        value = dict(physical)
    else:
        value = dict(enumerate(int(v) for v in physical))
    for q in layout.logical_qubits:
        if q.id not in value:
            raise DecodeError(f"missing value for qubit {q.id}")
        if value[q.id] not in (1, -1):
            raise DecodeError(f"qubit {q.id} has value {value[q.id]}, expected +1 or -1")
    for p in layout.plaquettes:
        if not p.satisfied(value):
            raise DecodeError(f"unsatisfied plaquette {list(p.member_ids)} ({p.parity.value} parity)")
    pair_id = layout.pair_to_id
    n = layout.n_logical
    s = np.ones(n, dtype=int)
    for j in range(2, n + 1):
        s[j - 1] = value[pair_id[(1, j)]] * s[0]
    for (i, j), qid in pair_id.items():
        if value[qid] != s[i - 1] * s[j - 1]:
            raise DecodeError(f"not in code space: qubit {qid} for pair {(i, j)} disagrees")
    return s
