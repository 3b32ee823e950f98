"""Data model for spin-glass problems, parity layouts and compiled pair models.

All energies in this module are dimensionless. Spins use the convention
up = +1, down = -1. Logical spins are labelled 1..N; physical qubits and
ancillas carry integer ids starting at 0.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "SchemaError",
    "SpinGlassProblem",
    "QubitKind",
    "Parity",
    "ParityQubit",
    "ParityConstraint",
    "TwoBodyModel",
    "load_problem",
    "dump_problem",
    "classical_energy",
]


class SchemaError(ValueError):
    """Raised when a problem document does not match the expected schema.

    The offending location is kept in ``path`` (e.g. ``"couplings[2]"``).
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class QubitKind(str, enum.Enum):
    LOGICAL_PAIR = "logical_pair"
    SPLIT_ANCILLA = "split_ancilla"
    GADGET_ANCILLA = "gadget_ancilla"


class Parity(str, enum.Enum):
    """Parity class spanning the ground manifold of a constraint.

    ``EVEN`` favours an even number of down spins, i.e. a product of +1.
    """

    EVEN = "even"
    ODD = "odd"

    @property
    def target(self) -> int:
        """Value of the spin product on the ground manifold."""
        return 1 if self is Parity.EVEN else -1

    def flipped(self) -> "Parity":
        return Parity.ODD if self is Parity.EVEN else Parity.EVEN


@dataclass(frozen=True)
class SpinGlassProblem:
    """All-to-all Ising instance ``sum_i h_i s_i + sum_{i<j} J_ij s_i s_j``.

    ``couplings`` is stored as a sorted tuple of ``(i, j, J)`` with
    ``1 <= i < j <= n_logical``; absent pairs have ``J = 0``. Construct with
    :meth:`from_couplings` to get validation and canonical ordering.
    """

    n_logical: int
    couplings: tuple[tuple[int, int, float], ...] = ()
    z_fields: tuple[float, ...] = ()
    x_fields: tuple[float, ...] = ()

    def __post_init__(self):
        n = self.n_logical
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise SchemaError("n", f"expected a positive integer, got {n!r}")
        seen = set()
        for k, (i, j, J) in enumerate(self.couplings):
            where = f"couplings[{k}]"
            if i == j:
                raise SchemaError(where, f"self-coupling on spin {i}")
            if not (1 <= i <= n and 1 <= j <= n):
                raise SchemaError(where, f"index out of range 1..{n}: ({i}, {j})")
            if i > j:
                raise SchemaError(where, f"pair must satisfy i < j, got ({i}, {j})")
            if (i, j) in seen:
                raise SchemaError(where, f"duplicate pair ({i}, {j})")
            if not math.isfinite(J):
                raise SchemaError(where, f"non-finite coupling {J!r}")
            seen.add((i, j))
        for name in ("z_fields", "x_fields"):
            values = getattr(self, name)
            if len(values) != n:
                raise SchemaError(name, f"expected {n} entries, got {len(values)}")
            for k, v in enumerate(values):
                if not math.isfinite(v):
                    raise SchemaError(f"{name}[{k}]", f"non-finite value {v!r}")

    @classmethod
    def from_couplings(
        cls,
        n: int,
        couplings: Mapping[tuple[int, int], float] | Iterable[Sequence[Any]] = (),
        z_fields: Sequence[float] | None = None,
        x_fields: Sequence[float] | None = None,
    ) -> "SpinGlassProblem":
        """Build a validated problem; ``couplings`` may be a dict or ``[i, j, J]`` rows."""
        if isinstance(couplings, Mapping):
            rows = [(i, j, J) for (i, j), J in couplings.items()]
        else:
            rows = [tuple(r) for r in couplings]
        for k, row in enumerate(rows):
            if len(row) != 3:
                raise SchemaError(f"couplings[{k}]", "expected [i, j, J]")
        rows = tuple((int(i), int(j), float(J)) for i, j, J in rows)
        hz = tuple(float(v) for v in z_fields) if z_fields is not None else (0.0,) * n
        hx = tuple(float(v) for v in x_fields) if x_fields is not None else (0.0,) * n
        # validate unsorted first so error paths point at the caller's rows
        cls(n, rows, hz, hx)
        return cls(n, tuple(sorted(rows)), hz, hx)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, scale: float = 1.0) -> "SpinGlassProblem":
        """Complete graph with ``J_ij`` uniform in ``[-scale, scale]`` and no fields."""
        rows = [(i, j, float(rng.uniform(-scale, scale)))
                for i in range(1, n + 1) for j in range(i + 1, n + 1)]
        return cls.from_couplings(n, rows)

    @property
    def coupling_map(self) -> dict[tuple[int, int], float]:
        return {(i, j): J for i, j, J in self.couplings}

    def coupling(self, i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        return self.coupling_map.get((i, j), 0.0)

    @property
    def has_z_fields(self) -> bool:
        return any(h != 0.0 for h in self.z_fields)

    def total_abs_coupling(self) -> float:
        return float(sum(abs(J) for _, _, J in self.couplings))

    def with_field_spin(self) -> "SpinGlassProblem":
        """Fold the longitudinal fields into couplings to an extra spin ``N+1``.

        With that spin gauged to +1 the energies are unchanged, so a purely
        two-local instance can carry the fields through the parity encoding.
        """
        n = self.n_logical
        rows = list(self.couplings)
        rows += [(i + 1, n + 1, h) for i, h in enumerate(self.z_fields) if h != 0.0]
        return SpinGlassProblem.from_couplings(
            n + 1, rows, x_fields=list(self.x_fields) + [0.0])

    def to_dict(self) -> dict:
        return {
            "n": self.n_logical,
            "couplings": [[i, j, J] for i, j, J in self.couplings],
            "z_fields": list(self.z_fields),
            "x_fields": list(self.x_fields),
        }


def _require_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(path, f"non-finite number {value!r}")
    return value


def _require_index(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise SchemaError(path, f"expected an integer index, got {value!r}")
    return value


def load_problem(text: str | bytes | Mapping) -> SpinGlassProblem:
    """Parse a problem document (JSON text or an already-decoded mapping).

    Fields: ``n``, ``couplings: [[i, j, J], ...]``, ``z_fields``, ``x_fields``.
    Missing field vectors default to zeros.
    """
    if isinstance(text, Mapping):
        doc = text
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"not a valid document: {exc}") from None
    if not isinstance(doc, Mapping):
        raise SchemaError("", "top level must be a mapping")
    unknown = set(doc) - {"n", "couplings", "z_fields", "x_fields"}
    if unknown:
        raise SchemaError(sorted(unknown)[0], "unknown field")
    if "n" not in doc:
        raise SchemaError("n", "missing required field")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SchemaError("n", f"expected a positive integer, got {n!r}")

    rows = []
    raw = doc.get("couplings", [])
    if not isinstance(raw, list):
        raise SchemaError("couplings", "expected a list")
    for k, row in enumerate(raw):
        where = f"couplings[{k}]"
        if not isinstance(row, list) or len(row) != 3:
            raise SchemaError(where, "expected [i, j, J]")
        i = _require_index(row[0], where + "[0]")
        j = _require_index(row[1], where + "[1]")
        J = _require_number(row[2], where + "[2]")
        rows.append((i, j, J))

    vectors = {}
    for name in ("z_fields", "x_fields"):
        raw = doc.get(name)
        if raw is None:
            vectors[name] = None
            continue
        if not isinstance(raw, list):
            raise SchemaError(name, "expected a list")
        vectors[name] = [_require_number(v, f"{name}[{k}]") for k, v in enumerate(raw)]

    return SpinGlassProblem.from_couplings(n, rows, vectors["z_fields"], vectors["x_fields"])


def dump_problem(problem: SpinGlassProblem) -> str:
    """Canonical JSON form; ``load_problem(dump_problem(p)) == p``."""
    return json.dumps(problem.to_dict(), indent=2, sort_keys=True) + "\n"


def classical_energy(problem: SpinGlassProblem, assignment: Sequence[int]) -> float:
    """Energy ``sum h_i s_i + sum J_ij s_i s_j`` of a +-1 assignment (transverse fields ignored)."""
    s = np.asarray(assignment)
    if s.shape != (problem.n_logical,):
        raise ValueError(
            f"assignment has length {s.size}, problem has {problem.n_logical} spins")
    if not np.all(np.abs(s) == 1):
        raise ValueError("assignment entries must be +1 or -1")
    energy = float(np.dot(problem.z_fields, s))
    for i, j, J in problem.couplings:
        energy += J * s[i - 1] * s[j - 1]
    return energy


@dataclass(frozen=True)
class ParityQubit:
    id: int
    kind: QubitKind
    pair: tuple[int, int] | None = None
    position: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if (self.kind is QubitKind.LOGICAL_PAIR) != (self.pair is not None):
            raise ValueError(f"qubit {self.id}: pair label required iff kind is logical_pair")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "pair": list(self.pair) if self.pair is not None else None,
            "position": list(self.position),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ParityQubit":
        pair = tuple(d["pair"]) if d.get("pair") is not None else None
        return cls(int(d["id"]), QubitKind(d["kind"]), pair, tuple(d["position"]))


@dataclass(frozen=True)
class ParityConstraint:
    """Many-body term over ``member_ids`` whose ground manifold is one parity class.

    Energy is ``-strength * prod(s)`` for even parity and ``+strength * prod(s)``
    for odd parity, so the gap to the violating class is ``2 * strength``.
    """

    member_ids: tuple[int, ...]
    strength: float = 1.0
    parity: Parity = Parity.EVEN

    def __post_init__(self):
        object.__setattr__(self, "member_ids", tuple(int(m) for m in self.member_ids))
        object.__setattr__(self, "parity", Parity(self.parity))
        if len(self.member_ids) < 2:
            raise ValueError("a parity constraint needs at least two members")
        if len(set(self.member_ids)) != len(self.member_ids):
            raise ValueError(f"repeated member in {self.member_ids}")
        if not (self.strength > 0 and math.isfinite(self.strength)):
            raise ValueError(f"strength must be positive and finite, got {self.strength}")

    @classmethod
    def from_coefficient(cls, member_ids: Sequence[int], coefficient: float) -> "ParityConstraint":
        """Normalise a signed term ``c * prod(s)``: ``c < 0`` is an even constraint."""
        if coefficient == 0:
            raise ValueError("zero coefficient is not a constraint")
        parity = Parity.EVEN if coefficient < 0 else Parity.ODD
        return cls(tuple(member_ids), abs(coefficient), parity)

    @property
    def order(self) -> int:
        return len(self.member_ids)

    @property
    def coefficient(self) -> float:
        """Signed prefactor of the spin product."""
        return -self.strength * self.parity.target

    def energy(self, spins: Mapping[int, int]) -> float:
        prod = 1
        for m in self.member_ids:
            prod *= spins[m]
        return self.coefficient * prod

    def satisfied(self, spins: Mapping[int, int]) -> bool:
        prod = 1
        for m in self.member_ids:
            prod *= spins[m]
        return prod == self.parity.target

    def to_dict(self) -> dict:
        return {"members": list(self.member_ids), "strength": self.strength,
                "parity": self.parity.value}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ParityConstraint":
        return cls(tuple(d["members"]), float(d["strength"]), Parity(d["parity"]))


def _merge_terms(terms: Iterable[tuple], key_len: int) -> tuple:
    merged: dict[tuple, float] = {}
    for term in terms:
        key, w = tuple(term[:key_len]), float(term[key_len])
        merged[key] = merged.get(key, 0.0) + w
    return tuple((*k, w) for k, w in sorted(merged.items()) if w != 0.0)


@dataclass(frozen=True)
class TwoBodyModel:
    """Pair-interaction Ising model ready for annealing.

    Classical energy of an assignment ``s`` is::

        sum_(a,b,w) w s_a s_b + sum_(a,w) w s_a + sum_(a,w) problem_w s_a

    ``pair_terms`` and ``z_terms`` carry the constraint part (switched by the
    constraint schedule); ``problem_terms`` carry the encoded problem fields
    (switched by the problem schedule); ``x_terms`` are transverse driver
    weights. Use :meth:`build` to merge duplicate terms.
    """

    n_spins: int
    pair_terms: tuple[tuple[int, int, float], ...] = ()
    z_terms: tuple[tuple[int, float], ...] = ()
    x_terms: tuple[tuple[int, float], ...] = ()
    problem_terms: tuple[tuple[int, float], ...] = ()
    ancilla_ids: frozenset[int] = field(default_factory=frozenset)
    crossing_free: bool = False

    def __post_init__(self):
        seen = set()
        for a, b, w in self.pair_terms:
            if a == b:
                raise ValueError(f"pair term on a single spin {a}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"duplicate pair term {key}")
            seen.add(key)
            self._check_id(a)
            self._check_id(b)
        for terms in (self.z_terms, self.x_terms, self.problem_terms):
            for a, _ in terms:
                self._check_id(a)
        signs = {math.copysign(1.0, w) for _, _, w in self.pair_terms}
        if len(signs) > 1:
            raise ValueError("constraint pair weights must all share one sign")

    def _check_id(self, a: int):
        if not 0 <= a < self.n_spins:
            raise ValueError(f"spin id {a} outside 0..{self.n_spins - 1}")

    @classmethod
    def build(cls, n_spins: int, pair_terms=(), z_terms=(), x_terms=(), problem_terms=(),
              ancilla_ids=(), crossing_free=False) -> "TwoBodyModel":
        """Construct with duplicate terms summed and pairs stored as ``a < b``."""
        pairs = [(min(a, b), max(a, b), w) for a, b, w in pair_terms]
        return cls(
            n_spins,
            _merge_terms(pairs, 2),
            _merge_terms(z_terms, 1),
            _merge_terms(x_terms, 1),
            _merge_terms(problem_terms, 1),
            frozenset(ancilla_ids),
            crossing_free,
        )

    def energy(self, spins: Sequence[int], include_problem: bool = True) -> float:
        s = np.asarray(spins)
        e = sum(w * s[a] * s[b] for a, b, w in self.pair_terms)
        e += sum(w * s[a] for a, w in self.z_terms)
        if include_problem:
            e += sum(w * s[a] for a, w in self.problem_terms)
        return float(e)

    def without_problem(self) -> "TwoBodyModel":
        return TwoBodyModel(self.n_spins, self.pair_terms, self.z_terms, self.x_terms,
                            (), self.ancilla_ids, self.crossing_free)

    def with_problem_terms(self, terms: Iterable[tuple[int, float]]) -> "TwoBodyModel":
        return TwoBodyModel(self.n_spins, self.pair_terms, self.z_terms, self.x_terms,
                            _merge_terms(terms, 1), self.ancilla_ids, self.crossing_free)

    def to_dict(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "pair_terms": [[a, b, w] for a, b, w in self.pair_terms],
            "z_terms": [[a, w] for a, w in self.z_terms],
            "x_terms": [[a, w] for a, w in self.x_terms],
            "problem_terms": [[a, w] for a, w in self.problem_terms],
            "ancilla_ids": sorted(self.ancilla_ids),
            "crossing_free": self.crossing_free,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TwoBodyModel":
        return cls(
            int(d["n_spins"]),
            tuple((int(a), int(b), float(w)) for a, b, w in d["pair_terms"]),
            tuple((int(a), float(w)) for a, w in d["z_terms"]),
            tuple((int(a), float(w)) for a, w in d["x_terms"]),
            tuple((int(a), float(w)) for a, w in d.get("problem_terms", [])),
            frozenset(int(a) for a in d.get("ancilla_ids", [])),
            bool(d.get("crossing_free", False)),
        )
