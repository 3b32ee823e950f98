"""Exhaustive classical enumeration used as ground truth for the compiler.

Everything here is exact: systems above :data:`MAX_SPINS` are refused rather
than sampled. State ``x`` assigns spin ``spin_ids[k]`` the value
``1 - 2 * ((x >> k) & 1)``, so bit 0 means up.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import ParityConstraint, TwoBodyModel

__all__ = [
    "MAX_SPINS",
    "ENERGY_TOL",
    "CapExceededError",
    "GroundManifoldReport",
    "EquivalenceResult",
    "ising_terms",
    "energies",
    "enumerate_spectrum",
    "ground_manifold",
    "verify_equivalence",
    "gf2_rank",
]

MAX_SPINS = 24
ENERGY_TOL = 1e-9
_CHUNK_BITS = 18


class CapExceededError(ValueError):
    pass


def ising_terms(system, include_problem: bool = True):
    """Flatten a system into ``(spin_ids, [(ids, weight), ...])``.

    Accepts a :class:`ParityConstraint`, a constraint tree (anything with a
    ``leaves()`` method), a :class:`TwoBodyModel`, or an iterable of those.
    """
    if isinstance(system, TwoBodyModel):
        terms = [((a, b), w) for a, b, w in system.pair_terms]
        terms += [((a,), w) for a, w in system.z_terms]
        if include_problem:
            terms += [((a,), w) for a, w in system.problem_terms]
        return tuple(range(system.n_spins)), terms
    if isinstance(system, ParityConstraint):
        return tuple(sorted(system.member_ids)), [(system.member_ids, system.coefficient)]
    if hasattr(system, "leaves"):
        return ising_terms(list(system.leaves()), include_problem)

    ids: set[int] = set()
    terms = []
    for part in system:
        part_ids, part_terms = ising_terms(part, include_problem)
        ids.update(part_ids)
        terms.extend(part_terms)
    return tuple(sorted(ids)), terms


def _check_cap(n: int):
    if n > MAX_SPINS:
        raise CapExceededError(
            f"exhaustive enumeration refused: {n} spins exceeds the cap of {MAX_SPINS}")


def _chunks(n: int):
    size = 1 << min(n, _CHUNK_BITS)
    for start in range(0, 1 << n, size):
        yield start, np.arange(start, start + size, dtype=np.int64)


def _chunk_energies(states: np.ndarray, positions, terms) -> np.ndarray:
    bits = [((states >> k) & 1).astype(np.int8) for k in range(len(positions))]
    e = np.zeros(states.shape, dtype=float)
    for ids, w in terms:
        parity = np.zeros(states.shape, dtype=np.int8)
        for i in ids:
            parity ^= bits[positions[i]]
        e += w * (1 - 2 * parity.astype(float))
    return e


def energies(system, include_problem: bool = True) -> tuple[tuple[int, ...], np.ndarray]:
    """All ``2**n`` energies in state order, together with the spin id order."""
    spin_ids, terms = ising_terms(system, include_problem)
    n = len(spin_ids)
    _check_cap(n)
    positions = {s: k for k, s in enumerate(spin_ids)}
    out = np.concatenate([_chunk_energies(x, positions, terms) for _, x in _chunks(n)])
    return spin_ids, out


def _group_levels(values: np.ndarray, weights: np.ndarray, tol: float):
    order = np.argsort(values, kind="stable")
    values, weights = values[order], weights[order]
    levels: list[list] = []
    for v, w in zip(values, weights):
        if levels and v - levels[-1][2] <= tol:
            levels[-1][1] += int(w)
            levels[-1][2] = v
        else:
            # [representative (lowest), multiplicity, last value seen]
            levels.append([float(v), int(w), v])
    return [(v, m) for v, m, _ in levels]


def _chunk_levels(e: np.ndarray, tol: float):
    e = np.sort(e)
    breaks = np.flatnonzero(np.diff(e) > tol) + 1
    starts = np.concatenate(([0], breaks))
    counts = np.diff(np.concatenate((starts, [e.size])))
    return e[starts], counts


def enumerate_spectrum(system, include_problem: bool = True,
                       tol: float = ENERGY_TOL) -> list[tuple[float, int]]:
    """Exact classical spectrum as a sorted list of ``(energy, multiplicity)``.

    >>> enumerate_spectrum(ParityConstraint((0, 1), 1.0))
    [(-1.0, 2), (1.0, 2)]
    """
    spin_ids, terms = ising_terms(system, include_problem)
    n = len(spin_ids)
    _check_cap(n)
    positions = {s: k for k, s in enumerate(spin_ids)}
    values, counts = [], []
    for _, x in _chunks(n):
        v, c = _chunk_levels(_chunk_energies(x, positions, terms), tol)
        values.append(v)
        counts.append(c)
    return _group_levels(np.concatenate(values), np.concatenate(counts), tol)


@dataclass(frozen=True)
class GroundManifoldReport:
    """Minimum, ground states and gap of a classical Ising system.

    ``ground_states`` are bitmasks over ``spin_ids``; ``marginal_ground`` are
    bitmasks over ``shared_ids`` (bit ``k`` set means ``shared_ids[k]`` down).
    ``gap`` is ``inf`` when the spectrum is flat.
    """

    spin_ids: tuple[int, ...]
    min_energy: float
    ground_states: frozenset[int]
    gap: float
    shared_ids: tuple[int, ...] = ()
    marginal_ground: frozenset[int] = field(default_factory=frozenset)

    def ground_assignments(self) -> list[dict[int, int]]:
        return [{s: 1 - 2 * ((x >> k) & 1) for k, s in enumerate(self.spin_ids)}
                for x in sorted(self.ground_states)]

    def to_dict(self) -> dict:
        return {
            "spin_ids": list(self.spin_ids),
            "min_energy": self.min_energy,
            "ground_states": sorted(self.ground_states),
            "gap": self.gap if np.isfinite(self.gap) else None,
            "shared_ids": list(self.shared_ids),
            "marginal_ground": sorted(self.marginal_ground),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _project(states: Iterable[int], spin_ids: Sequence[int], shared: Sequence[int]) -> frozenset[int]:
    positions = {s: k for k, s in enumerate(spin_ids)}
    out = set()
    for x in states:
        m = 0
        for k, s in enumerate(shared):
            m |= ((x >> positions[s]) & 1) << k
        out.add(m)
    return frozenset(out)


def ground_manifold(system, shared_spins: Iterable[int] | None = None,
                    include_problem: bool = True, tol: float = ENERGY_TOL) -> GroundManifoldReport:
    """Exhaustive ground manifold, gap and (optionally) its marginal on ``shared_spins``."""
    spin_ids, terms = ising_terms(system, include_problem)
    n = len(spin_ids)
    _check_cap(n)
    positions = {s: k for k, s in enumerate(spin_ids)}
    shared = tuple(sorted(shared_spins)) if shared_spins is not None else ()
    missing = set(shared) - set(spin_ids)
    if missing:
        raise ValueError(f"shared spins {sorted(missing)} not present in the system")

    best = np.inf
    ground: list[np.ndarray] = []
    level_values, level_counts = [], []
    for _, x in _chunks(n):
        e = _chunk_energies(x, positions, terms)
        v, c = _chunk_levels(e, tol)
        level_values.append(v[:2])
        level_counts.append(c[:2])
        lo = e.min()
        if lo < best - tol:
            best = lo
            ground = [x[e <= lo + tol]]
        elif lo <= best + tol:
            best = min(best, lo)
            ground.append(x[e <= best + tol])
    states = frozenset(int(s) for g in ground for s in g)
    levels = _group_levels(np.concatenate(level_values), np.concatenate(level_counts), tol)
    gap = levels[1][0] - levels[0][0] if len(levels) > 1 else np.inf
    return GroundManifoldReport(
        spin_ids=spin_ids,
        min_energy=float(levels[0][0]),
        ground_states=states,
        gap=float(gap),
        shared_ids=shared,
        marginal_ground=_project(states, spin_ids, shared) if shared else frozenset(),
    )


@dataclass(frozen=True)
class EquivalenceResult:
    ok: bool
    gap_original: float
    gap_decomposed: float
    original: GroundManifoldReport
    decomposed: GroundManifoldReport

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "gap_original": self.gap_original,
            "gap_decomposed": self.gap_decomposed,
            "original": self.original.to_dict(),
            "decomposed": self.decomposed.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def verify_equivalence(original, decomposed, shared_spins: Iterable[int],
                       include_problem: bool = True) -> EquivalenceResult:
    """Compare the ground manifolds of two systems restricted to ``shared_spins``.

    ``ok`` holds when the projected ground manifolds coincide as sets; both
    gaps are reported so callers can also check gap preservation.
    """
    shared = tuple(sorted(set(shared_spins)))
    a = ground_manifold(original, shared, include_problem)
    b = ground_manifold(decomposed, shared, include_problem)
    return EquivalenceResult(a.marginal_ground == b.marginal_ground, a.gap, b.gap, a, b)


def gf2_rank(checks: Iterable[Iterable[int]], n_qubits: int) -> int:
    """Rank over GF(2) of the parity-check matrix whose rows are the given supports.

    >>> gf2_rank([{0, 1}, {1, 2}, {0, 2}], 3)
    2
    """
    pivots: dict[int, int] = {}
    for row_ids in checks:
        row = 0
        for q in map(int, row_ids):
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} outside 0..{n_qubits - 1}")
            row ^= 1 << q
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = row
                break
            row ^= pivots[top]
    return len(pivots)
