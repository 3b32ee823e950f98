"""Time-dependent annealing Hamiltonians, spectral traces and coherent sweeps.

``H(t) = A(t) sum_k x_k X_k + B(t) H_problem + C(t) H_constraint``

with the diagonal parts taken from a :class:`~parity_annealer.model.TwoBodyModel`
(or from :func:`plaquette_terms` for the bare many-body form). Basis state
``x`` has spin ``k`` up when bit ``k`` of ``x`` is 0. The Hamiltonian is
real symmetric, so eigendecompositions use ``eigh``.
"""

from __future__ import annotations

import csv
import enum
import io
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import ParityConstraint, TwoBodyModel
from .oracle import CapExceededError

__all__ = [
    "MAX_DENSE_SPINS",
    "ScheduleMode",
    "ScheduleSpec",
    "AnnealingTerms",
    "plaquette_terms",
    "build_hamiltonian",
    "SpectrumTrace",
    "spectrum_trace",
    "QuantumState",
    "EvolveResult",
    "evolve",
    "ground_space",
    "compare_protocols",
    "traces_to_csv",
]

MAX_DENSE_SPINS = 16
_SPARSE_ABOVE = 10
_DENSE_FALLBACK = 13
DEGENERACY_RTOL = 1e-8


class ScheduleMode(str, enum.Enum):
    RAMP = "ramp"
    ALWAYS_ON = "always_on"


@dataclass(frozen=True)
class ScheduleSpec:
    """Linear schedules: ``A`` ramps down, ``B`` (and ``C`` in ramp mode) ramp up.

    In ``always_on`` mode the constraint schedule stays at ``C_max``.
    """

    mode: ScheduleMode = ScheduleMode.RAMP
    A_max: float = 1.0
    B_max: float = 1.0
    C_max: float = 1.0
    T: float = 10.0
    shape: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "mode", ScheduleMode(self.mode))
        if self.shape != "linear":
            raise ValueError(f"unsupported schedule shape {self.shape!r}")
        if self.T < 0:
            raise ValueError("sweep time must be non-negative")

    def fraction(self, t: float) -> float:
        """Sweep progress ``t / T`` clipped to [0, 1]; a zero-length sweep is already done."""
        if self.T == 0:
            return 1.0 if t > 0 else 0.0
        return float(np.clip(t / self.T, 0.0, 1.0))

    def at_fraction(self, s: float) -> tuple[float, float, float]:
        """``(A, B, C)`` at sweep progress ``s``."""
        C = self.C_max if self.mode is ScheduleMode.ALWAYS_ON else self.C_max * s
        return self.A_max * (1.0 - s), self.B_max * s, C

    def A(self, t: float) -> float:
        return self.coefficients(t)[0]

    def B(self, t: float) -> float:
        return self.coefficients(t)[1]

    def C(self, t: float) -> float:
        return self.coefficients(t)[2]

    def coefficients(self, t: float) -> tuple[float, float, float]:
        return self.at_fraction(self.fraction(t))

    def with_mode(self, mode: ScheduleMode | str) -> "ScheduleSpec":
        return ScheduleSpec(ScheduleMode(mode), self.A_max, self.B_max, self.C_max, self.T, self.shape)


@dataclass(frozen=True)
class AnnealingTerms:
    """Schedule-ready split of a model into driver, problem and constraint parts.

    ``problem`` and ``constraint`` are lists of ``(spin ids, weight)`` Ising
    terms of any order; the constraint-satisfying subspace is where the
    constraint part sits at its minimum.
    """

    n_spins: int
    driver: tuple[tuple[int, float], ...]
    problem: tuple[tuple[tuple[int, ...], float], ...]
    constraint: tuple[tuple[tuple[int, ...], float], ...]

    @classmethod
    def from_model(cls, model: "TwoBodyModel | AnnealingTerms") -> "AnnealingTerms":
        if isinstance(model, AnnealingTerms):
            return model
        return cls(
            model.n_spins,
            tuple(model.x_terms),
            tuple(((a,), w) for a, w in model.problem_terms),
            tuple(((a, b), w) for a, b, w in model.pair_terms) + tuple(((a,), w) for a, w in model.z_terms),
        )


def plaquette_terms(n_spins: int, constraints: Iterable[ParityConstraint],
                    fields: Sequence[tuple[int, float]] = (), driver_weight: float = 1.0) -> AnnealingTerms:
    """Many-body form: driver on every spin, local fields and bare plaquette products."""
    return AnnealingTerms(
        n_spins,
        tuple((k, driver_weight) for k in range(n_spins)),
        tuple(((a,), w) for a, w in fields),
        tuple((c.member_ids, c.coefficient) for c in constraints),
    )


def _check_size(n: int):
    if n > MAX_DENSE_SPINS:
        raise CapExceededError(f"{n} spins exceeds the exact-diagonalization cap of {MAX_DENSE_SPINS}")


def _diagonal(n: int, terms) -> np.ndarray:
    x = np.arange(1 << n, dtype=np.int64)
    bits = [((x >> k) & 1).astype(np.int8) for k in range(n)]
    d = np.zeros(1 << n)
    for ids, w in terms:
        parity = np.zeros(1 << n, dtype=np.int8)
        for i in ids:
            parity ^= bits[i]
        d += w * (1.0 - 2.0 * parity)
    return d


class _Parts:
    """Cached diagonals and driver matrix of one model."""

    def __init__(self, model):
        terms = AnnealingTerms.from_model(model)
        _check_size(terms.n_spins)
        self.terms = terms
        n = terms.n_spins
        self.n = n
        self.problem = _diagonal(n, terms.problem)
        self.constraint = _diagonal(n, terms.constraint)
        dim = 1 << n
        rows, cols, vals = [], [], []
        x = np.arange(dim, dtype=np.int64)
        for k, w in terms.driver:
            rows.append(x)
            cols.append(x ^ (1 << k))
            vals.append(np.full(dim, float(w)))
        if rows:
            self.driver = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                        shape=(dim, dim))
        else:
            self.driver = sp.csr_matrix((dim, dim))

    def hamiltonian(self, schedule: ScheduleSpec, t: float, sparse: bool = False):
        return self.at(schedule.coefficients(t), sparse)

    def at(self, coeffs: tuple[float, float, float], sparse: bool = False):
        A, B, C = coeffs
        H = A * self.driver + sp.diags(B * self.problem + C * self.constraint)
        return H.tocsr() if sparse else H.toarray()


def build_hamiltonian(model, schedule: ScheduleSpec, t: float, sparse: bool = False):
    """Dense (or CSR) matrix of ``H(t)`` for up to 16 spins.

    >>> m = TwoBodyModel.build(1, x_terms=[(0, 1.0)])
    >>> build_hamiltonian(m, ScheduleSpec(A_max=1, B_max=0, C_max=0), 0.0)
    array([[0., 1.],
           [1., 0.]])
    """
    return _Parts(model).hamiltonian(schedule, t, sparse)


def _lowest(parts: _Parts, schedule: ScheduleSpec, t: float, m: int) -> np.ndarray:
    dim = 1 << parts.n
    m = min(m, dim)
    if parts.n <= _SPARSE_ABOVE or m >= dim - 1:
        return np.linalg.eigvalsh(parts.hamiltonian(schedule, t))[:m]
    # extra levels and a wide Krylov space keep ARPACK stable on degenerate clusters
    k = min(dim - 2, max(2 * m, m + 8))
    H = parts.hamiltonian(schedule, t, sparse=True)
    try:
        vals = spla.eigsh(H, k=k, which="SA", ncv=min(dim, max(4 * k, 64)), return_eigenvectors=False)
    except spla.ArpackNoConvergence:
        if parts.n > _DENSE_FALLBACK:
            raise
        vals = np.linalg.eigvalsh(H.toarray())
    return np.sort(vals)[:m]


@dataclass(frozen=True)
class SpectrumTrace:
    """Lowest ``m`` levels at each sample time.

    ``labels`` classifies each final-time level as ``"constraint_satisfying"``
    or ``"constraint_violating"`` (the constraint part of the energy sits at
    its minimum or not).
    """

    times: np.ndarray
    levels: np.ndarray
    labels: tuple[str, ...] = ()

    def final_degeneracy(self, rtol: float = DEGENERACY_RTOL) -> int:
        last = self.levels[-1]
        return int(np.sum(last - last[0] <= rtol * max(1.0, abs(last[0]))))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"level_{k}" for k in range(self.levels.shape[1])])
        for t, row in zip(self.times, self.levels):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])
        return buf.getvalue()


def _final_labels(parts: _Parts, schedule: ScheduleSpec, m: int) -> tuple[str, ...]:
    A, B, C = schedule.at_fraction(1.0)
    if A != 0.0:
        return ()
    total = B * parts.problem + C * parts.constraint
    order = np.argsort(total, kind="stable")[:m]
    floor = parts.constraint.min()
    tol = 1e-9 * max(1.0, abs(floor))
    return tuple("constraint_satisfying" if parts.constraint[x] <= floor + tol else "constraint_violating"
                 for x in order)


def spectrum_trace(model, schedule: ScheduleSpec, m_levels: int = 16, n_times: int = 101) -> SpectrumTrace:
    """Sample the ``m_levels`` lowest eigenvalues of ``H(t)`` on a uniform time grid."""
    if n_times < 2:
        raise ValueError("need at least two sample times")
    parts = _Parts(model)
    times = np.linspace(0.0, schedule.T, n_times)
    levels = np.array([_lowest(parts, schedule, t, m_levels) for t in times])
    return SpectrumTrace(times, levels, _final_labels(parts, schedule, levels.shape[1]))


@dataclass(frozen=True)
class QuantumState:
    amplitudes: np.ndarray

    @property
    def n_spins(self) -> int:
        return int(np.log2(self.amplitudes.size))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class EvolveResult:
    state: QuantumState
    success_probability: float
    times: np.ndarray
    norms: np.ndarray
    trace: np.ndarray  # overlap with the final ground space after each step
    ground_degeneracy: int


def ground_space(H: np.ndarray, rtol: float = DEGENERACY_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the lowest eigenspace of a symmetric matrix."""
    w, v = np.linalg.eigh(H)
    tol = rtol * max(1.0, abs(w[0]), abs(w[-1] - w[0]))
    return v[:, w - w[0] <= tol]


def _initial_state(H0: np.ndarray) -> np.ndarray:
    gs = ground_space(H0)
    if gs.shape[1] == 1:
        return gs[:, 0].astype(complex)
    warnings.warn(f"initial Hamiltonian has a {gs.shape[1]}-fold ground space; "
                  "starting from the projected uniform state", stacklevel=3)
    ref = np.ones(H0.shape[0])
    psi = gs @ (gs.T @ ref)
    if np.linalg.norm(psi) < 1e-12:
        psi = gs[:, 0]
    return (psi / np.linalg.norm(psi)).astype(complex)


def evolve(model, schedule: ScheduleSpec, n_steps: int, psi0: np.ndarray | None = None) -> EvolveResult:
    """Piecewise-constant propagation from the ground state of ``H(0)`` to ``t = T``.

    Step ``k`` applies ``exp(-i H(t_k) dt)`` with ``t_k`` the midpoint of the
    step, computed from the eigendecomposition of ``H(t_k)`` (above 10 spins
    a sparse Krylov action of the same exponential is used). Success is the
    weight of the final state in the full (possibly degenerate) ground space
    of ``H(T)``.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    parts = _Parts(model)
    target = ground_space(parts.at(schedule.at_fraction(1.0)))
    psi = _initial_state(parts.at(schedule.at_fraction(0.0))) if psi0 is None else np.asarray(psi0, complex)
    dt = schedule.T / n_steps
    times = np.empty(n_steps)
    norms = np.empty(n_steps)
    trace = np.empty(n_steps)
    for k in range(n_steps):
        t_mid = (k + 0.5) * dt
        if dt > 0 and parts.n > _SPARSE_ABOVE:
            psi = spla.expm_multiply(-1j * dt * parts.hamiltonian(schedule, t_mid, sparse=True), psi)
        elif dt > 0:
            w, v = np.linalg.eigh(parts.hamiltonian(schedule, t_mid))
            psi = v @ (np.exp(-1j * w * dt) * (v.T @ psi))
        times[k] = (k + 1) * dt
        norms[k] = np.linalg.norm(psi)
        trace[k] = float(np.sum(np.abs(target.T @ psi) ** 2))
    return EvolveResult(QuantumState(psi), float(trace[-1]), times, norms, trace, target.shape[1])


def compare_protocols(model, schedule: ScheduleSpec, m_levels: int = 16,
                      n_times: int = 101) -> dict[str, SpectrumTrace]:
    """Spectral traces of the same model under ramp and always-on schedules."""
    return {
        "ramp": spectrum_trace(model, schedule.with_mode(ScheduleMode.RAMP), m_levels, n_times),
        "always_on": spectrum_trace(model, schedule.with_mode(ScheduleMode.ALWAYS_ON), m_levels, n_times),
    }


def traces_to_csv(traces: dict[str, SpectrumTrace]) -> str:
    """Side-by-side CSV of several traces sampled on the same time grid."""
    names = list(traces)
    first = traces[names[0]]
    for name in names[1:]:
        if not np.array_equal(traces[name].times, first.times):
            raise ValueError("traces must share the same time grid")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["t"]
    for name in names:
        header += [f"{name}_level_{k}" for k in range(traces[name].levels.shape[1])]
    w.writerow(header)
    for r, t in enumerate(first.times):
        row = [repr(float(t))]
        for name in names:
            row += [repr(float(v)) for v in traces[name].levels[r]]
        w.writerow(row)
    return buf.getvalue()
