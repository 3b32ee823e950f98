"""Transmon and Josephson-ring-modulator (JRM) parameters for the pair model.

Energies are in GHz with hbar = 1, so drive frequencies and energies share
units. Flux variables are in units of the reduced flux quantum (phi0 = 1).
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

__all__ = [
    "ProjectionWarning",
    "TransmonSpec",
    "JRMSpec",
    "EffectiveQubitParams",
    "charge_qubit_fields",
    "transmon_frequency",
    "anharmonicity",
    "zero_point_phase",
    "rotating_frame_fields",
    "coupling_strength",
    "jrm_coupled_params",
    "effective_two_qubit",
    "drive_for_target",
    "FockVerification",
    "fock_verify",
    "JRMStatics",
    "jrm_statics",
    "FluxStates",
    "jrm_flux_states",
    "AsymmetricJRMReport",
    "asymmetric_jrm_report",
    "hardware_table",
]


class ProjectionWarning(UserWarning):
    """Drive strength too large for the two-level projection."""


@dataclass(frozen=True)
class TransmonSpec:
    E_C: float
    E_J: float
    n_g: float = 0.0
    drive_freq: float = 0.0
    drive_amp: float = 0.0

    def __post_init__(self):
        if self.E_C > 0 and self.E_J / self.E_C < 10:
            warnings.warn(f"E_J/E_C = {self.E_J / self.E_C:.3g} is below the transmon regime",
                          stacklevel=3)

    @property
    def frequency(self) -> float:
        return transmon_frequency(self.E_C, self.E_J)


@dataclass(frozen=True)
class JRMSpec:
    """Four ring junctions; ``deviations`` are measured from their mean."""

    junctions: tuple[float, float, float, float]
    phi_ext: float = 0.0

    def __post_init__(self):
        if len(self.junctions) != 4:
            raise ValueError("a JRM has exactly four junctions")
        object.__setattr__(self, "junctions", tuple(float(e) for e in self.junctions))

    @classmethod
    def symmetric(cls, E_JRM: float, phi_ext: float = 0.0) -> "JRMSpec":
        return cls((E_JRM,) * 4, phi_ext)

    @property
    def E_JRM(self) -> float:
        return float(np.mean(self.junctions))

    @property
    def deviations(self) -> np.ndarray:
        return np.asarray(self.junctions) - self.E_JRM

    @property
    def is_symmetric(self) -> bool:
        return bool(np.all(self.deviations == 0))


@dataclass(frozen=True)
class EffectiveQubitParams:
    """Coefficients of ``A_a X_a + A_b X_b + J_a Z_a + J_b Z_b - g Z_a Z_b`` (GHz)."""

    E_a: float
    E_b: float
    g: float
    J_a: float = 0.0
    J_b: float = 0.0
    A_a: float = 0.0
    A_b: float = 0.0
    projection_valid: bool = True


def charge_qubit_fields(E_C: float, E_J: float, n_g: float) -> tuple[float, float]:
    """Longitudinal and transverse fields of a charge qubit near its degeneracy point."""
    return 2 * E_C * (1 - 2 * n_g), E_J / 2


def transmon_frequency(E_C: float, E_J: float) -> float:
    """Plasma frequency ``sqrt(8 E_J E_C)`` of the harmonic part."""
    if E_C < 0 or E_J < 0:
        raise ValueError(f"charging and Josephson energies must be non-negative, got {E_C}, {E_J}")
    return math.sqrt(8 * E_J * E_C)


def anharmonicity(E_C: float) -> float:
    return -E_C


def zero_point_phase(E_C: float, E_J: float) -> float:
    """Phase zero-point amplitude ``(2 E_C / E_J) ** (1/4)`` multiplying ``(a + a^dag)``."""
    return (2 * E_C / E_J) ** 0.25


def rotating_frame_fields(spec: TransmonSpec) -> tuple[float, float, bool]:
    """``(J, A, valid)``: detuning field, drive field and whether ``A < E_C`` holds."""
    J = (transmon_frequency(spec.E_C, spec.E_J) - spec.drive_freq) / 2
    valid = spec.drive_amp < spec.E_C
    if not valid:
        warnings.warn(f"qubit projection invalid: drive amplitude {spec.drive_amp} >= E_C {spec.E_C}",
                      ProjectionWarning, stacklevel=2)
    return J, spec.drive_amp, valid


def coupling_strength(E_C: float, E_Ja: float, E_Jb: float, E_JRM: float) -> float:
    """``g = (E_C / 2) E_JRM / sqrt((E_Ja + E_JRM)(E_Jb + E_JRM))``."""
    return E_C / 2 * E_JRM / math.sqrt((E_Ja + E_JRM) * (E_Jb + E_JRM))


def _symmetric_jrm_energy(jrm: JRMSpec | float) -> float:
    if isinstance(jrm, JRMSpec):
        if not jrm.is_symmetric or jrm.phi_ext != 0:
            raise ValueError("closed-form coupling needs a symmetric JRM at zero flux; "
                             "use asymmetric_jrm_report for this junction set")
        return jrm.E_JRM
    return float(jrm)


def jrm_coupled_params(E_C: float, E_Ja: float, E_Jb: float, jrm: JRMSpec | float) -> EffectiveQubitParams:
    """Dressed transmon energies and ZZ coupling through a symmetric, unbiased JRM."""
    E = _symmetric_jrm_energy(jrm)
    return EffectiveQubitParams(
        E_a=transmon_frequency(E_C, E_Ja + E),
        E_b=transmon_frequency(E_C, E_Jb + E),
        g=coupling_strength(E_C, E_Ja, E_Jb, E),
    )


def effective_two_qubit(E_C: float, E_Ja: float, E_Jb: float, jrm: JRMSpec | float,
                        drive_a: tuple[float, float], drive_b: tuple[float, float]) -> EffectiveQubitParams:
    """Full rotating-frame two-qubit parameters; drives are ``(frequency, amplitude)``.

    ``J_x = E_x - 2 g - omega_x``.
    """
    p = jrm_coupled_params(E_C, E_Ja, E_Jb, jrm)
    (w_a, A_a), (w_b, A_b) = drive_a, drive_b
    valid = A_a < E_C and A_b < E_C
    if not valid:
        warnings.warn(f"qubit projection invalid: drive amplitudes ({A_a}, {A_b}) vs E_C {E_C}",
                      ProjectionWarning, stacklevel=2)
    return EffectiveQubitParams(p.E_a, p.E_b, p.g, p.E_a - 2 * p.g - w_a, p.E_b - 2 * p.g - w_b,
                                A_a, A_b, valid)


def drive_for_target(E_x: float, g_total: float, J_target: float) -> float:
    """Drive frequency giving longitudinal field ``J_target``; inverse of ``J = E - 2g - omega``."""
    return E_x - 2 * g_total - J_target


@dataclass(frozen=True)
class FockVerification:
    g_numeric: float
    g_formula: float
    rel_error: float
    converged: bool
    min_overlap: float
    warnings: tuple[str, ...] = ()


def _ladder(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n)), 1)


def _two_mode_quartic(E_C, E_Ja, E_Jb, E_JRM, n):
    a = _ladder(n)
    ad = a.T
    eye = np.eye(n)
    x2 = (a + ad) @ (a + ad)
    g = coupling_strength(E_C, E_Ja, E_Jb, E_JRM)
    kerr = ad @ ad @ a @ a
    Ha = transmon_frequency(E_C, E_Ja + E_JRM) * (ad @ a) - E_C / 2 * kerr
    Hb = transmon_frequency(E_C, E_Jb + E_JRM) * (ad @ a) - E_C / 2 * kerr
    return np.kron(Ha, eye) + np.kron(eye, Hb) - g * np.kron(x2, x2)


def _matrix_function(M: np.ndarray, f) -> np.ndarray:
    w, v = np.linalg.eigh(M)
    return (v * f(w)) @ v.T


def _two_mode_cosine(E_C, E_Ja, E_Jb, E_JRM, n):
    a = _ladder(n)
    eye = np.eye(n)
    single, half = [], []
    for E_J in (E_Ja, E_Jb):
        E_eff = E_J + E_JRM
        phi = zero_point_phase(E_C, E_eff) * (a + a.T)
        # N = (i/2) (E_eff / 2E_C)^(1/4) (a - a^dag); N^2 is real
        p = (E_eff / (2 * E_C)) ** 0.25 * (a - a.T) / 2
        single.append(-4 * E_C * (p @ p) - E_J * _matrix_function(phi, np.cos))
        half.append(_matrix_function(phi, lambda x: np.cos(x / 2)))
    return (np.kron(single[0], eye) + np.kron(eye, single[1])
            - 4 * E_JRM * np.kron(half[0], half[1]))


def _dressed_zz(H: np.ndarray, n: int) -> tuple[float, float]:
    """ZZ combination of the dressed |00>,|01>,|10>,|11> energies and the worst overlap.

    The coupling conserves the parity of both modes, so each label is looked
    up inside its own parity block.
    """
    parity = np.array([(i % 2, j % 2) for i in range(n) for j in range(n)])
    energies, overlaps = {}, []
    for pa, pb in ((0, 0), (0, 1), (1, 0), (1, 1)):
        idx = np.flatnonzero((parity[:, 0] == pa) & (parity[:, 1] == pb))
        w, v = np.linalg.eigh(H[np.ix_(idx, idx)])
        bare = int(np.flatnonzero(idx == pa * n + pb)[0])
        k = int(np.argmax(np.abs(v[bare])))
        energies[(pa, pb)] = w[k]
        overlaps.append(float(abs(v[bare, k]) ** 2))
    zz = energies[0, 0] - energies[0, 1] - energies[1, 0] + energies[1, 1]
    return -zz / 4, min(overlaps)


def _g_numeric(E_C, E_Ja, E_Jb, E_JRM, n, model):
    build = _two_mode_quartic if model == "quartic" else _two_mode_cosine
    return _dressed_zz(build(E_C, E_Ja, E_Jb, E_JRM, n), n)


def fock_verify(E_C: float, E_Ja: float, E_Jb: float, E_JRM: float, n_max: int = 10,
                model: str = "quartic") -> FockVerification:
    """Extract the ZZ coupling by exact diagonalization of two truncated modes.

    ``model="quartic"`` builds the two-mode Kerr Hamiltonian with the full
    ``-g (a + a^dag)^2 (b + b^dag)^2`` coupling, counter-rotating parts
    included. ``model="cosine"`` keeps the untruncated cosine potentials of
    the transmon junctions and the JRM instead (use a larger ``n_max``).
    The result is flagged unconverged when ``n_max + 2`` levels move
    ``g_numeric`` by more than 1%.
    """
    if n_max < 6:
        raise ValueError("need at least 6 Fock levels per mode")
    if model not in ("quartic", "cosine"):
        raise ValueError(f"unknown model {model!r}")
    g_formula = coupling_strength(E_C, E_Ja, E_Jb, E_JRM)
    g_num, overlap = _g_numeric(E_C, E_Ja, E_Jb, E_JRM, n_max, model)
    g_next, _ = _g_numeric(E_C, E_Ja, E_Jb, E_JRM, n_max + 2, model)
    scale = max(abs(g_num), 1e-12)
    converged = abs(g_next - g_num) <= 0.01 * scale or abs(g_next - g_num) < 1e-12
    notes = []
    if not converged:
        notes.append(f"truncation not converged: g moved {g_num:.6g} -> {g_next:.6g}")
    if overlap < 0.5:
        notes.append(f"dressed-state identification ambiguous (overlap {overlap:.3f})")
    rel = abs(g_num - g_formula) / abs(g_formula) if g_formula != 0 else abs(g_num)
    return FockVerification(float(g_num), g_formula, float(rel), converged, overlap, tuple(notes))


@dataclass(frozen=True)
class JRMStatics:
    """Static node fluxes, junction phase drops and ring current of a symmetric JRM.

    ``drops[i]`` is the static phase across junction ``i``, oriented so the
    four drops sum to the enclosed flux.
    """

    node_fluxes: tuple[float, float, float, float]
    drops: tuple[float, float, float, float]
    current: float
    kirchhoff_residual: float


def _kirchhoff_residual(junctions: Sequence[float], drops: Sequence[float]) -> float:
    currents = [E * math.sin(d) for E, d in zip(junctions, drops)]
    return max(abs(currents[i] - currents[i - 1]) for i in range(4))


def jrm_statics(jrm: JRMSpec, phi_ring: float) -> JRMStatics:
    """Equal flux drop ``phi_ring / 4`` per junction and ring current ``E_JRM sin(phi_ring / 4)``."""
    if not jrm.is_symmetric:
        raise ValueError("jrm_statics needs identical junctions; see asymmetric_jrm_report")
    E = jrm.E_JRM
    nodes = tuple(k * phi_ring / 4 for k in range(4))
    drops = (phi_ring / 4,) * 4
    return JRMStatics(nodes, drops, E * math.sin(phi_ring / 4), _kirchhoff_residual(jrm.junctions, drops))


@dataclass(frozen=True)
class FluxStates:
    energies: tuple[float, float, float, float]
    stable: int


def _branch_drops(junctions: Sequence[float], phi_ring: float) -> np.ndarray:
    """Static drops on the branch continuously connected to equal drops of ``phi_ring / 4``."""
    E = np.asarray(junctions, dtype=float)
    guess = np.full(4, phi_ring / 4)
    if np.all(E == E[0]):
        return guess

    def residual(d):
        cur = E * np.sin(d)
        return [cur[1] - cur[0], cur[2] - cur[1], cur[3] - cur[2], d.sum() - phi_ring]

    return optimize.fsolve(residual, guess, xtol=1e-13)


def jrm_flux_states(jrm: JRMSpec, phi_ext: float | None = None) -> FluxStates:
    """Potential energy of the four trapped-flux states ``phi_ring = 2 pi n + phi_ext``."""
    phi_ext = jrm.phi_ext if phi_ext is None else phi_ext
    energies = []
    for n in range(4):
        drops = _branch_drops(jrm.junctions, 2 * math.pi * n + phi_ext)
        energies.append(float(-np.dot(jrm.junctions, np.cos(drops))))
    return FluxStates(tuple(energies), int(np.argmin(energies)))


@dataclass(frozen=True)
class AsymmetricJRMReport:
    """Small-flux expansion of an unequal JRM in its collective modes.

    ``coefficients`` holds the prefactors of the five trigonometric terms:
    ``ccc`` (the symmetric cos cos cos term), ``ssc``, ``scs``, ``css`` and
    ``sss``; the three asymmetric ones are the bracketed junction sums that
    multiply ``-sin sin cos``, ``-sin cos sin`` and ``-cos sin sin``.
    With the third mode pinned to zero only ``ccc`` and ``ssc`` survive.
    """

    drops: tuple[float, float, float, float]
    alpha: float
    renormalized: tuple[float, float, float, float]
    renormalized_deviations: tuple[float, float, float, float]
    coefficients: dict[str, float]
    surviving: dict[str, float]
    kirchhoff_residual: float
    current: float
    spread_ratio: float
    xx_strength: float
    xx_to_zz_ratio: float
    pass_10pct: bool
    notes: tuple[str, ...] = field(default=())


def asymmetric_jrm_report(jrm: JRMSpec, phi_ring: float | None = None, E_C: float = 0.3,
                          E_J: float = 15.0) -> AsymmetricJRMReport:
    """Linearized statics and coupling terms of a JRM with unequal junctions.

    ``E_C`` and ``E_J`` describe the attached transmons; they set the zero-point
    amplitudes used to estimate the residual XX coupling.
    """
    phi = jrm.phi_ext if phi_ring is None else phi_ring
    if abs(phi) >= 0.1:
        raise ValueError(f"enclosed flux {phi} outside the linearization range |phi| < 0.1")
    E = np.asarray(jrm.junctions)
    mean = float(E.mean())
    dE = E - mean
    alpha = float(np.sum(1 / E))
    drops = phi / (E * alpha)
    shrink = 1 - 0.5 * (phi / (E * alpha)) ** 2
    Ep = E * shrink
    dEp = dE * shrink
    d1, d2, d3, d4 = dEp
    coefficients = {
        "ccc": float(Ep.sum()),
        "ssc": float(-d1 + d2 - d3 + d4),
        "scs": float(d1 - d2 - d3 + d4),
        "css": float(-d1 - d2 + d3 + d4),
        "sss": float(4 * phi / alpha),
    }
    surviving = {k: coefficients[k] for k in ("ccc", "ssc")}
    # sin(phi_x/2) sin(phi_y/2) -> (x_zp a)(x_zp b) in the qubit subspace
    x_zp = zero_point_phase(E_C, E_J) / 2
    xx = abs(coefficients["ssc"]) * x_zp ** 2
    g = coupling_strength(E_C, E_J, E_J, mean)
    spread = float(np.max(np.abs(dE)) / mean)
    return AsymmetricJRMReport(
        drops=tuple(float(d) for d in drops),
        alpha=alpha,
        renormalized=tuple(float(v) for v in Ep),
        renormalized_deviations=tuple(float(v) for v in dEp),
        coefficients=coefficients,
        surviving=surviving,
        kirchhoff_residual=_kirchhoff_residual(E, drops),
        current=float(np.mean(E * np.sin(drops))),
        spread_ratio=spread,
        xx_strength=float(xx),
        xx_to_zz_ratio=float(xx / g) if g else math.inf,
        pass_10pct=spread <= 0.10,
    )


def hardware_table(program, E_C: float = 0.3, E_J: float = 15.0, energy_scale: float | None = None,
                   drive_amp: float | None = None) -> str:
    """CSV with one row per qubit and one per coupler realizing a compiled program.

    Dimensionless weights are multiplied by ``energy_scale`` (GHz); by
    default the largest coupler is put at ``E_C / 4``, half the JRM
    saturation value. Each pair
    term of weight ``w`` needs ``g = energy_scale * |w|``; the JRM energy is
    solved from the closed-form coupling. A qubit attached to several
    couplers sees ``E_J + sum E_JRM`` and a shift of ``-2 sum g``. Drive
    amplitudes default to ``energy_scale`` times the driver weight. Couplers
    realize ``-g ZZ``; rows report the magnitude.
    """
    model = program.model
    n = model.n_spins
    if energy_scale is None:
        w_max = max((abs(w) for _, _, w in model.pair_terms), default=1.0)
        energy_scale = E_C / (4 * w_max)
    couplers = []
    for a, b, w in model.pair_terms:
        g = energy_scale * abs(w)
        if g >= E_C / 2:
            raise ValueError(f"coupling {g} GHz unreachable: the JRM saturates at E_C/2 = {E_C / 2}")
        E_JRM = 2 * g * E_J / (E_C - 2 * g)
        couplers.append((a, b, E_JRM, g))
    attached = np.zeros(n)
    g_sum = np.zeros(n)
    for a, b, E_JRM, g in couplers:
        attached[[a, b]] += E_JRM
        g_sum[[a, b]] += g
    z = np.zeros(n)
    for a, w in model.z_terms + model.problem_terms:
        z[a] += w
    x = np.zeros(n)
    for a, w in model.x_terms:
        x[a] += w

    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["kind", "id", "a", "b", "E_C", "E_J", "omega_d", "A", "J_target", "E_JRM", "g"])
    for q in range(n):
        E_x = transmon_frequency(E_C, E_J + attached[q])
        J = energy_scale * z[q]
        A = energy_scale * x[q] if drive_amp is None else drive_amp
        omega = drive_for_target(E_x, g_sum[q], J)
        out.writerow(["qubit", q, "", "", E_C, E_J, repr(float(omega)), repr(float(A)), repr(float(J)), "", ""])
    for k, (a, b, E_JRM, g) in enumerate(couplers):
        out.writerow(["coupler", k, a, b, "", "", "", "", "", repr(float(E_JRM)), repr(float(g))])
    return buf.getvalue()
