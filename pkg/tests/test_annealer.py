import warnings

import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_levels, model_terms
from parity_annealer.annealer import (
    MAX_DENSE_SPINS,
    AnnealingTerms,
    ScheduleSpec,
    build_hamiltonian,
    compare_protocols,
    evolve,
    ground_space,
    plaquette_terms,
    spectrum_trace,
    traces_to_csv,
)
from parity_annealer.model import ParityConstraint, SpinGlassProblem, TwoBodyModel
from parity_annealer.oracle import CapExceededError
from parity_annealer.parity_compiler import compile_full, single_plaquette_program

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.diag([1.0, -1.0])


def op(n, which):
    """Kronecker oracle; spin k is the k-th least significant factor."""
    out = np.eye(1)
    for k in reversed(range(n)):
        out = np.kron(out, which.get(k, I2))
    return out


def kron_hamiltonian(model, A, B, C):
    n = model.n_spins
    H = sum(A * w * op(n, {k: X}) for k, w in model.x_terms)
    H = H + sum(B * w * op(n, {k: Z}) for k, w in model.problem_terms)
    H = H + sum(C * w * op(n, {a: Z, b: Z}) for a, b, w in model.pair_terms)
    H = H + sum(C * w * op(n, {k: Z}) for k, w in model.z_terms)
    return H


def random_model(n, seed):
    r = np.random.default_rng(seed)
    pairs = [(a, b, float(r.uniform(0.1, 1))) for a in range(n) for b in range(a + 1, n)]
    return TwoBodyModel.build(n, pairs, [(k, float(r.normal())) for k in range(n)],
                              x_terms=[(k, float(r.uniform(0.5, 1.5))) for k in range(n)],
                              problem_terms=[(k, float(r.normal())) for k in range(n)])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1), st.floats(0, 1), st.sampled_from(["ramp", "always_on"]))
def test_hamiltonian_matches_kronecker_oracle(n, seed, s, mode):
    model = random_model(n, seed)
    sched = ScheduleSpec(mode, 1.3, 0.7, 2.0, T=4.0)
    H = build_hamiltonian(model, sched, s * 4.0)
    np.testing.assert_allclose(H, kron_hamiltonian(model, *sched.coefficients(s * 4.0)), atol=1e-12)
    np.testing.assert_array_equal(H, H.T)
    np.testing.assert_allclose(build_hamiltonian(model, sched, s * 4.0, sparse=True).toarray(), H)


def test_schedule_endpoints():
    ramp = ScheduleSpec("ramp", 2.0, 3.0, 5.0, T=10.0)
    assert ramp.coefficients(0.0) == (2.0, 0.0, 0.0)
    assert ramp.coefficients(10.0) == (0.0, 3.0, 5.0)
    assert ramp.coefficients(5.0) == (1.0, 1.5, 2.5)
    on = ramp.with_mode("always_on")
    assert on.C(0.0) == on.C(10.0) == 5.0
    assert ramp.A(20.0) == 0.0


def test_zero_length_sweep():
    s = ScheduleSpec(T=0.0)
    assert s.fraction(0.0) == 0.0 and s.fraction(1.0) == 1.0


@pytest.mark.parametrize("kwargs", [dict(T=-1.0), dict(shape="cubic"), dict(mode="sudden")])
def test_schedule_validation(kwargs):
    with pytest.raises(ValueError):
        ScheduleSpec(**kwargs)


def test_cap():
    with pytest.raises(CapExceededError):
        build_hamiltonian(TwoBodyModel.build(MAX_DENSE_SPINS + 1), ScheduleSpec(), 0.0)


def test_plaquette_terms_match_gadget_free_form():
    c = ParityConstraint((0, 1, 2, 3), 1.0)
    terms = plaquette_terms(4, [c], fields=[(0, 0.1)])
    H = build_hamiltonian(terms, ScheduleSpec(B_max=1.0, C_max=1.0, T=1.0), 1.0)
    ref = -op(4, {0: Z, 1: Z, 2: Z, 3: Z}) + 0.1 * op(4, {0: Z})
    np.testing.assert_allclose(H, ref)
    assert AnnealingTerms.from_model(terms) is terms


def test_spectrum_endpoints():
    model = random_model(4, 11)
    sched = ScheduleSpec(T=3.0)
    trace = spectrum_trace(model, sched, m_levels=16, n_times=5)
    # t = 0: driver only, levels are sums of +-w
    w = np.array([v for _, v in model.x_terms])
    signs = np.array(np.meshgrid(*[[1, -1]] * 4)).reshape(4, -1).T
    np.testing.assert_allclose(trace.levels[0], np.sort(signs @ w), atol=1e-10)
    # t = T: classical energies from independent enumeration
    levels = brute_levels(4, model_terms(model))
    classical = np.sort([e for e, s in levels.items() for _ in s])
    np.testing.assert_allclose(trace.levels[-1], classical, atol=1e-8)


def test_sparse_spectrum_agrees_with_dense():
    prog = compile_full(SpinGlassProblem.random(4, np.random.default_rng(5)))
    sched = ScheduleSpec(T=1.0)
    trace = spectrum_trace(prog.model, sched, m_levels=6, n_times=3)
    dense = np.linalg.eigvalsh(build_hamiltonian(prog.model, sched, 0.5))[:6]
    np.testing.assert_allclose(trace.levels[1], dense, atol=1e-7)


def test_single_plaquette_final_degeneracy():
    trace = spectrum_trace(single_plaquette_program(), ScheduleSpec(T=1.0), 16, 3)
    assert trace.final_degeneracy() == 8
    assert trace.labels[:8] == ("constraint_satisfying",) * 8
    assert trace.labels[8] == "constraint_violating"


def test_evolve_matches_stepwise_expm():
    model = random_model(3, 2)
    sched = ScheduleSpec(T=2.0)
    res = evolve(model, sched, n_steps=8)
    H0 = kron_hamiltonian(model, *sched.coefficients(0.0))
    w, v = np.linalg.eigh(H0)
    psi = v[:, 0].astype(complex)
    for k in range(8):
        psi = la.expm(-1j * 0.25 * kron_hamiltonian(model, *sched.coefficients((k + 0.5) * 0.25))) @ psi
    assert abs(abs(np.vdot(psi, res.state.amplitudes)) - 1) < 1e-10
    np.testing.assert_allclose(res.norms, 1.0, atol=1e-12)
    gs = ground_space(kron_hamiltonian(model, *sched.coefficients(2.0)))
    assert res.success_probability == pytest.approx(float(np.sum(np.abs(gs.T @ psi) ** 2)))


def test_sparse_evolution_agrees_with_dense():
    prog = compile_full(SpinGlassProblem.random(4, np.random.default_rng(5)))
    sched = ScheduleSpec(T=0.5)
    res = evolve(prog.model, sched, n_steps=2)
    psi = res.state.amplitudes
    # dense reference
    H0 = build_hamiltonian(prog.model, sched, 0.0)
    ref = np.linalg.eigh(H0)[1][:, 0].astype(complex)
    for t in (0.125, 0.375):
        w, v = np.linalg.eigh(build_hamiltonian(prog.model, sched, t))
        ref = v @ (np.exp(-1j * w * 0.25) * (v.T @ ref))
    assert abs(abs(np.vdot(ref, psi)) - 1) < 1e-8


def test_slow_sweep_reaches_ground_state():
    model = TwoBodyModel.build(2, [(0, 1, 1.0)], [(0, 0.3)], x_terms=[(0, 1.0), (1, 1.0)])
    assert evolve(model, ScheduleSpec(T=60.0), 600).success_probability > 0.99


def test_degenerate_initial_state_warns():
    model = TwoBodyModel.build(2, [(0, 1, 1.0)], x_terms=[(0, 1.0)])
    with pytest.warns(UserWarning, match="ground space"):
        evolve(model, ScheduleSpec(T=1.0), 2)


def test_evolve_rejects_zero_steps():
    with pytest.raises(ValueError):
        evolve(random_model(2, 0), ScheduleSpec(), 0)


def test_compare_protocols_and_csv():
    model = single_plaquette_program([0.1, -0.1, 0.05, 0.0])
    traces = compare_protocols(model, ScheduleSpec(T=2.0), m_levels=4, n_times=3)
    assert set(traces) == {"ramp", "always_on"}
    # identical at the end, different at the start
    np.testing.assert_allclose(traces["ramp"].levels[-1], traces["always_on"].levels[-1])
    assert not np.allclose(traces["ramp"].levels[0], traces["always_on"].levels[0])
    text = traces_to_csv(traces)
    header = text.splitlines()[0].split(",")
    assert header[0] == "t" and len(header) == 9 and len(text.splitlines()) == 4
    assert traces["ramp"].to_csv().splitlines()[0] == "t,level_0,level_1,level_2,level_3"
