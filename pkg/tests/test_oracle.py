import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_levels, model_terms
from parity_annealer.model import Parity, ParityConstraint, TwoBodyModel
from parity_annealer.oracle import (
    MAX_SPINS,
    CapExceededError,
    energies,
    enumerate_spectrum,
    gf2_rank,
    ground_manifold,
    verify_equivalence,
)


def test_two_body_example():
    # -s0 s1 has the aligned pair as ground manifold
    c = ParityConstraint((0, 1), 1.0)
    rep = ground_manifold(c, shared_spins=[0, 1])
    assert rep.min_energy == -1.0 and rep.gap == 2.0
    assert {tuple(a.values()) for a in rep.ground_assignments()} == {(1, 1), (-1, -1)}


def test_energies_state_order():
    m = TwoBodyModel.build(2, [], [(0, 1.0), (1, 10.0)])
    ids, e = energies(m)
    # bit k set means spin k down
    assert ids == (0, 1)
    np.testing.assert_allclose(e, [11.0, 9.0, -9.0, -11.0])


def test_flat_spectrum_has_infinite_gap():
    m = TwoBodyModel.build(2, [], [])
    rep = ground_manifold(m)
    assert rep.gap == np.inf and len(rep.ground_states) == 4
    assert rep.to_dict()["gap"] is None


def test_cap_is_enforced():
    c = ParityConstraint(tuple(range(MAX_SPINS + 1)))
    with pytest.raises(CapExceededError):
        enumerate_spectrum(c)


def test_shared_spins_must_exist():
    with pytest.raises(ValueError):
        ground_manifold(ParityConstraint((0, 1)), shared_spins=[5])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_spectrum_matches_independent_enumeration(n, seed):
    r = np.random.default_rng(seed)
    pairs = [(a, b, float(r.integers(1, 4))) for a in range(n) for b in range(a + 1, n) if r.random() < 0.6]
    fields = [(a, float(r.integers(-3, 4))) for a in range(n)]
    m = TwoBodyModel.build(n, pairs, fields)
    ref = brute_levels(n, model_terms(m))
    got = enumerate_spectrum(m)
    assert [(round(e, 9), k) for e, k in got] == [(e, len(s)) for e, s in ref.items()]
    rep = ground_manifold(m)
    assert rep.min_energy == pytest.approx(next(iter(ref)))
    assert len(rep.ground_states) == len(next(iter(ref.values())))


def test_chunked_enumeration_matches_direct():
    # 20 spins spans several chunks
    c = ParityConstraint(tuple(range(20)), 0.7, Parity.ODD)
    spec = enumerate_spectrum(c)
    assert spec == [(-0.7, 2**19), (0.7, 2**19)]


def test_verify_equivalence_detects_difference():
    even = ParityConstraint((0, 1, 2))
    odd = ParityConstraint((0, 1, 2), parity=Parity.ODD)
    assert verify_equivalence(even, even, [0, 1, 2]).ok
    res = verify_equivalence(even, odd, [0, 1, 2])
    assert not res.ok and res.gap_original == res.gap_decomposed == 2.0


def test_report_json_is_stable():
    rep = ground_manifold(ParityConstraint((0, 1, 2)), [0, 2])
    assert rep.to_json() == rep.to_json()
    assert sorted(rep.marginal_ground) == [0, 1, 2, 3]


@pytest.mark.parametrize("checks, n, rank", [
    ([], 3, 0),
    ([{0, 1}, {1, 2}, {0, 2}], 3, 2),
    ([{0}, {1}, {2}], 3, 3),
    ([{0, 1, 2, 3}, {0, 1, 2, 3}], 4, 1),
])
def test_gf2_rank_hand_cases(checks, n, rank):
    assert gf2_rank(checks, n) == rank


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_gf2_rank_against_row_reduction(rows, cols, seed):
    r = np.random.default_rng(seed)
    M = r.integers(0, 2, (rows, cols))
    # independent oracle: count nonzero rows after mod-2 Gaussian elimination on an array
    A = M.copy()
    rank = 0
    for c in range(cols):
        piv = [k for k in range(rank, rows) if A[k, c]]
        if not piv:
            continue
        A[[rank, piv[0]]] = A[[piv[0], rank]]
        for k in range(rows):
            if k != rank and A[k, c]:
                A[k] ^= A[rank]
        rank += 1
    assert gf2_rank([set(np.flatnonzero(row)) for row in M], cols) == rank


def test_gf2_rank_rejects_bad_index():
    with pytest.raises(ValueError):
        gf2_rank([{3}], 3)
