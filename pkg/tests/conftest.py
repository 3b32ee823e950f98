import itertools
import math

import numpy as np
import pytest


def brute_levels(n, terms, decimals=9):
    """Independent enumeration: ``terms`` is ``[(ids, w), ...]`` over spins ``0..n-1``.

    Returns ``{energy: [states]}`` with states as tuples of +-1.
    """
    out = {}
    for s in itertools.product((1, -1), repeat=n):
        e = sum(w * math.prod(s[i] for i in ids) for ids, w in terms)
        out.setdefault(round(float(e), decimals), []).append(s)
    return dict(sorted(out.items()))


def model_terms(model, include_problem=True):
    terms = [((a, b), w) for a, b, w in model.pair_terms]
    terms += [((a,), w) for a, w in model.z_terms]
    if include_problem:
        terms += [((a,), w) for a, w in model.problem_terms]
    return terms


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
