import itertools

import numpy as np
import pytest

from dmmsat.instance import CnfFormula

# Seven-clause example over x1..x3 used throughout the tests.
EXAMPLE_CLAUSES = [
    [1, 2],
    [1, -2, 3],
    [1, -2, -3],
    [-1, -2, 3],
    [-1, -3],
    [-2, 3],
    [-1, 2, 3],
]


@pytest.fixture
def example_formula():
    return CnfFormula(3, EXAMPLE_CLAUSES)


def naive_unsat(int_clauses, bits):
    """Per-clause evaluation in plain Python, independent of the library."""
    count = 0
    for clause in int_clauses:
        if not any((bits[abs(l) - 1] if l > 0 else not bits[abs(l) - 1]) for l in clause):
            count += 1
    return count


def naive_min_unsat(n, int_clauses):
    return min(naive_unsat(int_clauses, bits) for bits in itertools.product([False, True], repeat=n))


def random_formula(rng, n, m, max_width=3):
    clauses = []
    for _ in range(m):
        w = int(rng.integers(1, min(max_width, n) + 1))
        vs = rng.choice(n, size=w, replace=False) + 1
        signs = rng.choice([-1, 1], size=w)
        clauses.append([int(v * s) for v, s in zip(vs, signs)])
    return CnfFormula(n, clauses)


# criterion id -> (passed, detail), filled by the acceptance suite
ACCEPTANCE = {}


def report(criterion, passed, detail=""):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    line = f"{criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")
