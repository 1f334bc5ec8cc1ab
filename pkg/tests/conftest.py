import itertools
from collections import Counter

import numpy as np
import pytest

from haar_modular import LocalRing, TruncatedPoly, ZmRing, gf


# ---------------------------------------------------------------------------
# independent arithmetic oracles: plain Python, no package code

class ZmOracle:
    def __init__(self, m):
        self.order = m
        self.m = m

    def add(self, a, b):
        return (a + b) % self.m

    def mul(self, a, b):
        return (a * b) % self.m

    def neg(self, a):
        return (-a) % self.m

    def is_unit(self, a):
        return any(a * b % self.m == 1 for b in range(self.m))


class TableOracle:
    """Ring given by explicit addition and multiplication tables."""

    def __init__(self, add, mul):
        self.order = len(add)
        self._add, self._mul = add, mul

    def add(self, a, b):
        return self._add[a][b]

    def mul(self, a, b):
        return self._mul[a][b]

    def neg(self, a):
        return next(b for b in range(self.order) if self._add[a][b] == 0)

    def is_unit(self, a):
        return 1 in self._mul[a]


# GF(4) = {0, 1, x, x+1} encoded 0, 1, 2, 3 with x^2 = x + 1
GF4_ORACLE = TableOracle(
    [[a ^ b for b in range(4)] for a in range(4)],
    [
        [0, 0, 0, 0],
        [0, 1, 2, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
    ],
)


def _f2t2_mul(a, b):
    a0, a1, b0, b1 = a & 1, a >> 1, b & 1, b >> 1
    return (a0 * b0) % 2 + 2 * ((a0 * b1 + a1 * b0) % 2)


# F_2[t]/(t^2) = {0, 1, t, 1+t} encoded 0, 1, 2, 3
F2T2_ORACLE = TableOracle(
    [[a ^ b for b in range(4)] for a in range(4)],
    [[_f2t2_mul(a, b) for b in range(4)] for a in range(4)],
)


def cofactor_det(ring, m):
    """Laplace expansion along the first row."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = ring.mul(m[0][j], cofactor_det(ring, minor))
        total = ring.add(total, term if j % 2 == 0 else ring.neg(term))
    return total


def brute_gl(ring, n):
    """All invertible n x n matrices as row-major tuples, via cofactor determinants."""
    out = []
    for entries in itertools.product(range(ring.order), repeat=n * n):
        m = [list(entries[i * n:(i + 1) * n]) for i in range(n)]
        if ring.is_unit(cofactor_det(ring, m)):
            out.append(entries)
    return out


def brute_corner_counts(ring, n, s):
    c = Counter()
    for entries in brute_gl(ring, n):
        c[tuple(entries[i * n + j] for i in range(s) for j in range(s))] += 1
    return c


def all_matrices(order, n):
    return np.array(list(itertools.product(range(order), repeat=n * n)), dtype=np.int64).reshape(-1, n, n)


@pytest.fixture(scope="session")
def f2t2():
    return LocalRing(TruncatedPoly(gf(2), 2))


@pytest.fixture(scope="session")
def test_rings(f2t2):
    return [ZmRing(2), ZmRing(4), ZmRing(6), ZmRing(12), gf(2, 2), f2t2]


# ---------------------------------------------------------------------------
# acceptance report: one line per criterion in the terminal summary

ACCEPTANCE_RESULTS = []


@pytest.fixture
def acceptance():
    def record(criterion, ok, detail):
        ACCEPTANCE_RESULTS.append((criterion, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
