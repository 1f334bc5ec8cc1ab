"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line that is printed in the terminal summary
(see ``conftest.pytest_terminal_summary``).
"""

import itertools
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats as sps

from conftest import F2T2_ORACLE, ZmOracle, brute_corner_counts, brute_gl
from haar_modular import (
    LocalRing,
    PrimePower,
    RngStream,
    TruncatedPoly,
    ZmRing,
    chi_squared_test,
    convergence_sweep,
    corner_fiber_bounds,
    corner_fiber_count_invertible,
    empirical_dist,
    exact_corner_dist,
    gf,
    order_gl_field,
    order_gl_prime_power,
    order_gl_zm,
    sample_gl_field_chain,
    sample_gl_local,
    sample_gl_prime_power,
    sample_truncated,
    tv_to_uniform,
)
from haar_modular.matrices import invertible_array
from haar_modular.sampling import sample_chain_without_span_check, sample_nonzero_det
from haar_modular.stats import EmpiricalDist, tv_estimate

ALPHA = 0.001


def all_cells(order, s):
    return [tuple(c) for c in itertools.product(range(order), repeat=s * s)]


def group_cells(ring, n):
    a = np.array(list(itertools.product(range(ring.order), repeat=n * n)), dtype=np.int64).reshape(-1, n, n)
    return a[invertible_array(ring, a)].reshape(-1, n * n)


def counts_over(arr, cells):
    index = {tuple(c): i for i, c in enumerate(np.asarray(cells).tolist())}
    out = np.zeros(len(index), dtype=np.int64)
    for row in map(tuple, np.asarray(arr).reshape(len(arr), -1).tolist()):
        out[index[row]] += 1
    return out


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_c01_exact_counting(acceptance):
    def run():
        return [
            (order_gl_field(2, 2), len(brute_gl(ZmOracle(2), 2)), 6),
            (order_gl_field(2, 3), len(brute_gl(ZmOracle(2), 3)), 168),
            (order_gl_field(3, 2), len(brute_gl(ZmOracle(3), 2)), 48),
            (order_gl_prime_power(2, 2, 2), len(brute_gl(ZmOracle(4), 2)), 96),
            (order_gl_zm(6, 2), len(brute_gl(ZmOracle(6), 2)), 288),
        ]

    rows, dt = timed(run)
    ok = all(a == b == c for a, b, c in rows) and dt < 5
    acceptance("C01 exact counting", ok, f"orders {[r[0] for r in rows]} = brute force; {dt:.2f}s (< 5s)")
    assert ok


def test_c02_fiber_formula_and_bounds(acceptance):
    def run():
        bad = []
        checked = 0
        for p in (2, 3):
            orc, ring = ZmOracle(p), ZmRing(p)
            for n in (1, 2, 3):
                fibers_by_s = {s: brute_corner_counts(orc, n, s) for s in range(1, n + 1)}
                for s, fibers in fibers_by_s.items():
                    b = corner_fiber_bounds(p, n, s)
                    for w in all_cells(p, s):
                        f = fibers.get(w, 0)
                        checked += 1
                        if not b.lower <= f <= b.upper:
                            bad.append(("bounds", p, n, s, w, f))
                        wm = np.array(w).reshape(s, s)
                        if invertible_array(ring, wm) and corner_fiber_count_invertible(p, n, s, wm.tolist()) != f:
                            bad.append(("formula", p, n, s, w, f))
        return bad, checked

    (bad, checked), dt = timed(run)
    ok = not bad and dt < 60
    acceptance("C02 fiber formula and bounds", ok, f"{checked} corners checked, {len(bad)} violations; {dt:.2f}s (< 60s)")
    assert ok, bad[:5]


def test_c03_ratio_estimate(acceptance):
    def run():
        b = corner_fiber_bounds(2, 3, 1)
        fib = brute_corner_counts(ZmOracle(2), 3, 1)
        extreme = Fraction(min(fib.values()), max(fib.values()))
        closed = Fraction(np.prod([2 ** (3 - 1) - 2**i for i in range(1)]), 2 ** (1 * (3 - 1)))
        pairs_ok = True
        for n in (2, 3, 4):
            bn = corner_fiber_bounds(2, n, 1)
            fibers = brute_corner_counts(ZmOracle(2), n, 1)
            for f1, f2 in itertools.product(fibers.values(), repeat=2):
                r = Fraction(f1, f2)  # P(W1) / P(W2); the common |GL_N| cancels
                pairs_ok &= bn.ratio_lower <= r <= bn.ratio_upper
        return extreme, closed, b.ratio_lower, pairs_ok

    (extreme, closed, bound, pairs_ok), dt = timed(run)
    ok = extreme == closed == bound == Fraction(3, 4) and pairs_ok and dt < 60
    acceptance("C03 ratio estimate", ok, f"extreme ratio {extreme}, bound {bound}; all pairs within bounds: {pairs_ok}; {dt:.2f}s (< 60s)")
    assert ok


def test_c04_exact_tv_trend(acceptance):
    def run():
        rows = []
        for n in range(2, 11):
            tv = tv_to_uniform(exact_corner_dist(ZmRing(2), n, 1, "formula"))
            # closed form from the counting formulas: P([[1]]) = n_N([[1]]) / |GL_N(F_2)|
            p1 = Fraction(corner_fiber_count_invertible(2, n, 1, [[1]]), order_gl_field(2, n))
            rows.append((n, tv, abs(p1 - Fraction(1, 2)), Fraction(1, 2 * (2**n - 1))))
        enum = [tv_to_uniform(exact_corner_dist(ZmRing(2), n, 1, "enumerate")) for n in (2, 3, 4)]
        return rows, enum

    (rows, enum), dt = timed(run)
    tvs = [r[1] for r in rows]
    ok = (
        all(tv == derived == closed for _, tv, derived, closed in rows)
        and enum == tvs[:3]
        and all(a > b for a, b in zip(tvs, tvs[1:]))
        and tvs[-1] < Fraction(1, 1000)
        and dt < 10
    )
    acceptance("C04 exact TV trend (m=2, S=1)", ok, f"TV(N=2..10) = 1/(2(2^N-1)) exactly, final {tvs[-1]} < 1e-3; {dt:.2f}s (< 10s)")
    assert ok


def test_c05_sampler_exactness(acceptance):
    def run():
        f2 = gf(2)
        cells = group_cells(f2, 2)
        chain = counts_over(sample_gl_field_chain(f2, 2, RngStream(0), size=6 * 10**4), cells)
        z4 = ZmRing(4)
        cells4 = group_cells(z4, 2)
        lifted = counts_over(sample_gl_prime_power(2, 2, 2, RngStream(0), size=960_000), cells4)
        return chain, len(cells4), sps.chisquare(lifted).pvalue

    (chain, ncells, p), dt = timed(run)
    ok = len(chain) == 6 and bool((np.abs(chain - 10**4) <= 400).all()) and ncells == 96 and p > ALPHA and dt < 120
    acceptance("C05 sampler exactness", ok, f"GL_2(F_2) counts {chain.tolist()} within 1e4 +/- 400; GL_2(Z_4) chi2 p = {p:.4f} > {ALPHA}; {dt:.1f}s (< 120s)")
    assert ok


def test_c06_composite_modulus_sweep(acceptance):
    res, dt = timed(lambda: convergence_sweep(ZmRing(12), 1, [4, 8, 16, 24], "mc", draws=10**5, seed=0))
    tvs = [float(t) for t in res.tv_values]
    decreasing = all(a > b for a, b in zip(tvs, tvs[1:]))
    ok = decreasing and tvs[-1] < 0.01 and dt < 300
    acceptance(
        "C06 Z_12 Monte Carlo sweep",
        ok,
        f"TV {['%.5f' % t for t in tvs]}; strictly decreasing: {decreasing}; final < 0.01: {tvs[-1] < 0.01}; {dt:.1f}s (< 300s)",
    )
    assert ok


def test_c07_field_corner_uniform(acceptance):
    def run():
        out = {}
        for label, field in (("F_4 (4 cells)", gf(2, 2)), ("F_16 (16 cells)", gf(2, 4))):
            emp = empirical_dist(sample_truncated(field, 8, 1, 10**5, RngStream(0)))
            res = chi_squared_test(emp)
            out[label] = (res.df + 1, res.p_value)
        return out

    out, dt = timed(run)
    ok = all(p > ALPHA for _, p in out.values()) and dt < 60
    detail = "; ".join(f"{k}: {cells} cells, p = {p:.4f}" for k, (cells, p) in out.items())
    acceptance("C07 F_q corner uniformity (N=8, S=1)", ok, f"{detail}; {dt:.1f}s (< 60s)")
    assert ok


def test_c08_local_ring(acceptance):
    def run():
        ring = LocalRing(TruncatedPoly(gf(2), 2))
        tvs = []
        for n in (2, 4, 8):
            x = sample_gl_local(ring, n, RngStream(0).split(f"N={n}"), size=10**5)
            tvs.append(tv_estimate(EmpiricalDist.from_array(ring, x[:, :1, :1])))
        z4 = LocalRing(PrimePower(2, 2))
        cells = group_cells(z4, 2)
        c_local = counts_over(sample_gl_local(z4, 2, RngStream(1), size=10**6), cells)
        c_lift = counts_over(sample_gl_prime_power(2, 2, 2, RngStream(2), size=10**6), cells)
        p = sps.chi2_contingency(np.vstack([c_local, c_lift]))[1]
        return tvs, len(cells), p

    (tvs, ncells, p), dt = timed(run)
    decreasing = all(a > b for a, b in zip(tvs, tvs[1:]))
    ok = decreasing and tvs[-1] < 0.02 and ncells == 96 and p > ALPHA and dt < 180
    acceptance(
        "C08 local rings",
        ok,
        f"F_2[t]/(t^2) TV {['%.4f' % t for t in tvs]} decreasing, final < 0.02; Z_4 local vs lift chi2 p = {p:.4f}; {dt:.1f}s (< 180s)",
    )
    assert ok


def test_c09_negative_control(acceptance):
    def run():
        z4 = ZmRing(4)
        bad = EmpiricalDist.from_array(z4, sample_nonzero_det(z4, 2, RngStream(0), size=10**5))
        p_wrong = chi_squared_test(bad, exact_corner_dist(z4, 2, 2)).p_value
        f2 = gf(2)
        skip = EmpiricalDist.from_array(f2, sample_chain_without_span_check(f2, 2, RngStream(0), size=10**5))
        p_skip = chi_squared_test(skip, exact_corner_dist(f2, 2, 2)).p_value
        return p_wrong, p_skip

    (p_wrong, p_skip), dt = timed(run)
    ok = p_wrong < 1e-6 and p_skip < 1e-6 and dt < 30
    acceptance("C09 negative control", ok, f"wrong-criterion sampler p = {p_wrong:.2e}; no-span-check sampler p = {p_skip:.2e} (< 1e-6); {dt:.1f}s (< 30s)")
    assert ok


def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "haar_modular", *args], capture_output=True, check=True)
    return proc.stdout


def test_c10_reproducibility(acceptance):
    commands = [
        ["factor", "360"],
        ["count", "--ring", "zm:6", "--n", "2"],
        ["sample", "--ring", "zm:12", "--n", "8", "--s", "2", "--draws", "2000", "--seed", "7"],
        ["sample", "--ring", "local_tp:2:1:2", "--n", "4", "--draws", "200"],
        ["dist", "--ring", "zm:4", "--n", "2", "--s", "1"],
        ["bounds", "--p", "3", "--n", "5", "--s", "2", "--r", "2"],
        ["sweep", "--ring", "zm:2", "--s", "1", "--n", "2..10", "--mode", "exact", "--format", "csv"],
    ]
    sweep = ["sweep", "--ring", "zm:12", "--s", "1", "--n", "4,8,16", "--mode", "mc", "--draws", "20000", "--seed", "3"]

    def run():
        same = [_cli(*c) == _cli(*c) for c in commands]
        threads = [_cli(*sweep, "--format", fmt, "--threads", t) for fmt in ("json", "csv") for t in ("1", "4")]
        return same, threads[0] == threads[1] and threads[2] == threads[3]

    (same, threads_ok), dt = timed(run)
    ok = all(same) and threads_ok and dt < 60
    acceptance("C10 reproducibility", ok, f"{sum(same)}/{len(same)} commands byte-identical on rerun; sweep --threads 1 vs 4 identical: {threads_ok}; {dt:.1f}s (< 60s)")
    assert ok
