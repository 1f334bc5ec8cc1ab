"""Invariant suites run by ``haar-modular verify``.

Each check returns ``(passed, detail)``. The suites are smaller-scale
versions of the property tests so that the whole run stays interactive.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable

import numpy as np

from .counting import (
    corner_counts,
    corner_fiber_bounds,
    corner_fiber_count_invertible,
    enumerate_gl_arrays,
    exact_corner_dist,
    order_gl,
    tv_to_uniform,
)
from .matrices import Matrix, crt_combine_matrix, crt_split_matrix, det_array, invertible_array, matmul_array, truncate
from .rings import LocalRing, PrimePower, TruncatedPoly, ZmRing, crt_combine, crt_split, factorize, gf
from .sampling import RngStream, sample_gl_field_chain, sample_gl_prime_power, sample_nonzero_det, sample_truncated
from .stats import EmpiricalDist, chi2_sf, chi_squared_test, tv_estimate

Check = Callable[[], "tuple[bool, str]"]


def _all_matrices(order: int, n: int) -> np.ndarray:
    return np.array(list(itertools.product(range(order), repeat=n * n)), dtype=np.int64).reshape(-1, n, n)


def _tp(p: int, k: int, n: int = 1) -> LocalRing:
    return LocalRing(TruncatedPoly(gf(p, n), k))


# -- rings -------------------------------------------------------------------


def check_crt_roundtrip():
    for m in range(2, 1001):
        ring = ZmRing(m)
        x = np.arange(m)
        if not np.array_equal(crt_combine(crt_split(x, ring), ring), x):
            return False, f"roundtrip fails for m={m}"
    return True, "m = 2..1000 exhaustive"


def check_crt_homomorphism():
    rng = np.random.default_rng(0)
    for m in (6, 12, 30, 360, 1001, 2**20 * 3):
        ring = ZmRing(m)
        x, y = rng.integers(0, m, 10**4), rng.integers(0, m, 10**4)
        lhs = crt_split(ring.mul(x, y), ring)
        rhs = [(a * b) % n for a, b, n in zip(crt_split(x, ring), crt_split(y, ring), ring.factorization.prime_powers)]
        if not all(np.array_equal(a, b) for a, b in zip(lhs, rhs)):
            return False, f"split(x*y) != split(x)*split(y) for m={m}"
    return True, "10^4 random pairs per modulus"


def check_units_componentwise():
    for m in range(2, 1001):
        ring = ZmRing(m)
        x = np.arange(m)
        comp = np.ones(m, dtype=bool)
        for part, n in zip(crt_split(x, ring), ring.factorization.prime_powers):
            comp &= np.gcd(part, n) == 1
        if not np.array_equal(ring.is_unit(x), comp):
            return False, f"unit test disagrees for m={m}"
    return True, "m = 2..1000 exhaustive"


def check_field_groups():
    for q in (2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64, 81):
        (p, n), = factorize(q).factors
        f = gf(p, n)
        a, b = np.meshgrid(np.arange(1, q), np.arange(1, q), indexing="ij")
        table = np.asarray(f.mul(a, b))
        if table.min() == 0:
            return False, f"F_{q}: product of nonzero elements is zero"
        if not all(len(set(row)) == q - 1 for row in table.tolist()):
            return False, f"F_{q}: multiplication by a nonzero element is not a bijection"
        direct = [[f.mul_poly(x, y) for y in range(1, q)] for x in range(1, q)]
        if direct != table.tolist():
            return False, f"F_{q}: table and polynomial multiplication disagree"
    return True, "q <= 81"


def check_local_units():
    rings = [LocalRing(PrimePower(p, r)) for p, r in [(2, 2), (2, 3), (3, 2), (2, 8), (5, 3)]]
    rings += [_tp(2, 2), _tp(2, 3), _tp(3, 2), _tp(2, 2, 2), _tp(2, 4, 2)]
    for ring in rings:
        x = np.arange(ring.order)
        table = np.asarray(ring.mul(x[:, None], x[None, :]))
        has_inverse = (table == 1).any(axis=1)
        if not np.array_equal(has_inverse, ring.residue(x) != 0):
            return False, f"{ring.label}: units differ from nonzero residues"
    return True, "|A| <= 256 exhaustive"


# -- matrices ----------------------------------------------------------------


def check_det_multiplicative():
    rng = np.random.default_rng(1)
    rings = [ZmRing(2), ZmRing(4), ZmRing(6), ZmRing(12), gf(2, 2), _tp(2, 2)]
    for ring in rings:
        for n in range(1, 6):
            a = rng.integers(0, ring.order, (2000, n, n))
            b = rng.integers(0, ring.order, (2000, n, n))
            lhs = det_array(ring, matmul_array(ring, a, b))
            rhs = ring.mul(det_array(ring, a), det_array(ring, b))
            if not np.array_equal(lhs, rhs):
                return False, f"{ring.label}, N={n}"
    return True, "2000 random pairs per ring and N <= 5"


def check_residue_criterion():
    for p, r in [(2, 2), (2, 3), (3, 2)]:
        ring = ZmRing(p**r)
        for n in (1, 2):
            mats = _all_matrices(ring.order, n)
            if not np.array_equal(invertible_array(ring, mats, "det"), invertible_array(ring, mats, "residue")):
                return False, f"Z/{p**r}, N={n}"
    return True, "Z/4, Z/8, Z/9 with N <= 2 exhaustive"


def check_inverse_exists():
    for m in (4, 6):
        ring = ZmRing(m)
        mats = _all_matrices(m, 2)
        prods = matmul_array(ring, mats[:, None], mats[None, :])
        has_right_inverse = (prods == np.eye(2, dtype=np.int64)).all(axis=(-1, -2)).any(axis=1)
        if not np.array_equal(has_right_inverse, invertible_array(ring, mats)):
            return False, f"Z/{m}"
    return True, "N = 2 over Z/4 and Z/6, all candidate inverses searched"


def check_truncate_crt():
    rng = np.random.default_rng(2)
    ring = ZmRing(12)
    for _ in range(200):
        a = Matrix(ring, rng.integers(0, 12, (5, 5)))
        parts = crt_split_matrix(a)
        for s in range(1, 6):
            if truncate(crt_combine_matrix(parts, ring), s) != crt_combine_matrix([truncate(x, s) for x in parts], ring):
                return False, "truncation does not commute with the CRT"
    return True, "200 random 5x5 matrices over Z/12"


# -- sampling ----------------------------------------------------------------


def check_chain_gl2f2():
    ring = ZmRing(2)
    draws = sample_gl_field_chain(ring, 2, RngStream(0).split("verify-chain"), size=60000)
    emp = EmpiricalDist.from_array(ring, draws)
    ok = len(emp.counts) == 6 and all(abs(c - 10**4) <= 400 for c in emp.counts.values())
    return ok, f"cell counts {sorted(emp.counts.values())}"


def check_lift_gl2z4():
    ring = ZmRing(4)
    draws = sample_gl_prime_power(2, 2, 2, RngStream(0).split("verify-lift"), size=96000)
    res = chi_squared_test(EmpiricalDist.from_array(ring, draws), exact_corner_dist(ring, 2, 2))
    return res.p_value > 1e-3, f"chi2={res.statistic:.1f}, df={res.df}, p={res.p_value:.3g}"


def check_determinism():
    a = sample_truncated(ZmRing(12), 6, 2, 500, RngStream(7)).dumps()
    b = sample_truncated(ZmRing(12), 6, 2, 500, RngStream(7)).dumps()
    return a == b, "identical serialisations" if a == b else "serialisations differ"


# -- counting ----------------------------------------------------------------


def check_enumeration_orders():
    cases = [(ZmRing(m), n) for m in (2, 3, 4, 6) for n in (1, 2)]
    cases += [(gf(2, 2), 1), (gf(2, 2), 2), (_tp(2, 2), 1), (_tp(2, 2), 2), (ZmRing(2), 3)]
    for ring, n in cases:
        count = sum(len(c) for c in enumerate_gl_arrays(ring, n))
        if count != order_gl(ring, n):
            return False, f"{ring.label}, N={n}: {count} != {order_gl(ring, n)}"
    return True, f"{len(cases)} (ring, N) pairs"


def check_fiber_formula():
    for p in (2, 3):
        f = ZmRing(p)
        for n in (1, 2, 3):
            for s in range(1, n + 1):
                counts = corner_counts(f, n, s)
                bounds = corner_fiber_bounds(p, n, s)
                for key in itertools.product(range(p), repeat=s * s):
                    c = counts.get(key, 0)
                    if not bounds.lower <= c <= bounds.upper:
                        return False, f"p={p} N={n} S={s} W={key}: {c} outside bounds"
                    w = Matrix(f, np.array(key).reshape(s, s))
                    if invertible_array(f, w.entries) and c != corner_fiber_count_invertible(p, n, s, w):
                        return False, f"p={p} N={n} S={s} W={key}: fiber {c} != closed form"
    return True, "p in {2,3}, N <= 3, every corner"


def check_ratio_bounds():
    for n, s in [(2, 1), (3, 1), (4, 1), (3, 2)]:
        dist = exact_corner_dist(ZmRing(2), n, s)
        b = corner_fiber_bounds(2, n, s)
        probs = [v for v in dist.probs.values() if v > 0]
        lo, hi = min(probs) / max(probs), max(probs) / min(probs)
        if lo < b.ratio_lower or (b.ratio_upper is not None and hi > b.ratio_upper):
            return False, f"N={n} S={s}: ratio range [{lo}, {hi}] escapes bounds"
    return True, "p = 2, (N,S) in {(2,1),(3,1),(4,1),(3,2)}"


def check_tv_closed_form():
    prev = None
    for n in range(2, 11):
        tv = tv_to_uniform(exact_corner_dist(ZmRing(2), n, 1, "formula"))
        if tv != Fraction(1, 2 * (2**n - 1)):
            return False, f"N={n}: {tv}"
        if prev is not None and not tv < prev:
            return False, f"not decreasing at N={n}"
        prev = tv
    return True, "N = 2..10, exact"


# -- stats -------------------------------------------------------------------


def check_pvalue_table():
    table = [(3.841, 1, 0.05), (1.0, 1, 0.3173), (5.0, 5, 0.4159), (15.0, 15, 0.4514), (11.070, 5, 0.05), (24.996, 15, 0.05)]
    for x, df, expected in table:
        if abs(chi2_sf(x, df) - expected) > 1e-3:
            return False, f"df={df}, x={x}: {chi2_sf(x, df)}"
    return True, "published chi-squared table values"


def check_negative_control():
    ring = ZmRing(4)
    draws = sample_nonzero_det(ring, 2, RngStream(0).split("verify-negative"), size=10**5)
    res = chi_squared_test(EmpiricalDist.from_array(ring, draws), exact_corner_dist(ring, 2, 2))
    return res.p_value < 1e-6, f"p={res.p_value:.3g}"


def check_tv_self_zero():
    ring = ZmRing(6)
    emp = EmpiricalDist.from_array(ring, sample_truncated(ring, 4, 1, 5000, RngStream(3)).corners)
    tv = tv_estimate(emp, emp.as_exact())
    return tv == 0.0, f"tv={tv}"


SUITES: dict[str, list[tuple[str, Check]]] = {
    "rings": [
        ("crt_roundtrip", check_crt_roundtrip),
        ("crt_homomorphism", check_crt_homomorphism),
        ("units_componentwise", check_units_componentwise),
        ("field_multiplicative_groups", check_field_groups),
        ("local_units_are_nonzero_residues", check_local_units),
    ],
    "matrices": [
        ("det_multiplicative", check_det_multiplicative),
        ("residue_invertibility_criterion", check_residue_criterion),
        ("invertible_iff_inverse_exists", check_inverse_exists),
        ("truncate_commutes_with_crt", check_truncate_crt),
    ],
    "sampling": [
        ("chain_gl2_f2_cells", check_chain_gl2f2),
        ("lift_gl2_z4_chi2", check_lift_gl2z4),
        ("batch_determinism", check_determinism),
    ],
    "counting": [
        ("enumeration_matches_orders", check_enumeration_orders),
        ("fiber_formula_and_bounds", check_fiber_formula),
        ("probability_ratio_bounds", check_ratio_bounds),
        ("tv_closed_form_m2_s1", check_tv_closed_form),
    ],
    "stats": [
        ("pvalue_table", check_pvalue_table),
        ("negative_control_rejected", check_negative_control),
        ("tv_self_zero", check_tv_self_zero),
    ],
}


def run_suite(name: str) -> list[tuple[str, bool, str]]:
    names = list(SUITES) if name == "all" else [name]
    results = []
    for suite in names:
        for check_name, check in SUITES[suite]:
            try:
                ok, detail = check()
            except Exception as exc:  # reported as a failed check
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            results.append((f"{suite}.{check_name}", bool(ok), detail))
    return results
