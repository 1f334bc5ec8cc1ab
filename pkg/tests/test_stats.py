import csv
import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats as sps

from haar_modular import (
    DomainError,
    EmpiricalDist,
    FormatError,
    InsufficientDataError,
    RngStream,
    SampleBatch,
    ZmRing,
    chi_squared_test,
    convergence_sweep,
    empirical_dist,
    exact_corner_dist,
    gf,
    sample_truncated,
    tv_estimate,
    uniform_dist,
)
from haar_modular.sampling import sample_chain_without_span_check, sample_gl_field_chain, sample_nonzero_det
from haar_modular.stats import _merge_small, chi2_sf, gammaincc


# -- incomplete gamma --------------------------------------------------------

@settings(max_examples=500, deadline=None)
@given(st.floats(0.05, 500), st.floats(0, 2000))
def test_gammaincc_matches_scipy(a, x):
    assert abs(gammaincc(a, x) - special.gammaincc(a, x)) <= 1e-10


@pytest.mark.parametrize("df", list(range(1, 200)))
def test_chi2_sf_grid(df):
    for x in np.linspace(0, 4 * df + 20, 60):
        assert abs(chi2_sf(x, df) - sps.chi2.sf(x, df)) <= 1e-10


@pytest.mark.parametrize("df, x, p", [
    (1, 3.841, 0.05), (1, 6.635, 0.01), (5, 11.070, 0.05), (5, 15.086, 0.01),
    (15, 24.996, 0.05), (15, 30.578, 0.01),
    # statistic equal to df
    (1, 1.0, 0.3173), (5, 5.0, 0.4159), (15, 15.0, 0.4514),
])
def test_chi2_table_values(df, x, p):
    assert abs(chi2_sf(x, df) - p) <= 1e-3


def test_gammaincc_edges():
    assert gammaincc(2.0, 0.0) == 1.0
    assert gammaincc(2.0, math.inf) == 0.0
    with pytest.raises(DomainError):
        gammaincc(0.0, 1.0)
    with pytest.raises(DomainError):
        gammaincc(1.0, -1.0)


# -- empirical laws and TV ---------------------------------------------------

def test_empirical_single_cell():
    corners = np.ones((50, 1, 1), dtype=np.int64)
    emp = empirical_dist(SampleBatch(ZmRing(3), 4, 1, corners, 0))
    assert emp.counts == {(1,): 50} and emp.total == 50
    assert emp.count([[0]]) == 0


def test_empirical_corner_frequency():
    emp = empirical_dist(sample_truncated(ZmRing(2), 2, 1, 6 * 10**5, RngStream(0)))
    sigma = math.sqrt(6 * 10**5 * (2 / 3) * (1 / 3))
    assert abs(emp.count([[1]]) - 4 * 10**5) <= 3 * sigma


def test_empirical_errors():
    b1 = sample_truncated(ZmRing(3), 2, 1, 10, 0)
    b2 = sample_truncated(ZmRing(5), 2, 1, 10, 0)
    with pytest.raises(FormatError):
        empirical_dist([b1, b2])
    with pytest.raises(InsufficientDataError):
        empirical_dist([])
    merged = empirical_dist([b1, b1])
    assert merged.total == 20


def test_tv_examples():
    ring = ZmRing(2)
    emp = EmpiricalDist(ring, 1, {(0,): 10, (1,): 20}, 30)
    assert tv_estimate(emp, exact_corner_dist(ring, 2, 1)) == 0
    assert tv_estimate(emp, emp.as_exact()) == 0
    conc = EmpiricalDist(ZmRing(4), 1, {(2,): 7}, 7)
    assert tv_estimate(conc) == pytest.approx(0.75, abs=1e-15)
    assert tv_estimate(conc, uniform_dist(ZmRing(4), 1)) == pytest.approx(0.75, abs=1e-15)
    with pytest.raises(DomainError):
        tv_estimate(conc, exact_corner_dist(ring, 2, 1))
    with pytest.raises(DomainError):
        tv_estimate(EmpiricalDist(gf(2), 2, {(1, 0, 0, 1): 1}, 1), exact_corner_dist(gf(2), 3, 2, "formula"))


def test_tv_m2_n6():
    emp = empirical_dist(sample_truncated(ZmRing(2), 6, 1, 10**6, RngStream(0)))
    assert abs(tv_estimate(emp) - 1 / 126) <= 0.004


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=4, max_size=4).filter(lambda c: sum(c) > 0))
def test_tv_matches_direct_formula(counts):
    ring = ZmRing(4)
    emp = EmpiricalDist(ring, 1, {(i,): c for i, c in enumerate(counts) if c}, sum(counts))
    ref = exact_corner_dist(ring, 2, 1)
    n = sum(counts)
    direct = 0.5 * sum(abs(counts[i] / n - float(ref.probs[(i,)])) for i in range(4))
    assert tv_estimate(emp, ref) == pytest.approx(direct, abs=1e-12)
    assert 0 <= tv_estimate(emp) <= 1


# -- chi-squared -------------------------------------------------------------

def test_chi_squared_exact_counts():
    ref = exact_corner_dist(ZmRing(2), 2, 2)  # 6 cells of 1/6
    emp = EmpiricalDist(ZmRing(2), 2, {k: 100 for k in ref.probs}, 600)
    res = chi_squared_test(emp, ref)
    assert res.statistic == 0 and res.p_value == 1 and res.df == 5


def test_chi_squared_matches_scipy():
    ref = exact_corner_dist(ZmRing(3), 2, 1)
    emp = empirical_dist(sample_truncated(ZmRing(3), 2, 1, 5000, RngStream(2)))
    res = chi_squared_test(emp, ref)
    keys = sorted(ref.probs)
    obs = [emp.counts.get(k, 0) for k in keys]
    exp = [5000 * float(ref.probs[k]) for k in keys]
    sp = sps.chisquare(obs, exp)
    assert res.statistic == pytest.approx(sp.statistic, rel=1e-12)
    assert abs(res.p_value - sp.pvalue) <= 1e-10


def test_chi_squared_uniform_reference():
    emp = EmpiricalDist(ZmRing(3), 1, {(0,): 10, (1,): 10, (2,): 10}, 30)
    assert chi_squared_test(emp).statistic == 0
    with pytest.raises(InsufficientDataError):
        chi_squared_test(EmpiricalDist(ZmRing(3), 1, {(0,): 4}, 4))


def test_chi_squared_stray_observation():
    ref = exact_corner_dist(ZmRing(2), 2, 2)
    emp = EmpiricalDist(ZmRing(2), 2, {**{k: 100 for k in ref.probs}, (0, 0, 0, 0): 1}, 601)
    res = chi_squared_test(emp, ref)
    assert res.statistic == math.inf and res.p_value == 0


def test_chi_squared_residual_class():
    ref = exact_corner_dist(gf(2), 4, 2, "formula")
    emp = empirical_dist(sample_truncated(gf(2), 4, 2, 20_000, RngStream(3)))
    res = chi_squared_test(emp, ref)
    assert res.df == 6  # six invertible corners plus the singular class
    assert res.p_value > 0.001


def test_merge_rule():
    cells = [((0,), 1, 1.0), ((1,), 2, 2.0), ((2,), 10, 10.0), ((3,), 9, 9.0), ((4,), 1, 1.5)]
    merged = _merge_small(cells, 5.0)
    # (0,), (1,), (4,) pool to expected 4.5 < 5, so they absorb the smallest remaining cell (3,)
    assert merged == [((2,), 10, 10.0), ((4,), 13, 13.5)]
    # ties on expected count go to the last key
    merged_tie = _merge_small([((0,), 1, 1.0), ((1,), 6, 6.0), ((2,), 6, 6.0), ((3,), 6, 6.0)], 5.0)
    assert merged_tie == [((1,), 6, 6.0), ((2,), 6, 6.0), ((3,), 7, 7.0)]
    assert _merge_small(cells[2:4], 5.0) == cells[2:4]


def test_merge_is_deterministic_in_key_order():
    rng = np.random.default_rng(0)
    cells = [((i,), int(c), float(e)) for i, (c, e) in enumerate(zip(rng.integers(0, 9, 30), rng.uniform(0.5, 9, 30)))]
    a = _merge_small(cells, 5.0)
    b = _merge_small(list(reversed(cells)), 5.0)
    assert a == b
    assert sum(c[1] for c in a) == sum(c[1] for c in cells)
    assert all(c[2] >= 5.0 for c in a)


def test_negative_control_skip_span_check():
    f2 = gf(2)
    ref = exact_corner_dist(f2, 2, 2)
    bad = EmpiricalDist.from_array(f2, sample_chain_without_span_check(f2, 2, RngStream(0), size=10**5))
    assert chi_squared_test(bad, ref).p_value < 1e-6
    good = EmpiricalDist.from_array(f2, sample_gl_field_chain(f2, 2, RngStream(0), size=10**5))
    assert chi_squared_test(good, ref).p_value > 0.001


def test_negative_control_wrong_criterion_z4():
    z4 = ZmRing(4)
    ref = exact_corner_dist(z4, 2, 2)
    bad = EmpiricalDist.from_array(z4, sample_nonzero_det(z4, 2, RngStream(0), size=10**5))
    assert chi_squared_test(bad, ref).p_value < 1e-6
    # the singular draws (det = 2) carry a visible share of the mass
    assert tv_estimate(bad, ref) > 0.1


# -- sweeps ------------------------------------------------------------------

def test_sweep_exact_closed_form():
    res = convergence_sweep(ZmRing(2), 1, range(2, 11), "exact")
    assert res.tv_values == [Fraction(1, 2 * (2**n - 1)) for n in range(2, 11)]


def test_sweep_exact_enumerate_path():
    res = convergence_sweep(ZmRing(4), 1, [1, 2], "exact")
    assert res.tv_values[1] == Fraction(1, 6)


def test_sweep_mc_deterministic_and_thread_independent():
    a = convergence_sweep(ZmRing(6), 1, [2, 3, 4, 5], "mc", draws=3000, seed=5)
    b = convergence_sweep(ZmRing(6), 1, [2, 3, 4, 5], "mc", draws=3000, seed=5, threads=4)
    assert a.to_csv() == b.to_csv() and a.to_json() == b.to_json()
    c = convergence_sweep(ZmRing(6), 1, [5], "mc", draws=3000, seed=5)
    assert c.rows[0].tv == a.rows[-1].tv  # each N has its own stream


def test_sweep_formats():
    res = convergence_sweep(ZmRing(2), 1, [2, 3], "exact")
    rows = list(csv.DictReader(io.StringIO(res.to_csv())))
    assert list(rows[0]) == ["N", "mode", "tv_num", "tv_den", "tv_float", "draws", "seed"]
    assert (rows[0]["tv_num"], rows[0]["tv_den"], rows[0]["tv_float"]) == ("1", "6", "")
    mc = convergence_sweep(ZmRing(2), 1, [2], "mc", draws=100, seed=1)
    row = next(csv.DictReader(io.StringIO(mc.to_csv())))
    assert row["tv_num"] == "" and float(row["tv_float"]) >= 0 and row["seed"] == "1"
    d = json.loads(res.to_json())
    assert d["rows"][1]["tv"] == {"num": "1", "den": "14"}


def test_sweep_errors():
    with pytest.raises(DomainError):
        convergence_sweep(ZmRing(2), 3, [2, 4])
    with pytest.raises(DomainError):
        convergence_sweep(ZmRing(2), 1, [2], "bogus")
    with pytest.raises(DomainError):
        convergence_sweep(ZmRing(2), 1, [2], "mc", draws=0)
