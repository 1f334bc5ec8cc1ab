"""Empirical corner laws, TV and chi-squared comparisons, convergence sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .counting import ExactDist, exact_corner_dist, tv_to_uniform
from .errors import DomainError, FormatError, InsufficientDataError
from .rings import Ring, field_view
from .sampling import RngStream, SampleBatch, sample_truncated

_UNIFORM_CELL_CAP = 10**6


# ---------------------------------------------------------------------------
# incomplete gamma


def _gamma_series(a: float, x: float) -> float:
    # lower regularized P(a, x)
    term = total = 1.0 / a
    ap = a
    for _ in range(100000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    # upper regularized Q(a, x), modified Lentz
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 100000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Upper regularized incomplete gamma ``Q(a, x) = Gamma(a, x) / Gamma(a)``."""
    if a <= 0:
        raise DomainError("shape parameter must be positive")
    if x < 0:
        raise DomainError("x must be non-negative")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_cf(a, x))


def chi2_sf(x: float, df: int) -> float:
    """P(chi^2_df >= x)."""
    return gammaincc(df / 2.0, x / 2.0)


# ---------------------------------------------------------------------------
# empirical laws


@dataclass
class EmpiricalDist:
    ring: Ring
    S: int
    counts: dict[tuple[int, ...], int]
    total: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise FormatError("cell counts do not sum to the number of draws")

    @classmethod
    def from_array(cls, ring: Ring, corners: np.ndarray) -> "EmpiricalDist":
        corners = np.asarray(corners, dtype=np.int64)
        if corners.ndim != 3 or corners.shape[1] != corners.shape[2] or corners.shape[0] == 0:
            raise FormatError(f"expected a non-empty stack of square matrices, got {corners.shape}")
        keys, cnt = np.unique(corners.reshape(len(corners), -1), axis=0, return_counts=True)
        counts = {tuple(int(v) for v in k): int(c) for k, c in zip(keys, cnt)}
        return cls(ring, corners.shape[1], counts, len(corners))

    def count(self, corner) -> int:
        return self.counts.get(tuple(int(v) for v in np.ravel(corner)), 0)

    def frequencies(self) -> dict[tuple[int, ...], float]:
        return {k: c / self.total for k, c in self.counts.items()}

    def as_exact(self) -> ExactDist:
        """The empirical frequencies as an exact law."""
        return ExactDist(self.ring, self.S, {k: Fraction(c, self.total) for k, c in self.counts.items()}, method="empirical")


def empirical_dist(batch: SampleBatch | Sequence[SampleBatch]) -> EmpiricalDist:
    """Tally the corners of one batch or of several compatible batches."""
    batches = [batch] if isinstance(batch, SampleBatch) else list(batch)
    if not batches or sum(len(b) for b in batches) == 0:
        raise InsufficientDataError("no samples to tally")
    ring, s = batches[0].ring, batches[0].S
    for b in batches[1:]:
        if b.ring != ring or b.S != s:
            raise FormatError("batches disagree on ring or corner size")
    return EmpiricalDist.from_array(ring, np.concatenate([b.corners for b in batches]))


def _check_compatible(emp: EmpiricalDist, ref: ExactDist | None) -> None:
    if ref is not None and (ref.ring != emp.ring or ref.S != emp.S):
        raise DomainError(f"reference law is on M_{ref.S}({ref.ring.label}), sample on M_{emp.S}({emp.ring.label})")


def tv_estimate(emp: EmpiricalDist, ref: ExactDist | None = None) -> float:
    """Plug-in TV distance between the empirical law and ``ref`` (uniform if ``None``)."""
    _check_compatible(emp, ref)
    n = emp.total
    if ref is None:
        size = emp.ring.order ** (emp.S * emp.S)
        u = 1.0 / size
        listed = math.fsum(abs(c / n - u) for c in emp.counts.values())
        return 0.5 * (listed + (size - len(emp.counts)) * u)
    if not ref.exact_per_corner:
        raise DomainError("reference law has an aggregated residual class; TV is not defined per corner")
    keys = set(emp.counts) | set(ref.probs)
    return 0.5 * math.fsum(abs(emp.counts.get(k, 0) / n - float(ref.probs.get(k, 0))) for k in keys)


class ChiSquaredResult(NamedTuple):
    statistic: float
    df: int
    p_value: float


_RESIDUAL = (math.inf,)  # sorts after every corner key


def _cells(emp: EmpiricalDist, ref: ExactDist | None):
    """Observed and expected counts per cell, in key order; residual class last."""
    n = emp.total
    if ref is None:
        size = emp.ring.order ** (emp.S * emp.S)
        if size > _UNIFORM_CELL_CAP:
            raise InsufficientDataError(f"{size} cells are too many for a chi-squared test")
        q, k = emp.ring.order, emp.S * emp.S
        cells = []
        for i in range(size):
            digits, j = [], i
            for _ in range(k):
                j, d = divmod(j, q)
                digits.append(d)
            key = tuple(reversed(digits))
            cells.append((key, emp.counts.get(key, 0), n / size))
        return cells, 0
    cells = [(k, emp.counts.get(k, 0), n * float(p)) for k, p in sorted(ref.probs.items())]
    outside = {k: c for k, c in emp.counts.items() if k not in ref.probs}
    stray = sum(outside.values())
    if ref.residual_size:
        cells.append((_RESIDUAL, stray, n * float(ref.residual)))
        stray = 0
    return cells, stray


def _merge_small(cells, min_expected: float):
    """Pool cells with small expected counts.

    All cells below ``min_expected`` are pooled under the lexicographically
    last of their keys; while the pool stays below the threshold it absorbs
    the remaining cell with the smallest expected count (ties: last key).
    """
    cells = sorted(cells, key=lambda c: c[0])
    small = [c for c in cells if c[2] < min_expected]
    if not small:
        return cells
    big = [c for c in cells if c[2] >= min_expected]
    key = max(c[0] for c in small)
    pool = (key, sum(c[1] for c in small), sum(c[2] for c in small))
    while pool[2] < min_expected and big:
        big.sort(key=lambda c: c[0], reverse=True)
        other = big.pop(min(range(len(big)), key=lambda i: big[i][2]))
        pool = (max(pool[0], other[0]), pool[1] + other[1], pool[2] + other[2])
    return sorted(big + [pool], key=lambda c: c[0])


def chi_squared_test(emp: EmpiricalDist, ref: ExactDist | None = None, *, min_expected: float = 5.0) -> ChiSquaredResult:
    """Pearson goodness of fit of ``emp`` to ``ref`` (uniform on M_S if ``None``).

    Any observation outside the support of ``ref`` makes the statistic
    infinite and the p-value 0.
    """
    _check_compatible(emp, ref)
    cells, stray = _cells(emp, ref)
    cells = [c for c in cells if c[2] > 0 or c[1] > 0]
    if any(c[2] == 0 and c[1] > 0 for c in cells):
        stray += sum(c[1] for c in cells if c[2] == 0)
        cells = [c for c in cells if c[2] > 0]
    cells = _merge_small(cells, min_expected)
    if len(cells) < 2:
        raise InsufficientDataError("fewer than two cells remain after merging")
    if any(c[2] < min_expected for c in cells):
        raise InsufficientDataError("too few draws: a merged cell is still below the expected-count threshold")
    df = len(cells) - 1
    if stray:
        return ChiSquaredResult(math.inf, df, 0.0)
    stat = math.fsum((o - e) ** 2 / e for _, o, e in cells)
    return ChiSquaredResult(stat, df, chi2_sf(stat, df))


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepRow:
    N: int
    mode: str
    tv: Fraction | float
    draws: int
    seed: int | None


@dataclass
class SweepResult:
    ring: Ring
    S: int
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def tv_values(self) -> list[Fraction | float]:
        return [r.tv for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "mode", "tv_num", "tv_den", "tv_float", "draws", "seed"])
        for r in self.rows:
            if r.mode == "exact":
                w.writerow([r.N, r.mode, r.tv.numerator, r.tv.denominator, "", r.draws, ""])
            else:
                w.writerow([r.N, r.mode, "", "", repr(float(r.tv)), r.draws, r.seed])
        return buf.getvalue()

    def to_dict(self) -> dict:
        rows = []
        for r in self.rows:
            row = {"N": str(r.N), "mode": r.mode, "draws": str(r.draws)}
            if r.mode == "exact":
                row["tv"] = {"num": str(r.tv.numerator), "den": str(r.tv.denominator)}
            else:
                row["tv_float"] = repr(float(r.tv))
                row["seed"] = str(r.seed)
            rows.append(row)
        return {"ring": self.ring.to_dict(), "S": str(self.S), "rows": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _exact_row(ring: Ring, s: int, n: int) -> SweepRow:
    method = "formula" if field_view(ring) is not None and s == 1 else "enumerate"
    return SweepRow(n, "exact", tv_to_uniform(exact_corner_dist(ring, n, s, method)), 0, None)


def _mc_row(ring: Ring, s: int, n: int, draws: int, seed: int) -> SweepRow:
    rng = RngStream(seed).split(f"N={n}")
    emp = empirical_dist(sample_truncated(ring, n, s, draws, rng))
    return SweepRow(n, "mc", tv_estimate(emp), draws, seed)


def convergence_sweep(ring: Ring, s: int, n_list: Sequence[int], mode: str = "exact", draws: int = 10**5, seed: int = 0, *, threads: int = 1) -> SweepResult:
    """TV distance of the corner law to uniform for each ``N`` in ``n_list``.

    ``mode="exact"`` uses exact laws (closed form for fields with ``s = 1``,
    enumeration otherwise); ``mode="mc"`` estimates from ``draws`` samples.
    Each ``N`` draws from its own child stream ``seed / "N=<N>"``, so the
    result does not depend on ``threads``.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or s > min(n_list) or s < 1:
        raise DomainError(f"corner size {s} must satisfy 1 <= S <= min(N)")
    if mode == "exact":
        job = lambda n: _exact_row(ring, s, n)  # noqa: E731
    elif mode == "mc":
        if draws < 1:
            raise DomainError("draws must be >= 1")
        job = lambda n: _mc_row(ring, s, n, draws, seed)  # noqa: E731
    else:
        raise DomainError(f"unknown mode {mode!r}")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(job, n_list))
    else:
        rows = [job(n) for n in n_list]
    return SweepResult(ring, s, rows)
