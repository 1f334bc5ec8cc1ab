"""Exact group orders, corner fiber counts, corner laws and TV distances.

Everything here is exact: Python integers and ``fractions.Fraction``.
The brute-force enumerator is the oracle the closed forms are checked
against.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Iterator

import numpy as np

from .errors import DomainError, PreconditionError, TooLargeError
from .matrices import Matrix, invertible_array
from .rings import FqField, LocalRing, PrimePower, Ring, ZmRing, factorize, field_view, gf, is_prime_power

log = logging.getLogger(__name__)

ENUMERATION_CAP = 10**8
_ENUM_CHUNK = 1 << 18


# ---------------------------------------------------------------------------
# group orders


def order_gl_field(q: int, n: int) -> int:
    """|GL_n(F_q)| = prod_{j<n} (q^n - q^j)."""
    if not is_prime_power(q):
        raise DomainError(f"{q} is not a prime power")
    if n < 1:
        raise DomainError("matrix size must be >= 1")
    return prod(q**n - q**j for j in range(n))


def order_gl_prime_power(p: int, r: int, n: int) -> int:
    """|GL_n(Z/p^rZ)| = p^((r-1) n^2) |GL_n(F_p)|."""
    if r < 1:
        raise DomainError("exponent must be >= 1")
    if factorize(p).factors != ((p, 1),):
        raise DomainError(f"{p} is not prime")
    return p ** ((r - 1) * n * n) * order_gl_field(p, n)


def order_gl_zm(m: int, n: int) -> int:
    return prod(order_gl_prime_power(p, r, n) for p, r in factorize(m).factors)


def order_gl(ring: Ring, n: int) -> int:
    """|GL_n(ring)| for any supported ring."""
    if isinstance(ring, ZmRing):
        return order_gl_zm(ring.modulus, n)
    if isinstance(ring, FqField):
        return order_gl_field(ring.q, n)
    if isinstance(ring, LocalRing):
        return ring.q ** ((ring.depth - 1) * n * n) * order_gl_field(ring.q, n)
    raise DomainError(f"unsupported ring {ring!r}")


# ---------------------------------------------------------------------------
# corner fibers


def _rest_rows(q: int, n: int, s: int) -> int:
    # choices of rows s+1..n once the first s rows are independent
    return prod(q**n - q ** (s + j) for j in range(n - s))


def corner_fiber_count_invertible(q: int, n: int, s: int, w) -> int:
    """Number of ``X`` in GL_n(F_q) whose upper-left corner is the invertible ``w``.

    ``q^(s(n-s)) * prod_{j<n-s} (q^n - q^(s+j))``: the top-right block is free
    and the remaining rows are chosen outside the span of the first ``s``.
    ``w`` is a :class:`Matrix` over a field of order ``q`` or, for prime
    ``q``, a nested list of residues.
    """
    if not 1 <= s <= n:
        raise DomainError(f"corner size {s} outside [1, {n}]")
    if not isinstance(w, Matrix):
        if not (is_prime_power(q) and factorize(q).factors[0][1] == 1):
            raise DomainError("pass a Matrix over F_q for non-prime q")
        w = Matrix(gf(q), w)
    fld = field_view(w.ring)
    if fld is None or fld.q != q:
        raise DomainError(f"corner must be over a field of order {q}, got {w.ring.label}")
    if w.shape != (s, s):
        raise DomainError(f"corner must be {s}x{s}, got {w.shape}")
    if not invertible_array(fld, w.entries):
        raise PreconditionError("the closed-form fiber count needs an invertible corner")
    return q ** (s * (n - s)) * _rest_rows(q, n, s)


@dataclass(frozen=True)
class BoundsReport:
    """Bounds on the corner fiber ``n_N(W)`` over GL_N(Z/p^rZ) (or GL_N(F_q), r = 1).

    ``ratio_upper`` is ``None`` when the lower bound vanishes (``2S > N``).
    """

    p: int
    N: int
    S: int
    r: int
    lower: int
    upper: int
    ratio_lower: Fraction
    ratio_upper: Fraction | None

    def to_dict(self) -> dict:
        def frac(x):
            return None if x is None else {"num": str(x.numerator), "den": str(x.denominator)}

        return {
            "p": self.p,
            "N": self.N,
            "S": self.S,
            "r": self.r,
            "lower": str(self.lower),
            "upper": str(self.upper),
            "ratio_lower": frac(self.ratio_lower),
            "ratio_upper": frac(self.ratio_upper),
        }


def corner_fiber_bounds(p: int, n: int, s: int, r: int = 1) -> BoundsReport:
    """Lower/upper bounds on corner fibers and on corner probability ratios.

    Upper: the top-right ``s x (n-s)`` block is arbitrary. Lower: it has
    rank ``s``, which makes the first ``s`` rows independent whatever the
    corner. Over Z/p^rZ every residue fiber is multiplied by
    ``p^((r-1)(n^2 - s^2))``, the free ideal parts outside the corner.
    """
    if not 1 <= s <= n:
        raise DomainError(f"corner size {s} outside [1, {n}]")
    if r < 1:
        raise DomainError("exponent must be >= 1")
    if not is_prime_power(p) or (r > 1 and factorize(p).factors[0][1] != 1):
        raise DomainError(f"{p} must be prime (or a prime power when r = 1)")
    rest = _rest_rows(p, n, s)
    scale = p ** ((r - 1) * (n * n - s * s))
    lower = prod(p ** (n - s) - p**i for i in range(s)) * rest * scale
    upper = p ** (s * (n - s)) * rest * scale
    ratio_lower = Fraction(lower, upper)
    ratio_upper = Fraction(upper, lower) if lower else None
    return BoundsReport(p, n, s, r, lower, upper, ratio_lower, ratio_upper)


# ---------------------------------------------------------------------------
# enumeration oracle


def _check_cap(ring: Ring, n: int, cap: int) -> int:
    total = ring.order ** (n * n)
    if total > cap:
        raise TooLargeError(f"{ring.label}, N={n}: {total} matrices exceed the enumeration cap {cap}")
    return total


def enumerate_gl_arrays(ring: Ring, n: int, *, cap: int = ENUMERATION_CAP, start: int = 0, stop: int | None = None) -> Iterator[np.ndarray]:
    """Chunks of invertible ``n x n`` matrices, in lexicographic row-major order.

    ``start``/``stop`` restrict the scan to a range of matrix indices so the
    work can be sharded.
    """
    total = _check_cap(ring, n, cap)
    stop = total if stop is None else min(stop, total)
    q = ring.order
    for lo in range(start, stop, _ENUM_CHUNK):
        hi = min(stop, lo + _ENUM_CHUNK)
        idx = np.arange(lo, hi, dtype=np.int64)
        digits = np.empty((hi - lo, n * n), dtype=np.int64)
        for pos in range(n * n - 1, -1, -1):
            digits[:, pos] = idx % q
            idx //= q
        mats = digits.reshape(-1, n, n)
        if total > _ENUM_CHUNK:
            log.debug("enumerate %s N=%d: %d/%d", ring.label, n, hi, total)
        yield mats[invertible_array(ring, mats)]


def enumerate_gl(ring: Ring, n: int, *, cap: int = ENUMERATION_CAP) -> Iterator[Matrix]:
    """Every element of GL_n(ring), exactly once."""
    for chunk in enumerate_gl_arrays(ring, n, cap=cap):
        for a in chunk:
            yield Matrix(ring, a, check=False)


def corner_counts(ring: Ring, n: int, s: int, *, cap: int = ENUMERATION_CAP, shards: int = 1) -> Counter:
    """Fiber sizes ``|{X in GL_n(ring) : X[s] = W}|`` keyed by the corner ``W``.

    Corners with an empty fiber are absent. The result does not depend on
    ``shards``; partial tallies are merged by exact addition.
    """
    if not 1 <= s <= n:
        raise DomainError(f"corner size {s} outside [1, {n}]")
    total = _check_cap(ring, n, cap)
    bounds = [total * i // shards for i in range(shards + 1)]
    counts: Counter = Counter()
    for lo, hi in zip(bounds, bounds[1:]):
        part: Counter = Counter()
        for chunk in enumerate_gl_arrays(ring, n, cap=cap, start=lo, stop=hi):
            corners = chunk[:, :s, :s].reshape(len(chunk), -1)
            keys, cnt = np.unique(corners, axis=0, return_counts=True)
            for k, c in zip(keys, cnt):
                part[tuple(int(v) for v in k)] += int(c)
        counts.update(part)
    return counts


# ---------------------------------------------------------------------------
# exact corner laws


@dataclass
class ExactDist:
    """Exact law of an ``S x S`` corner.

    ``probs`` maps row-major corner tuples to probabilities; absent corners
    have probability 0, except for the ``residual_size`` corners of an
    aggregated residual class, which jointly carry ``residual`` mass.
    """

    ring: Ring
    S: int
    probs: dict[tuple[int, ...], Fraction]
    residual: Fraction = Fraction(0)
    residual_size: int = 0
    N: int | None = None
    method: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.total != 1:
            raise AssertionError(f"probabilities sum to {self.total}, not 1")

    @property
    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0)) + self.residual

    @property
    def space_size(self) -> int:
        """|M_S(ring)|."""
        return self.ring.order ** (self.S * self.S)

    @property
    def exact_per_corner(self) -> bool:
        return self.residual_size == 0

    def prob(self, corner) -> Fraction:
        key = corner.key() if isinstance(corner, Matrix) else tuple(int(v) for v in np.ravel(corner))
        if key in self.probs:
            return self.probs[key]
        if self.residual_size:
            raise DomainError("corner falls in the aggregated residual class; its exact mass is unknown")
        return Fraction(0)

    def to_dict(self) -> dict:
        d = {
            "ring": self.ring.to_dict(),
            "N": self.N,
            "S": self.S,
            "method": self.method,
            "entries": [
                {"corner": list(k), "num": str(v.numerator), "den": str(v.denominator)}
                for k, v in sorted(self.probs.items())
            ],
        }
        if self.residual_size:
            d["residual"] = {
                "class": "non-invertible",
                "size": str(self.residual_size),
                "num": str(self.residual.numerator),
                "den": str(self.residual.denominator),
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExactDist":
        from .errors import FormatError
        from .rings import ring_from_dict

        try:
            probs = {tuple(e["corner"]): Fraction(int(e["num"]), int(e["den"])) for e in d["entries"]}
            res = d.get("residual")
            return cls(
                ring_from_dict(d["ring"]),
                int(d["S"]),
                probs,
                Fraction(int(res["num"]), int(res["den"])) if res else Fraction(0),
                int(res["size"]) if res else 0,
                d.get("N"),
                d.get("method", ""),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed distribution: {exc}") from exc


def uniform_dist(ring: Ring, s: int, *, cap: int = ENUMERATION_CAP) -> ExactDist:
    """The uniform law on M_s(ring), materialised."""
    size = ring.order ** (s * s)
    if size > cap:
        raise TooLargeError(f"|M_{s}({ring.label})| = {size} exceeds the cap")
    u = Fraction(1, size)
    probs = {}
    for i in range(size):
        key = []
        for _ in range(s * s):
            i, d = divmod(i, ring.order)
            key.append(d)
        probs[tuple(reversed(key))] = u
    return ExactDist(ring, s, probs, method="uniform")


def exact_corner_dist(ring: Ring, n: int, s: int, method: str = "enumerate", *, cap: int = ENUMERATION_CAP, shards: int = 1) -> ExactDist:
    """Exact law of the corner ``X[s]`` of a Haar ``X`` in GL_n(ring).

    ``method="enumerate"`` tallies all of GL_n(ring). ``method="formula"``
    (fields only) assigns each invertible corner its closed-form fiber and
    puts the remaining mass on the class of singular corners; for ``s = 1``
    that class is the single zero corner and the law is exact per corner.
    """
    if not 1 <= s <= n:
        raise DomainError(f"corner size {s} outside [1, {n}]")
    if method == "enumerate":
        counts = corner_counts(ring, n, s, cap=cap, shards=shards)
        total = sum(counts.values())
        return ExactDist(ring, s, {k: Fraction(c, total) for k, c in sorted(counts.items())}, N=n, method="enumerate")
    if method != "formula":
        raise DomainError(f"unknown method {method!r}")
    fld = field_view(ring)
    if fld is None:
        raise DomainError(f"the formula method needs a field, got {ring.label}")
    q = fld.q
    p_inv = Fraction(q ** (s * (n - s)) * _rest_rows(q, n, s), order_gl_field(q, n))
    corners = [tuple(int(v) for v in c.ravel()) for chunk in enumerate_gl_arrays(fld, s, cap=cap) for c in chunk]
    probs = {k: p_inv for k in corners}
    residual = 1 - p_inv * len(corners)
    residual_size = q ** (s * s) - len(corners)
    if residual_size == 1:
        probs[(0,) * (s * s)] = residual
        residual, residual_size = Fraction(0), 0
    return ExactDist(ring, s, dict(sorted(probs.items())), residual, residual_size, N=n, method="formula")


def tv_to_uniform(dist: ExactDist) -> Fraction:
    """Exact total-variation distance to the uniform law on M_S(ring)."""
    if not dist.exact_per_corner:
        raise DomainError("total variation needs per-corner masses; use method='enumerate'")
    u = Fraction(1, dist.space_size)
    listed = sum((abs(v - u) for v in dist.probs.values()), Fraction(0))
    missing = dist.space_size - len(dist.probs)
    return (listed + missing * u) / 2


def tv_closed_form_m2_s1(n: int) -> Fraction:
    """TV distance of the 1x1 corner of Haar GL_n(F_2) to uniform: 1/(2(2^n - 1))."""
    return Fraction(1, 2 * (2**n - 1))
