"""Finite commutative rings: Z/mZ, GF(p^n) and finite local rings.

Every ring encodes its elements as integers in ``[0, order)``:

* ``ZmRing``: the canonical residue.
* ``FqField``: the coefficient vector ``(c_0, ..., c_{n-1})`` of a polynomial
  over F_p read as a base-p integer, constant term least significant.
* ``LocalRing``: ``PrimePower(p, r)`` is Z/p^rZ; ``TruncatedPoly(F_q, k)`` is
  F_q[t]/(t^k) with base-q digits, constant term least significant.

Arithmetic methods (``add``, ``neg``, ``sub``, ``mul``, ``is_unit``) accept
Python ints or integer numpy arrays and broadcast.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import (
    DomainError,
    InvalidModulusError,
    InvalidReductionError,
    NotLocalRingError,
)

# residues are stored as int64; products of two residues must not overflow
MAX_MODULUS = 1 << 31
_TRIAL_LIMIT = 1 << 16
_TABLE_LIMIT = 1024
_LOG_TABLE_LIMIT = 1 << 16


# ---------------------------------------------------------------------------
# integers: primality and factorization


def _miller_rabin(n: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for n < 3.3e24
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _trial_divisors():
    yield 2
    yield 3
    for k in itertools.count(6, 6):
        yield k - 1
        yield k + 1


def is_prime(n: int) -> bool:
    """Deterministic primality test (trial division below 2^32)."""
    if n < 2:
        return False
    for d in _trial_divisors():
        if d * d > n:
            return True
        if n % d == 0:
            return n == d
        if d > _TRIAL_LIMIT:
            return _miller_rabin(n)
    raise AssertionError("unreachable")


def _pollard_brent(n: int) -> int:
    """Return a nontrivial factor of the odd composite ``n``."""
    for c in itertools.count(1):
        y, r, q, g = 2, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += 128
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise AssertionError("unreachable")


def _split_large(n: int, out: list[int]) -> None:
    if n == 1:
        return
    if _miller_rabin(n):
        out.append(n)
        return
    d = _pollard_brent(n)
    _split_large(d, out)
    _split_large(n // d, out)


@dataclass(frozen=True)
class Factorization:
    """Prime factorization ``m = p_1^r_1 ... p_s^r_s`` with increasing primes."""

    m: int
    factors: tuple[tuple[int, int], ...]

    @property
    def prime_powers(self) -> tuple[int, ...]:
        return tuple(p**r for p, r in self.factors)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def to_dict(self) -> dict:
        return {"m": self.m, "factors": [[p, r] for p, r in self.factors]}


@lru_cache(maxsize=4096)
def factorize(m: int) -> Factorization:
    """Factor ``2 <= m < 2^63``.

    Trial division handles every prime factor below 2^16; a cofactor left
    over is either prime (certified by trial division when below 2^32,
    deterministic Miller-Rabin above) or split with Pollard-Brent.

    >>> factorize(360).factors
    ((2, 3), (3, 2), (5, 1))
    """
    m = int(m)
    if m < 2 or m >= 1 << 63:
        raise InvalidModulusError(f"modulus must satisfy 2 <= m < 2^63, got {m}")
    primes: list[int] = []
    n = m
    for d in _trial_divisors():
        if d * d > n or d > _TRIAL_LIMIT:
            break
        while n % d == 0:
            primes.append(d)
            n //= d
    if n > 1:
        if n < _TRIAL_LIMIT * _TRIAL_LIMIT:
            primes.append(n)
        else:
            _split_large(n, primes)
    counts: dict[int, int] = {}
    for p in primes:
        counts[p] = counts.get(p, 0) + 1
    return Factorization(m, tuple(sorted(counts.items())))


def is_prime_power(q: int) -> bool:
    return q >= 2 and len(factorize(q).factors) == 1


# ---------------------------------------------------------------------------
# polynomials over F_p, as coefficient lists with the constant term first


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_sub(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % p
    return _trim(out)


def _poly_mod(a: Sequence[int], f: Sequence[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    f = _trim(list(f))
    df = len(f) - 1
    lead_inv = pow(f[-1], -1, p)
    while len(a) - 1 >= df and a:
        coef = a[-1] * lead_inv % p
        shift = len(a) - 1 - df
        for i, c in enumerate(f):
            a[shift + i] = (a[shift + i] - coef * c) % p
        _trim(a)
    return a


def _poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _poly_mulmod(a, b, f, p) -> list[int]:
    return _poly_mod(_poly_mul(a, b, p), f, p)


def _poly_powmod(a, e: int, f, p) -> list[int]:
    result = [1]
    base = _poly_mod(a, f, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, p)
        base = _poly_mulmod(base, base, f, p)
        e >>= 1
    return result


def _poly_gcd(a, b, p) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Irreducibility over F_p of a monic polynomial (constant term first).

    A degree-n polynomial is irreducible iff it shares no factor with
    ``x^(p^k) - x`` for every ``k <= n/2``.
    """
    f = _trim([int(c) % p for c in poly])
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    if f[0] == 0:
        return False
    x = [0, 1]
    xp = x
    for _ in range(1, n // 2 + 1):
        xp = _poly_powmod(xp, p, f, p)
        g = _poly_gcd(f, _poly_sub(xp, x, p), p)
        if len(g) > 1:
            return False
    return True


@lru_cache(maxsize=None)
def default_modulus(p: int, n: int) -> tuple[int, ...]:
    """Canonical monic irreducible polynomial of degree ``n`` over F_p.

    Candidates ``c_0 + c_1 x + ... + x^n`` are scanned in increasing order of
    the integer ``sum(c_i p^i)``; the first irreducible one is returned.
    For ``n = 1`` this is the polynomial ``x``.
    """
    if not is_prime(p):
        raise InvalidModulusError(f"{p} is not prime")
    if n < 1:
        raise InvalidModulusError("extension degree must be >= 1")
    for code in range(p**n):
        coeffs = [(code // p**i) % p for i in range(n)] + [1]
        if is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise AssertionError("an irreducible polynomial exists for every degree")


# ---------------------------------------------------------------------------
# rings


def _as_array(a):
    return np.asarray(a, dtype=np.int64)


def _scalar(a):
    """Collapse 0-d numpy results back to Python ints/bools."""
    if isinstance(a, np.ndarray) and a.ndim == 0:
        return a.item()
    if isinstance(a, np.generic):
        return a.item()
    return a


def _elementwise(func, *args):
    out = np.frompyfunc(func, len(args), 1)(*args)
    if isinstance(out, np.ndarray):
        return out.astype(np.int64)
    return int(out)


class Ring:
    """Common interface of the finite rings in this module."""

    order: int
    is_field: bool = False

    zero = 0
    one = 1

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def is_unit(self, a):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def check(self, x) -> None:
        """Raise ``DomainError`` unless every element of ``x`` is canonical."""
        arr = np.asarray(x)
        if arr.dtype.kind not in "iu" and not (arr.dtype == object and arr.size == 0):
            if arr.dtype == object and all(isinstance(v, (int, np.integer)) for v in arr.flat):
                arr = arr.astype(np.int64)
            else:
                raise DomainError(f"ring elements must be integers, got dtype {arr.dtype}")
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise DomainError(f"element out of range [0, {self.order}) for {self.label}")

    @property
    def label(self) -> str:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class ZmRing(Ring):
    """The ring Z/mZ with canonical residues in ``[0, m)``."""

    modulus: int

    def __post_init__(self):
        if not isinstance(self.modulus, (int, np.integer)) or self.modulus < 2:
            raise InvalidModulusError(f"modulus must be an integer >= 2, got {self.modulus!r}")
        if self.modulus >= MAX_MODULUS:
            raise InvalidModulusError(f"modulus must be below 2^31, got {self.modulus}")
        object.__setattr__(self, "modulus", int(self.modulus))

    @property
    def m(self) -> int:
        return self.modulus

    @property
    def order(self) -> int:
        return self.modulus

    @cached_property
    def factorization(self) -> Factorization:
        return factorize(self.modulus)

    @property
    def is_field(self) -> bool:
        return len(self.factorization.factors) == 1 and self.factorization.factors[0][1] == 1

    def add(self, a, b):
        return (a + b) % self.modulus

    def neg(self, a):
        return (-a) % self.modulus

    def sub(self, a, b):
        return (a - b) % self.modulus

    def mul(self, a, b):
        return (a * b) % self.modulus

    def is_unit(self, a):
        return _scalar(np.gcd(a, self.modulus) == 1)

    @property
    def label(self) -> str:
        return f"zm:{self.modulus}"

    def to_dict(self) -> dict:
        return {"kind": "zm", "m": self.modulus}


@dataclass(frozen=True)
class FqField(Ring):
    """The field F_q = F_p[x]/(poly), q = p^n."""

    p: int
    n: int
    poly: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise InvalidModulusError(f"characteristic {self.p} is not prime")
        if self.n < 1:
            raise InvalidModulusError("extension degree must be >= 1")
        poly = tuple(int(c) for c in self.poly)
        object.__setattr__(self, "poly", poly)
        if len(poly) != self.n + 1 or poly[-1] != 1:
            raise InvalidModulusError(f"modulus polynomial must be monic of degree {self.n}")
        if any(c < 0 or c >= self.p for c in poly):
            raise InvalidModulusError("polynomial coefficients must lie in [0, p)")
        if self.p**self.n >= MAX_MODULUS:
            raise InvalidModulusError("field order must be below 2^31")
        if not is_irreducible(poly, self.p):
            raise InvalidModulusError(f"{list(poly)} is reducible over F_{self.p}")

    is_field = True

    @property
    def q(self) -> int:
        return self.p**self.n

    @property
    def order(self) -> int:
        return self.q

    @cached_property
    def _powers(self) -> np.ndarray:
        return self.p ** np.arange(self.n, dtype=np.int64)

    def to_coeffs(self, a: int) -> tuple[int, ...]:
        a = int(a)
        return tuple((a // self.p**i) % self.p for i in range(self.n))

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) != self.n or any(not 0 <= int(c) < self.p for c in coeffs):
            raise DomainError(f"expected {self.n} coefficients in [0, {self.p})")
        return sum(int(c) * self.p**i for i, c in enumerate(coeffs))

    def _digits(self, a):
        a = _as_array(a)
        return [(a // int(w)) % self.p for w in self._powers]

    def _undigits(self, digits):
        out = digits[0].copy() if isinstance(digits[0], np.ndarray) else digits[0]
        for i in range(1, self.n):
            out = out + digits[i] * int(self._powers[i])
        return out

    @cached_property
    def _add_table(self):
        if self.q > 256:
            return None
        a, b = np.meshgrid(np.arange(self.q), np.arange(self.q), indexing="ij")
        return self._add_digits(a, b)

    def _add_digits(self, a, b):
        da, db = self._digits(a), self._digits(b)
        return self._undigits([(x + y) % self.p for x, y in zip(da, db)])

    def add(self, a, b):
        if self.n == 1:
            return (a + b) % self.p
        table = self._add_table
        if table is not None:
            return _scalar(table[a, b])
        return _scalar(self._add_digits(a, b))

    def neg(self, a):
        if self.n == 1:
            return (-a) % self.p
        return _scalar(self._undigits([(-d) % self.p for d in self._digits(a)]))

    def mul_poly(self, a: int, b: int) -> int:
        """Multiply two elements by direct polynomial arithmetic mod ``poly``."""
        prod = _poly_mulmod(self.to_coeffs(a), self.to_coeffs(b), self.poly, self.p)
        return sum(c * self.p**i for i, c in enumerate(prod))

    @cached_property
    def primitive_element(self) -> int:
        """Smallest-index generator of the cyclic group F_q^x."""
        for g in range(1, self.q):
            x, k = g, 1
            while x != 1:
                x = self.mul_poly(x, g)
                k += 1
            if k == self.q - 1:
                return g
        raise AssertionError("F_q^x is cyclic")

    @cached_property
    def _log_tables(self):
        q = self.q
        exp = np.zeros(2 * (q - 1), dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        g, x = self.primitive_element, 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = self.mul_poly(x, g)
        exp[q - 1 :] = exp[: q - 1]
        return exp, log

    def mul(self, a, b):
        if self.n == 1:
            return (a * b) % self.p
        if self.q <= _LOG_TABLE_LIMIT:
            exp, log = self._log_tables
            a_arr, b_arr = _as_array(a), _as_array(b)
            out = exp[log[a_arr] + log[b_arr]]
            return _scalar(np.where((a_arr == 0) | (b_arr == 0), 0, out))
        return _elementwise(self.mul_poly, a, b)

    @cached_property
    def _inv_table(self) -> np.ndarray:
        if self.n == 1:
            table = np.array([0] + [pow(x, -1, self.p) for x in range(1, self.p)], dtype=np.int64)
        else:
            exp, log = self._log_tables
            table = exp[(self.q - 1 - log) % (self.q - 1)]
            table[0] = 0
        return table

    def inv(self, a):
        """Multiplicative inverse; raises ``ZeroDivisionError`` on zero."""
        a_arr = _as_array(a)
        if np.any(a_arr == 0):
            raise ZeroDivisionError("inverse of zero in a finite field")
        if self.q <= _LOG_TABLE_LIMIT:
            return _scalar(self._inv_table[a_arr])
        if self.n == 1:
            return _elementwise(lambda x: pow(int(x), -1, self.p), a_arr)
        return _elementwise(self._inv_poly, a_arr)

    def _inv_poly(self, a: int) -> int:
        res = _poly_powmod(list(self.to_coeffs(a)), self.q - 2, self.poly, self.p)
        return sum(c * self.p**i for i, c in enumerate(res))

    def is_unit(self, a):
        return _scalar(_as_array(a) != 0)

    @property
    def label(self) -> str:
        base = f"fq:{self.p}:{self.n}"
        if self.poly != default_modulus(self.p, self.n):
            base += ":poly=" + ",".join(str(c) for c in self.poly)
        return base

    def to_dict(self) -> dict:
        return {"kind": "fq", "p": self.p, "n": self.n, "poly": list(self.poly)}


def gf(p: int, n: int = 1, poly: Sequence[int] | None = None) -> FqField:
    """Build F_{p^n}; ``poly`` defaults to the canonical irreducible polynomial."""
    if poly is None:
        if not is_prime(p):
            raise InvalidModulusError(f"characteristic {p} is not prime")
        poly = default_modulus(p, n)
    return FqField(p, n, tuple(poly))


@dataclass(frozen=True)
class PrimePower:
    p: int
    r: int


@dataclass(frozen=True)
class TruncatedPoly:
    base_field: FqField
    k: int


LocalKind = Union[PrimePower, TruncatedPoly]


@dataclass(frozen=True)
class LocalRing(Ring):
    """A finite commutative local ring with residue field F_q.

    The canonical residue representatives are the integers ``0..p-1`` in
    Z/p^rZ, or the constant polynomials in F_q[t]/(t^k); in both encodings
    they are exactly the indices ``0..q-1``. The maximal ideal consists of
    the indices divisible by ``q``.
    """

    kind: LocalKind

    def __post_init__(self):
        kind = self.kind
        if isinstance(kind, PrimePower):
            if not is_prime(kind.p):
                raise InvalidModulusError(f"{kind.p} is not prime")
            if kind.r < 1:
                raise InvalidModulusError("exponent must be >= 1")
            if kind.p**kind.r >= MAX_MODULUS:
                raise InvalidModulusError("ring order must be below 2^31")
        elif isinstance(kind, TruncatedPoly):
            if kind.k < 1:
                raise InvalidModulusError("truncation depth must be >= 1")
            if kind.base_field.q**kind.k >= MAX_MODULUS:
                raise InvalidModulusError("ring order must be below 2^31")
        else:
            raise NotLocalRingError(f"unsupported local ring kind {kind!r}")

    @property
    def residue_field(self) -> FqField:
        if isinstance(self.kind, PrimePower):
            return gf(self.kind.p)
        return self.kind.base_field

    @property
    def q(self) -> int:
        return self.residue_field.q

    @property
    def depth(self) -> int:
        """Nilpotency depth: ``order == q ** depth``."""
        return self.kind.r if isinstance(self.kind, PrimePower) else self.kind.k

    @property
    def order(self) -> int:
        return self.q**self.depth

    @property
    def is_field(self) -> bool:
        return self.depth == 1

    @property
    def representatives(self) -> tuple[int, ...]:
        return tuple(range(self.q))

    @property
    def ideal_size(self) -> int:
        return self.order // self.q

    def residue(self, a):
        """Image in the residue field (an F_q index)."""
        return a % self.q

    def lift_residue(self, a):
        """Canonical representative of a residue-field element."""
        return a

    def in_ideal(self, a):
        return _scalar(_as_array(a) % self.q == 0)

    def is_unit(self, a):
        return _scalar(_as_array(a) % self.q != 0)

    # Z/p^rZ arithmetic, or digit-wise truncated polynomial arithmetic.

    def _tp_digits(self, a):
        a = _as_array(a)
        q = self.q
        return [(a // q**i) % q for i in range(self.depth)]

    def _tp_undigits(self, digits):
        q = self.q
        out = digits[0]
        for i in range(1, self.depth):
            out = out + digits[i] * q**i
        return out

    def _tp_add(self, a, b):
        f = self.residue_field
        return self._tp_undigits([f.add(x, y) for x, y in zip(self._tp_digits(a), self._tp_digits(b))])

    def _tp_mul(self, a, b):
        f = self.residue_field
        da, db = self._tp_digits(a), self._tp_digits(b)
        out = []
        for ell in range(self.depth):
            acc = np.zeros(np.broadcast(da[0], db[0]).shape, dtype=np.int64)
            for i in range(ell + 1):
                acc = f.add(acc, f.mul(da[i], db[ell - i]))
            out.append(_as_array(acc))
        return self._tp_undigits(out)

    @cached_property
    def _tables(self):
        if self.order > _TABLE_LIMIT:
            return None
        a, b = np.meshgrid(np.arange(self.order), np.arange(self.order), indexing="ij")
        return self._tp_add(a, b), self._tp_mul(a, b)

    def add(self, a, b):
        if isinstance(self.kind, PrimePower):
            return (a + b) % self.order
        tables = self._tables
        if tables is not None:
            return _scalar(tables[0][a, b])
        return _scalar(self._tp_add(a, b))

    def mul(self, a, b):
        if isinstance(self.kind, PrimePower):
            return (a * b) % self.order
        tables = self._tables
        if tables is not None:
            return _scalar(tables[1][a, b])
        return _scalar(self._tp_mul(a, b))

    def neg(self, a):
        if isinstance(self.kind, PrimePower):
            return (-a) % self.order
        f = self.residue_field
        return _scalar(self._tp_undigits([_as_array(f.neg(d)) for d in self._tp_digits(a)]))

    @property
    def label(self) -> str:
        if isinstance(self.kind, PrimePower):
            return f"local_pp:{self.kind.p}:{self.kind.r}"
        f = self.kind.base_field
        base = f"local_tp:{f.p}:{f.n}:{self.kind.k}"
        if f.poly != default_modulus(f.p, f.n):
            base += ":poly=" + ",".join(str(c) for c in f.poly)
        return base

    def to_dict(self) -> dict:
        if isinstance(self.kind, PrimePower):
            return {"kind": "local_pp", "p": self.kind.p, "r": self.kind.r}
        f = self.kind.base_field
        d = {"kind": "local_tp", "p": f.p, "n": f.n, "k": self.kind.k}
        if f.poly != default_modulus(f.p, f.n):
            d["poly"] = list(f.poly)
        return d


def local_ring_make(kind: LocalKind | int) -> LocalRing:
    """Construct a finite local ring.

    An integer argument is read as a modulus ``m``: Z/mZ is local only when
    ``m`` is a prime power.
    """
    if isinstance(kind, (int, np.integer)) and not isinstance(kind, bool):
        fac = factorize(int(kind))
        if len(fac.factors) != 1:
            raise NotLocalRingError(f"Z/{kind}Z has {len(fac.factors)} maximal ideals; it is not local")
        p, r = fac.factors[0]
        kind = PrimePower(p, r)
    return LocalRing(kind)


def field_view(ring: Ring) -> FqField | None:
    """The ring as an ``FqField`` with identical element encoding, if it is a field."""
    if isinstance(ring, FqField):
        return ring
    if isinstance(ring, ZmRing) and ring.is_field:
        return gf(ring.modulus)
    if isinstance(ring, LocalRing) and ring.is_field:
        return ring.residue_field
    return None


# ---------------------------------------------------------------------------
# scalar operations


def _check_residue(x, ring: Ring) -> int:
    if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
        raise DomainError(f"expected an integer residue, got {x!r}")
    if not 0 <= x < ring.order:
        raise DomainError(f"{x} is not a canonical element of {ring.label}")
    return int(x)


def zm_arith(op: str, x: int, y: int, ring: ZmRing) -> int:
    """``add``/``sub``/``mul``/``neg`` in Z/mZ (``y`` is ignored by ``neg``)."""
    x = _check_residue(x, ring)
    if op == "neg":
        return ring.neg(x)
    y = _check_residue(y, ring)
    if op == "add":
        return ring.add(x, y)
    if op == "sub":
        return ring.sub(x, y)
    if op == "mul":
        return ring.mul(x, y)
    raise DomainError(f"unknown operation {op!r}")


def is_unit(x: int, ring: Ring) -> bool:
    return bool(ring.is_unit(_check_residue(x, ring)))


def reduce_mod(x: int, v: int, u: int) -> int:
    """The reduction map Z/vZ -> Z/uZ for ``u | v``."""
    if u < 1 or v < 1 or v % u:
        raise InvalidReductionError(f"{u} does not divide {v}")
    if not 0 <= x < v:
        raise DomainError(f"{x} is not a residue mod {v}")
    return x % u


def reduction_fiber(y: int, v: int, u: int) -> list[int]:
    """All residues mod ``v`` reducing to ``y`` mod ``u``."""
    if u < 1 or v < 1 or v % u:
        raise InvalidReductionError(f"{u} does not divide {v}")
    if not 0 <= y < u:
        raise DomainError(f"{y} is not a residue mod {u}")
    return list(range(y, v, u))


@lru_cache(maxsize=1024)
def _crt_coefficients(m: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    moduli = factorize(m).prime_powers
    coeffs = tuple((m // n) * pow(m // n, -1, n) % m for n in moduli)
    return moduli, coeffs


def crt_split(x, ring: ZmRing) -> list:
    """Components ``x mod p_i^r_i`` in increasing prime order (vectorized)."""
    if not isinstance(x, np.ndarray):
        x = _check_residue(x, ring)
    moduli, _ = _crt_coefficients(ring.modulus)
    return [x % n for n in moduli]


def crt_combine(components: Sequence, ring: ZmRing):
    """Inverse of :func:`crt_split`."""
    moduli, coeffs = _crt_coefficients(ring.modulus)
    if len(components) != len(moduli):
        raise DomainError(f"expected {len(moduli)} components for modulus {ring.modulus}")
    m = ring.modulus
    acc = 0
    for c, n, e in zip(components, moduli, coeffs):
        arr = np.asarray(c)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise DomainError(f"component out of range [0, {n})")
        if not isinstance(c, np.ndarray):
            c = int(c)
        acc = (acc + (c * e) % m) % m
    return acc


def fq_arith(op: str, a, b, field: FqField):
    """``add``/``mul``/``inv`` in F_q.

    Elements are either integer indices or coefficient vectors (constant term
    first); the result uses the same form as ``a``.
    """
    as_vector = not isinstance(a, (int, np.integer))
    ia = field.from_coeffs(a) if as_vector else _check_residue(a, field)
    if op == "inv":
        if ia == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        res = field.inv(ia)
    else:
        ib = field.from_coeffs(b) if not isinstance(b, (int, np.integer)) else _check_residue(b, field)
        if op == "add":
            res = field.add(ia, ib)
        elif op == "mul":
            res = field.mul(ia, ib)
        elif op == "sub":
            res = field.sub(ia, ib)
        else:
            raise DomainError(f"unknown operation {op!r}")
    res = int(res)
    return field.to_coeffs(res) if as_vector else res


# ---------------------------------------------------------------------------
# descriptors


def ring_from_dict(d: dict) -> Ring:
    from .errors import FormatError

    try:
        kind = d["kind"]
        if kind == "zm":
            return ZmRing(int(d["m"]))
        if kind == "fq":
            return gf(int(d["p"]), int(d["n"]), d.get("poly"))
        if kind == "local_pp":
            return LocalRing(PrimePower(int(d["p"]), int(d["r"])))
        if kind == "local_tp":
            return LocalRing(TruncatedPoly(gf(int(d["p"]), int(d["n"]), d.get("poly")), int(d["k"])))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed ring descriptor {d!r}") from exc
    raise FormatError(f"unknown ring kind {d.get('kind')!r}")


def parse_ring(text: str) -> Ring:
    """Parse ``zm:<m>``, ``fq:<p>:<n>[:poly=c0,c1,...]``, ``local_pp:<p>:<r>``
    or ``local_tp:<p>:<n>:<k>[:poly=...]``."""
    parts = text.strip().split(":")
    poly = None
    if parts and parts[-1].startswith("poly="):
        poly = [int(c) for c in parts.pop()[5:].split(",")]
    try:
        kind, nums = parts[0], [int(v) for v in parts[1:]]
        if kind == "zm" and len(nums) == 1 and poly is None:
            return ZmRing(nums[0])
        if kind == "fq" and len(nums) == 2:
            return gf(nums[0], nums[1], poly)
        if kind == "local_pp" and len(nums) == 2 and poly is None:
            return LocalRing(PrimePower(*nums))
        if kind == "local_tp" and len(nums) == 3:
            return LocalRing(TruncatedPoly(gf(nums[0], nums[1], poly), nums[2]))
    except (ValueError, IndexError) as exc:
        if isinstance(exc, InvalidModulusError):
            raise
        raise DomainError(f"cannot parse ring descriptor {text!r}") from exc
    raise DomainError(f"cannot parse ring descriptor {text!r}")
