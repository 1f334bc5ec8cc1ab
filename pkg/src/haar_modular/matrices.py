"""Dense matrices over the rings of :mod:`haar_modular.rings`.

``Matrix`` is an immutable wrapper around a 2-d int64 array plus its ring.
The ``*_array`` functions operate on stacks of matrices with shape
``(..., rows, cols)`` and are what the samplers and enumerators use.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DomainError, FormatError
from .rings import (
    LocalRing,
    PrimePower,
    Ring,
    ZmRing,
    crt_combine,
    factorize,
    field_view,
    gf,
    ring_from_dict,
)


class Matrix:
    """An immutable ``rows x cols`` matrix over ``ring``."""

    __slots__ = ("ring", "_a")

    def __init__(self, ring: Ring, entries, *, check: bool = True):
        a = np.array(entries, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DomainError(f"matrix entries must form a non-empty 2-d array, got shape {a.shape}")
        if check:
            ring.check(a)
        a.setflags(write=False)
        self.ring = ring
        self._a = a

    @classmethod
    def identity(cls, ring: Ring, n: int) -> "Matrix":
        return cls(ring, np.eye(n, dtype=np.int64), check=False)

    @classmethod
    def zeros(cls, ring: Ring, rows: int, cols: int | None = None) -> "Matrix":
        return cls(ring, np.zeros((rows, rows if cols is None else cols), dtype=np.int64), check=False)

    @property
    def entries(self) -> np.ndarray:
        """Read-only view of the entries (0-based indexing)."""
        return self._a

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    def key(self) -> tuple[int, ...]:
        """Row-major entries as a tuple of ints; used as a dictionary key."""
        return tuple(int(v) for v in self._a.ravel())

    def tolist(self) -> list[list[int]]:
        return self._a.tolist()

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.ring == other.ring and np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash((self.ring, self._a.shape, self._a.tobytes()))

    def __repr__(self):
        return f"Matrix({self.ring.label}, {self._a.tolist()})"

    def __add__(self, other: "Matrix") -> "Matrix":
        return mat_arith("add", self, other)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_arith("mul", self, other)

    def to_dict(self) -> dict:
        return {
            "ring": self.ring.to_dict(),
            "rows": self.rows,
            "cols": self.cols,
            "entries": [int(v) for v in self._a.ravel()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Matrix":
        try:
            ring = ring_from_dict(d["ring"])
            rows, cols = int(d["rows"]), int(d["cols"])
            entries = np.asarray(d["entries"], dtype=np.int64)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed matrix record: {exc}") from exc
        if entries.size != rows * cols:
            raise FormatError(f"expected {rows * cols} entries, got {entries.size}")
        return cls(ring, entries.reshape(rows, cols))


# ---------------------------------------------------------------------------
# stacked arithmetic


def matmul_array(ring: Ring, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Ring matrix product of stacks ``(..., n, k) @ (..., k, m)``."""
    k = a.shape[-1]
    if isinstance(ring, ZmRing) or (isinstance(ring, LocalRing) and isinstance(ring.kind, PrimePower)):
        m = ring.order
        if (m - 1) ** 2 * k < 1 << 62:
            return np.matmul(a, b) % m
    acc = ring.mul(a[..., :, 0, None], b[..., None, 0, :])
    for t in range(1, k):
        acc = ring.add(acc, ring.mul(a[..., :, t, None], b[..., None, t, :]))
    return np.asarray(acc, dtype=np.int64)


def det_array(ring: Ring, a: np.ndarray) -> np.ndarray:
    """Determinants of a stack of square matrices, division-free.

    Berkowitz's algorithm: the characteristic polynomial of the trailing
    principal submatrices is grown one row/column at a time by multiplying
    with a Toeplitz matrix built from ``a``, ``R M^k C``. Uses only ring
    addition, negation and multiplication.
    """
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[-1]
    if a.ndim < 2 or a.shape[-2] != n:
        raise DomainError(f"determinant needs square matrices, got shape {a.shape[-2:]}")
    batch = a.shape[:-2]
    one = np.ones(batch, dtype=np.int64)
    # coefficients of det(x I - T) for T = a[n-1:, n-1:], leading coefficient first
    coeffs = [one, np.asarray(ring.neg(a[..., n - 1, n - 1]), dtype=np.int64)]
    for i in range(n - 2, -1, -1):
        s = n - 1 - i
        diag = a[..., i, i]
        row = a[..., i, i + 1 :]
        col = a[..., i + 1 :, i]
        sub = a[..., i + 1 :, i + 1 :]
        toeplitz = [one, np.asarray(ring.neg(diag), dtype=np.int64)]
        v = col
        for _ in range(s):
            dot = ring.mul(row[..., 0], v[..., 0])
            for t in range(1, s):
                dot = ring.add(dot, ring.mul(row[..., t], v[..., t]))
            toeplitz.append(np.asarray(ring.neg(dot), dtype=np.int64))
            v = _matvec(ring, sub, v)
        new = []
        for j in range(s + 2):
            acc = np.zeros(batch, dtype=np.int64)
            for ell in range(max(0, j - s - 1), min(j, s) + 1):
                acc = ring.add(acc, ring.mul(toeplitz[j - ell], coeffs[ell]))
            new.append(np.asarray(acc, dtype=np.int64))
        coeffs = new
    det = coeffs[n]
    if n % 2:
        det = ring.neg(det)
    return np.asarray(det, dtype=np.int64)


def _matvec(ring: Ring, m: np.ndarray, v: np.ndarray) -> np.ndarray:
    acc = ring.mul(m[..., :, 0], v[..., 0, None])
    for t in range(1, m.shape[-1]):
        acc = ring.add(acc, ring.mul(m[..., :, t], v[..., t, None]))
    return np.asarray(acc, dtype=np.int64)


def residue_array(ring: Ring, a: np.ndarray):
    """Reduce entries to the residue field; returns ``(field, array)``.

    Defined for fields, local rings and prime-power moduli.
    """
    field = field_view(ring)
    if field is not None:
        return field, a
    if isinstance(ring, LocalRing):
        return ring.residue_field, ring.residue(a)
    if isinstance(ring, ZmRing) and len(ring.factorization.factors) == 1:
        p = ring.factorization.factors[0][0]
        return gf(p), a % p
    raise DomainError(f"{ring.label} is not local; it has no residue field")


def invertible_array(ring: Ring, a: np.ndarray, method: str = "det") -> np.ndarray:
    """Invertibility flags for a stack of square matrices.

    ``method="det"`` tests whether the determinant is a unit.
    ``method="residue"`` tests invertibility of the reduction modulo the
    maximal ideal (componentwise through the CRT for composite moduli).
    """
    a = np.asarray(a, dtype=np.int64)
    if method == "det":
        return np.asarray(ring.is_unit(det_array(ring, a)), dtype=bool)
    if method != "residue":
        raise DomainError(f"unknown invertibility method {method!r}")
    if isinstance(ring, ZmRing) and len(ring.factorization.factors) > 1:
        flags = np.ones(a.shape[:-2], dtype=bool)
        for n in ring.factorization.prime_powers:
            flags &= invertible_array(ZmRing(n), a % n, "residue")
        return flags
    field, res = residue_array(ring, a)
    return np.asarray(field.is_unit(det_array(field, res)), dtype=bool)


# ---------------------------------------------------------------------------
# single-matrix operations


def _same_ring(a: Matrix, b: Matrix) -> None:
    if a.ring != b.ring:
        raise DomainError(f"ring mismatch: {a.ring.label} vs {b.ring.label}")


def mat_arith(op: str, a: Matrix, b: Matrix) -> Matrix:
    _same_ring(a, b)
    ring = a.ring
    if op == "add":
        if a.shape != b.shape:
            raise DomainError(f"shape mismatch {a.shape} + {b.shape}")
        return Matrix(ring, ring.add(a.entries, b.entries), check=False)
    if op == "mul":
        if a.cols != b.rows:
            raise DomainError(f"shape mismatch {a.shape} @ {b.shape}")
        return Matrix(ring, matmul_array(ring, a.entries, b.entries), check=False)
    raise DomainError(f"unknown operation {op!r}")


def determinant(a: Matrix) -> int:
    if a.rows != a.cols:
        raise DomainError(f"determinant of a non-square {a.shape} matrix")
    return int(det_array(a.ring, a.entries))


def is_invertible(a: Matrix, method: str = "det") -> bool:
    """Whether ``a`` lies in GL_N of its ring.

    ``method="det"``: the determinant is a unit. ``method="residue"``: the
    reduction modulo the maximal ideal is invertible over the residue field.
    The two agree on every local ring and, through the CRT, on every Z/mZ.
    """
    if a.rows != a.cols:
        return False
    return bool(invertible_array(a.ring, a.entries, method))


def truncate(a: Matrix, s: int) -> Matrix:
    """Upper-left ``s x s`` corner."""
    if not 1 <= s <= min(a.rows, a.cols):
        raise DomainError(f"corner size {s} outside [1, {min(a.rows, a.cols)}]")
    return Matrix(a.ring, a.entries[:s, :s], check=False)


def rank_over_field(a: Matrix) -> int:
    """Row rank by Gaussian elimination; the ring must be a field."""
    field = field_view(a.ring)
    if field is None:
        raise DomainError(f"rank is only defined here over a field, not {a.ring.label}")
    return _rank(field, a.entries)


def _rank(field, entries: np.ndarray) -> int:
    m = np.array(entries, dtype=np.int64)
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        pivots = np.nonzero(m[rank:, c])[0]
        if pivots.size == 0:
            continue
        piv = rank + int(pivots[0])
        m[[rank, piv]] = m[[piv, rank]]
        m[rank] = field.mul(m[rank], field.inv(int(m[rank, c])))
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] = field.sub(m[r], field.mul(m[rank], int(m[r, c])))
        rank += 1
        if rank == rows:
            break
    return rank


def crt_split_matrix(a: Matrix) -> list[Matrix]:
    """Entrywise CRT decomposition into matrices over each Z/p^rZ."""
    if not isinstance(a.ring, ZmRing):
        raise DomainError(f"CRT split needs a Z/mZ matrix, got {a.ring.label}")
    return [Matrix(ZmRing(n), a.entries % n, check=False) for n in a.ring.factorization.prime_powers]


def crt_combine_matrix(parts: Sequence[Matrix], ring: ZmRing | None = None) -> Matrix:
    """Inverse of :func:`crt_split_matrix`."""
    if not parts:
        raise DomainError("nothing to combine")
    moduli = []
    for part in parts:
        if not isinstance(part.ring, ZmRing):
            raise DomainError(f"components must be Z/nZ matrices, got {part.ring.label}")
        moduli.append(part.ring.modulus)
    if ring is None:
        ring = ZmRing(int(np.prod(moduli)))
    if tuple(moduli) != factorize(ring.modulus).prime_powers:
        raise DomainError(f"component moduli {moduli} do not match the factorization of {ring.modulus}")
    shape = parts[0].shape
    if any(part.shape != shape for part in parts):
        raise DomainError("component shapes differ")
    return Matrix(ring, crt_combine([part.entries for part in parts], ring), check=False)
