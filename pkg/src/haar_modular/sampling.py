"""Exact Haar samplers for GL_N over finite fields, Z/mZ and local rings.

All samplers draw from an :class:`RngStream`. Bounded integers come from
numpy's ``Generator.integers``, which uses rejection (Lemire's method) and
is therefore free of modulo bias.

The building block is the row chain over a field: row ``k+1`` is a uniform
vector outside the span of rows ``1..k``. Stopping the chain after ``S``
rows gives the exact law of the first ``S`` rows of a Haar matrix, which is
all a corner ``X[S]`` depends on, so corner batches never materialise the
full ``N x N`` matrices.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import IO, Iterator

import numpy as np

from .errors import DomainError, FormatError, PreconditionError, SamplingFailure
from .matrices import Matrix, det_array, invertible_array
from .rings import FqField, LocalRing, PrimePower, Ring, ZmRing, crt_combine, field_view, gf, ring_from_dict

RNG_ALGORITHM = "numpy.PCG64/SeedSequence"
RNG_VERSION = "haar-modular-rng-1"

# draws per chunk when streaming corners; part of the reproducibility contract
CHUNK = 1 << 15


class RngStream:
    """Seedable, splittable random stream.

    A stream is identified by ``(seed, path)``; ``split(label)`` appends a
    hash of ``label`` to the path, so children are deterministic in the
    parent identity and the label and never share state with the parent.
    """

    algorithm = RNG_ALGORITHM
    version = RNG_VERSION

    def __init__(self, seed: int = 0, path: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed < 1 << 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.path = tuple(path)
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=self.path)))
        self.position = 0

    def split(self, label: str) -> "RngStream":
        digest = hashlib.sha256(str(label).encode("utf-8")).digest()
        return RngStream(self.seed, self.path + (int.from_bytes(digest[:8], "big"),))

    def integers(self, high: int, size=None) -> np.ndarray:
        """Uniform integers in ``[0, high)``."""
        out = self._gen.integers(0, high, size=size, dtype=np.int64)
        self.position += int(np.size(out))
        return out

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={self.path}, position={self.position})"


def as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(0)
    return RngStream(int(rng))


# ---------------------------------------------------------------------------
# array kernels


def _ideal_step(ring: Ring) -> tuple[int, int]:
    """Maximal ideal as ``{step * j : 0 <= j < count}``."""
    if isinstance(ring, LocalRing):
        return ring.q, ring.ideal_size
    if isinstance(ring, ZmRing) and len(ring.factorization.factors) == 1:
        p = ring.factorization.factors[0][0]
        return p, ring.modulus // p
    if isinstance(ring, FqField):
        return 1, 1
    raise DomainError(f"{ring.label} is not local; it has no maximal ideal to sample from")


def _ideal_uniform(ring: Ring, rng: RngStream, shape) -> np.ndarray:
    step, count = _ideal_step(ring)
    if count == 1:
        return np.zeros(shape, dtype=np.int64)
    return step * rng.integers(count, shape)


def chain_rows(fld: FqField, k: int, n: int, rng: RngStream, count: int) -> np.ndarray:
    """``count`` uniform ``k``-tuples of independent vectors in F_q^n.

    Returns shape ``(count, k, n)``. Each candidate row is reduced against an
    echelon basis of the rows accepted so far and rejected if it reduces to
    zero. Rejected draws are redrawn, so every accepted row is uniform on
    the complement of the current span.
    """
    if k > n:
        raise DomainError(f"cannot choose {k} independent vectors in dimension {n}")
    q = fld.q
    out = np.empty((count, k, n), dtype=np.int64)
    basis = np.zeros((count, k, n), dtype=np.int64)
    pivots = np.zeros((count, k), dtype=np.int64)
    for row in range(k):
        pending = np.arange(count)
        while pending.size:
            cand = rng.integers(q, (pending.size, n))
            red = cand
            sel = np.arange(pending.size)
            for i in range(row):
                coef = red[sel, pivots[pending, i]]
                red = np.asarray(fld.sub(red, fld.mul(coef[:, None], basis[pending, i])), dtype=np.int64)
            nonzero = red != 0
            ok = nonzero.any(axis=1)
            done = pending[ok]
            out[done, row] = cand[ok]
            red_ok = red[ok]
            first = nonzero[ok].argmax(axis=1)
            lead = red_ok[np.arange(red_ok.shape[0]), first]
            basis[done, row] = fld.mul(red_ok, np.asarray(fld.inv(lead))[:, None])
            pivots[done, row] = first
            pending = pending[~ok]
    return out


def _lift_array(residue: np.ndarray, p: int, r: int, rng: RngStream) -> np.ndarray:
    if r == 1:
        return residue.copy()
    return residue + p * rng.integers(p ** (r - 1), residue.shape)


def haar_rows(ring: Ring, k: int, n: int, cols: int, rng: RngStream, count: int) -> np.ndarray:
    """First ``k`` rows, first ``cols`` columns of ``count`` Haar draws in GL_n(ring).

    Shape ``(count, k, cols)``. With ``k == cols == n`` these are full Haar
    matrices.
    """
    if isinstance(ring, FqField):
        return chain_rows(ring, k, n, rng, count)[:, :, :cols]
    if isinstance(ring, ZmRing):
        parts = []
        for p, r in ring.factorization.factors:
            residue = chain_rows(gf(p), k, n, rng, count)[:, :, :cols]
            parts.append(_lift_array(residue, p, r, rng))
        if len(parts) == 1:
            return parts[0]
        return np.asarray(crt_combine(parts, ring), dtype=np.int64)
    if isinstance(ring, LocalRing):
        z = ring.lift_residue(chain_rows(ring.residue_field, k, n, rng, count)[:, :, :cols])
        u = _ideal_uniform(ring, rng, z.shape)
        return np.asarray(ring.add(z, u), dtype=np.int64)
    raise DomainError(f"no Haar sampler for {ring!r}")


def _finish(ring: Ring, arr: np.ndarray, size):
    if size is None:
        return Matrix(ring, arr[0], check=False)
    return arr


# ---------------------------------------------------------------------------
# public samplers


def sample_uniform_matrix(ring: Ring, rows: int, cols: int, rng, *, ideal: bool = False, size=None):
    """Entrywise uniform matrix over ``ring`` (or over its maximal ideal).

    Returns a :class:`Matrix`, or an array of shape ``(size, rows, cols)``
    when ``size`` is given.
    """
    rng = as_stream(rng)
    shape = (1 if size is None else size, rows, cols)
    arr = _ideal_uniform(ring, rng, shape) if ideal else rng.integers(ring.order, shape)
    return _finish(ring, arr, size)


def sample_gl_field_chain(fld: Ring, n: int, rng, *, size=None):
    """Haar (uniform) element of GL_n(F_q) by the row chain."""
    rng = as_stream(rng)
    f = field_view(fld)
    if f is None:
        raise DomainError(f"{fld.label} is not a field")
    return _finish(fld, chain_rows(f, n, n, rng, 1 if size is None else size), size)


def sample_gl_field_reject(fld: Ring, n: int, rng, *, size=None, max_tries: int = 10**6, return_attempts: bool = False):
    """Uniform element of GL_n(F_q): uniform matrices until the determinant is nonzero.

    Independent of the row chain (it tests the Berkowitz determinant, not a
    span), so it serves as a distributional oracle for it.
    """
    rng = as_stream(rng)
    f = field_view(fld)
    if f is None:
        raise DomainError(f"{fld.label} is not a field")
    count = 1 if size is None else size
    out = np.empty((count, n, n), dtype=np.int64)
    pending = np.arange(count)
    attempts = 0
    rounds = 0
    while pending.size:
        if rounds >= max_tries:
            raise SamplingFailure(f"no invertible matrix after {max_tries} attempts")
        cand = rng.integers(f.q, (pending.size, n, n))
        attempts += pending.size
        ok = det_array(f, cand) != 0
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
        rounds += 1
    res = _finish(fld, out, size)
    return (res, attempts) if return_attempts else res


def lift_to_prime_power(residue: Matrix, r: int, rng, *, size=None):
    """Lift an invertible matrix over F_p to GL_N(Z/p^rZ).

    Adds an entrywise uniform element of ``pZ/p^rZ``. Applied to a Haar
    draw from GL_N(F_p) the result is Haar on GL_N(Z/p^rZ).
    """
    rng = as_stream(rng)
    f = field_view(residue.ring)
    if f is None or f.n != 1:
        raise PreconditionError(f"residue must be over a prime field, got {residue.ring.label}")
    if r < 1:
        raise DomainError("exponent must be >= 1")
    if residue.rows != residue.cols or not invertible_array(f, residue.entries):
        raise PreconditionError("residue matrix is not invertible over F_p")
    p = f.p
    base = np.broadcast_to(residue.entries, (1 if size is None else size,) + residue.shape)
    return _finish(ZmRing(p**r), _lift_array(np.array(base), p, r, rng), size)


def sample_gl_prime_power(p: int, r: int, n: int, rng, *, size=None):
    """Haar draw from GL_n(Z/p^rZ): chain over F_p, then the ideal lift."""
    rng = as_stream(rng)
    count = 1 if size is None else size
    residue = chain_rows(gf(p), n, n, rng, count)
    return _finish(ZmRing(p**r), _lift_array(residue, p, r, rng), size)


def sample_gl_zm(ring: ZmRing, n: int, rng, *, size=None):
    """Haar draw from GL_n(Z/mZ).

    One independent draw per prime power ``p^r || m`` (chain sampler plus
    lift), recombined entrywise with the CRT.
    """
    rng = as_stream(rng)
    if not isinstance(ring, ZmRing):
        raise DomainError(f"expected a Z/mZ ring, got {ring.label}")
    return _finish(ring, haar_rows(ring, n, n, n, rng, 1 if size is None else size), size)


def sample_gl_local(ring: LocalRing, n: int, rng, *, size=None):
    """Haar draw from GL_n(A) for a finite local ring A.

    ``Z + U`` with ``Z`` uniform among invertible matrices with entries in
    the residue representatives and ``U`` entrywise uniform over the
    maximal ideal.
    """
    rng = as_stream(rng)
    if not isinstance(ring, LocalRing):
        raise DomainError(f"expected a local ring, got {ring.label}")
    return _finish(ring, haar_rows(ring, n, n, n, rng, 1 if size is None else size), size)


def sample_gl(ring: Ring, n: int, rng, *, size=None):
    """Haar draw from GL_n(ring) for any supported ring."""
    rng = as_stream(rng)
    return _finish(ring, haar_rows(ring, n, n, n, rng, 1 if size is None else size), size)


# ---------------------------------------------------------------------------
# deliberately wrong samplers, used as negative controls


def sample_nonzero_det(ring: Ring, n: int, rng, *, size: int):
    """Uniform matrices conditioned on ``det != 0`` instead of ``det`` a unit.

    Over a ring that is not a field this accepts singular matrices.
    """
    rng = as_stream(rng)
    out = np.empty((size, n, n), dtype=np.int64)
    pending = np.arange(size)
    while pending.size:
        cand = rng.integers(ring.order, (pending.size, n, n))
        ok = det_array(ring, cand) != 0
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
    return out


def sample_chain_without_span_check(fld: Ring, n: int, rng, *, size: int):
    """Row chain that only rejects zero rows, skipping the span test."""
    rng = as_stream(rng)
    f = field_view(fld)
    out = np.empty((size, n, n), dtype=np.int64)
    for row in range(n):
        pending = np.arange(size)
        while pending.size:
            cand = rng.integers(f.q, (pending.size, n))
            ok = (cand != 0).any(axis=1)
            out[pending[ok], row] = cand[ok]
            pending = pending[~ok]
    return out


# ---------------------------------------------------------------------------
# corner batches


@dataclass
class SampleBatch:
    """Upper-left ``S x S`` corners of independent Haar draws from GL_N(ring)."""

    ring: Ring
    N: int
    S: int
    corners: np.ndarray
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.corners, dtype=np.int64)
        if c.ndim != 3 or c.shape[1:] != (self.S, self.S):
            raise FormatError(f"corners must have shape (count, {self.S}, {self.S}), got {c.shape}")
        self.ring.check(c)
        self.corners = c

    def __len__(self) -> int:
        return self.corners.shape[0]

    def matrices(self) -> Iterator[Matrix]:
        for c in self.corners:
            yield Matrix(self.ring, c, check=False)

    def header(self) -> dict:
        return {
            "ring": self.ring.to_dict(),
            "N": self.N,
            "S": self.S,
            "seed": self.seed,
            "rng_version": RNG_VERSION,
            "rng_algorithm": RNG_ALGORITHM,
            "count": len(self),
            **self.meta,
        }

    def write_jsonl(self, fh: IO[str]) -> None:
        fh.write(json.dumps(self.header(), separators=(",", ":")) + "\n")
        for c in self.corners.reshape(len(self), -1):
            fh.write('{"entries":[' + ",".join(map(str, c.tolist())) + "]}\n")

    def dumps(self) -> str:
        buf = io.StringIO()
        self.write_jsonl(buf)
        return buf.getvalue()

    @classmethod
    def read_jsonl(cls, fh: IO[str]) -> "SampleBatch":
        lines = [ln for ln in fh if ln.strip()]
        if not lines:
            raise FormatError("empty sample file")
        try:
            head = json.loads(lines[0])
            ring = ring_from_dict(head["ring"])
            n, s, seed = int(head["N"]), int(head["S"]), int(head["seed"])
            rows = [json.loads(ln)["entries"] for ln in lines[1:]]
        except (KeyError, ValueError, TypeError) as exc:
            raise FormatError(f"malformed sample file: {exc}") from exc
        if any(len(r) != s * s for r in rows):
            raise FormatError(f"every record must hold {s * s} entries")
        if int(head.get("count", len(rows))) != len(rows):
            raise FormatError(f"header announces {head['count']} records, found {len(rows)}")
        meta = {k: v for k, v in head.items() if k not in {"ring", "N", "S", "seed", "rng_version", "rng_algorithm", "count"}}
        corners = np.array(rows, dtype=np.int64).reshape(len(rows), s, s)
        try:
            return cls(ring, n, s, corners, seed, meta)
        except DomainError as exc:
            raise FormatError(f"malformed sample file: {exc}") from exc


def sample_truncated(ring: Ring, n: int, s: int, count: int, rng) -> SampleBatch:
    """``count`` corners ``X[s]`` of independent Haar draws ``X`` in GL_n(ring).

    Memory is ``O(CHUNK * s * n)`` regardless of ``count``.
    """
    rng = as_stream(rng)
    if not 1 <= s <= n:
        raise DomainError(f"corner size {s} must satisfy 1 <= S <= N = {n}")
    if count < 1:
        raise DomainError("count must be >= 1")
    out = np.empty((count, s, s), dtype=np.int64)
    for start in range(0, count, CHUNK):
        stop = min(count, start + CHUNK)
        out[start:stop] = haar_rows(ring, s, n, s, rng, stop - start)
    return SampleBatch(ring, n, s, out, rng.seed, {"sampler": "haar"})
