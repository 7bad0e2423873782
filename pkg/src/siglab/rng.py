"""Seeded, reproducible samplers.

Every random object in the package is drawn through a counter-based Philox
generator keyed by ``(master_seed, stream_label)``.  A draw is a pure function
of the seed spec, the chunk index and the position within the chunk, so any
number of workers can consume disjoint chunks and reassemble bit-identical
results in any order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

__all__ = [
    "SeedSpec",
    "Stream",
    "Box",
    "LazyVector",
    "SignSymMatrix",
    "ZeroedMatrix",
    "OrthoFrame",
    "sample_lazy_vector",
    "sample_sign_sym",
    "sample_zeroed_matrix",
    "sample_box_uniform",
    "sample_ortho_frame",
]

_U64 = 1 << 64
_INV53 = 2.0 ** -53


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a short label naming the logical stream."""

    master_seed: int
    stream_label: str = "main"

    def child(self, label: str) -> "SeedSpec":
        """Derive an independent substream; '/' separates nesting levels."""
        return replace(self, stream_label=f"{self.stream_label}/{label}")

    def key(self) -> np.ndarray:
        """128-bit Philox key derived by hashing (master_seed, stream_label)."""
        h = hashlib.blake2b(digest_size=16)
        h.update(int(self.master_seed).to_bytes(8, "little", signed=False))
        h.update(self.stream_label.encode("utf-8"))
        raw = h.digest()
        return np.frombuffer(raw, dtype=np.uint64).copy()

    def __str__(self) -> str:  # embedded in result records
        return f"{self.master_seed}:{self.stream_label}"

    @staticmethod
    def parse(text: str) -> "SeedSpec":
        seed, _, label = text.partition(":")
        return SeedSpec(int(seed), label or "main")


def _lazy_thresholds(mu: float) -> tuple[int, int]:
    # Exact rational thresholds: entry is 0 for u < t_zero, +1 for u < t_plus.
    # mu is a binary float, so (1-mu)*2^64 is an exact integer for dyadic mu;
    # otherwise the per-entry law is off by < 2^-64, which we document.
    t_zero = int((1 - Fraction(mu)) * _U64)
    half = _U64 - t_zero
    t_plus = t_zero + (half - half // 2)
    return t_zero, t_plus


class Stream:
    """Sequential draw interface over one Philox chunk.

    ``Stream(spec, chunk)`` always yields the same sequence; distinct chunk
    indices never overlap (the chunk index is placed in a high counter word).
    """

    def __init__(self, spec: SeedSpec, chunk: int = 0):
        self.spec = spec
        self.chunk = chunk
        self._bg = np.random.Philox(counter=[0, 0, int(chunk), 0], key=spec.key())

    def raw(self, n: int) -> np.ndarray:
        """n raw uint64 draws."""
        return self._bg.random_raw(int(n))

    def uniform(self, n: int) -> np.ndarray:
        """Uniforms in (0,1) built from the top 53 bits of a raw draw."""
        return ((self.raw(n) >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53

    def normals(self, n: int) -> np.ndarray:
        """Standard normals via Box-Muller on raw uniforms."""
        m = (int(n) + 1) // 2
        u1 = self.uniform(m)
        u2 = self.uniform(m)
        r = np.sqrt(-2.0 * np.log(u1))
        ang = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(ang), r * np.sin(ang)])
        return z[: int(n)]

    def signs(self, n: int) -> np.ndarray:
        """Uniform +-1 entries."""
        return np.where(self.raw(n) >> np.uint64(63) == 0, 1, -1).astype(np.int8)

    def lazy(self, n: int, mu: float) -> np.ndarray:
        """mu-lazy entries in {-1,0,1}: P(0)=1-mu, P(+-1)=mu/2 each."""
        if not 0.0 < mu <= 1.0:
            raise ValueError(f"mu must be in (0,1], got {mu}")
        t_zero, t_plus = _lazy_thresholds(mu)
        u = self.raw(n)
        out = np.zeros(int(n), dtype=np.int8)
        nz = u >= np.uint64(t_zero)
        if t_plus >= _U64:
            out[nz] = 1
        else:
            out[nz] = np.where(u[nz] < np.uint64(t_plus), 1, -1)
        return out

    def integers(self, n: int, m: int) -> np.ndarray:
        """Uniform integers in [0, m) from the top 53 bits (bias < m * 2^-53)."""
        if m <= 0:
            raise ValueError("m must be positive")
        top = (self.raw(n) >> np.uint64(11)).astype(np.float64)
        return np.minimum((top * (m * _INV53)).astype(np.int64), m - 1)

    def big_integer(self, total: int) -> int:
        """Uniform integer in [0, total) for arbitrary-precision totals."""
        limbs = (total.bit_length() + 63) // 64 + 1
        acc = 0
        for w in self.raw(limbs).tolist():
            acc = (acc << 64) | int(w)
        return acc % total  # modulo bias < total / 2^(64*limbs) <= 2^-64


# ---------------------------------------------------------------------------
# Sampled objects
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LazyVector:
    entries: np.ndarray
    mu: float


@dataclass(frozen=True)
class SignSymMatrix:
    """Symmetric n x n matrix with +-1 entries, stored dense."""

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ZeroedMatrix:
    """Block matrix M = [[0, H1^T], [H1, 0]] with mu-lazy H1 of shape (n-d, d)."""

    n: int
    d: int
    h1: np.ndarray
    mu: float

    def assemble(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[: self.d, self.d :] = self.h1.T
        m[self.d :, : self.d] = self.h1
        return m

    def apply(self, v: np.ndarray) -> np.ndarray:
        """M v without materialising M."""
        top = self.h1.T @ v[self.d :]
        bot = self.h1 @ v[: self.d]
        return np.concatenate([top, bot])


@dataclass(frozen=True)
class Box:
    """Product of integer-interval unions; flat two-sided annulus on [d_flat].

    Each coordinate set is a tuple of inclusive integer intervals (lo, hi).
    """

    d_flat: int
    N: int
    kappa: float
    coord_sets: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("box scale N must be >= 2")
        if self.kappa < 2:
            raise ValueError("box aspect kappa must be >= 2")
        for sets in self.coord_sets:
            if sum(hi - lo + 1 for lo, hi in sets) < self.N:
                raise ValueError("every coordinate set must have >= N points")

    @property
    def dim(self) -> int:
        return len(self.coord_sets)

    def coord_size(self, i: int) -> int:
        return sum(hi - lo + 1 for lo, hi in self.coord_sets[i])

    def contains(self, point) -> bool:
        pt = np.asarray(point).ravel()
        if pt.size != self.dim:
            return False
        for i, x in enumerate(pt):
            if not any(lo <= x <= hi for lo, hi in self.coord_sets[i]):
                return False
        return True

    def size(self) -> int:
        total = 1
        for i in range(self.dim):
            total *= self.coord_size(i)
        return total

    @staticmethod
    def flat(d: int, N: int, kappa: float) -> "Box":
        """The box ([-kappa N, -N] u [N, kappa N])^d."""
        hi = int(np.floor(kappa * N))
        sets = tuple(((-hi, -N), (N, hi)) for _ in range(d))
        return Box(d_flat=d, N=N, kappa=kappa, coord_sets=sets)


@dataclass(frozen=True)
class OrthoFrame:
    """2d x k matrix with orthonormal columns."""

    matrix: np.ndarray

    def __post_init__(self):
        g = self.matrix.T @ self.matrix
        if np.max(np.abs(g - np.eye(self.matrix.shape[1]))) > 1e-10:
            raise ValueError("columns are not orthonormal within 1e-10")


def sample_lazy_vector(m: int, mu: float, seed: SeedSpec) -> LazyVector:
    """m-dimensional mu-lazy random vector."""
    return LazyVector(entries=Stream(seed).lazy(m, mu), mu=mu)


def sample_sign_sym(n: int, seed: SeedSpec) -> SignSymMatrix:
    """Uniform symmetric +-1 matrix: n(n+1)/2 independent upper-triangle signs."""
    if n < 1:
        raise ValueError("n must be >= 1")
    s = Stream(seed).signs(n * (n + 1) // 2)
    m = np.zeros((n, n), dtype=np.int8)
    iu = np.triu_indices(n)
    m[iu] = s
    m.T[iu] = s
    return SignSymMatrix(matrix=m)


def sample_zeroed_matrix(n: int, d: int, mu: float, seed: SeedSpec) -> ZeroedMatrix:
    if not 1 <= d < n:
        raise ValueError(f"need 1 <= d < n, got d={d}, n={n}")
    h1 = Stream(seed).lazy((n - d) * d, mu).reshape(n - d, d).astype(np.float64)
    return ZeroedMatrix(n=n, d=d, h1=h1, mu=mu)


def sample_box_uniform(box: Box, seed: SeedSpec) -> np.ndarray:
    """One uniform point of the box; coordinates independent."""
    stream = Stream(seed)
    return _box_points(box, stream, 1)[0]


def _box_points(box: Box, stream: Stream, count: int) -> np.ndarray:
    """count uniform points (count x dim), consuming one draw per coordinate."""
    out = np.empty((count, box.dim), dtype=np.int64)
    for i in range(box.dim):
        sizes = [hi - lo + 1 for lo, hi in box.coord_sets[i]]
        idx = stream.integers(count, sum(sizes))
        vals = np.concatenate(
            [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in box.coord_sets[i]]
        )
        out[:, i] = vals[idx]
    return out


def sample_ortho_frame(two_d: int, k: int, seed: SeedSpec) -> OrthoFrame:
    """Orthonormal columns from Gaussian entries via modified Gram-Schmidt.

    One re-orthogonalisation pass; resamples on (measure-zero) rank failure.
    """
    if k > two_d:
        raise ValueError("need k <= 2d")
    stream = Stream(seed)
    for _ in range(16):
        g = stream.normals(two_d * k).reshape(two_d, k)
        q = _mgs(g)
        if q is not None:
            return OrthoFrame(matrix=q)
    raise RuntimeError("orthonormalisation failed repeatedly")  # pragma: no cover


def _mgs(g: np.ndarray) -> np.ndarray | None:
    q = g.astype(np.float64).copy()
    k = q.shape[1]
    for _pass in range(2):
        for j in range(k):
            for i in range(j):
                q[:, j] -= (q[:, i] @ q[:, j]) * q[:, i]
            norm = np.linalg.norm(q[:, j])
            if norm < 1e-12:
                return None
            q[:, j] /= norm
    return q
