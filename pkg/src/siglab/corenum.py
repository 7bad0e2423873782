"""Deterministic numeric and exact-arithmetic kernels.

Float comparisons default to 1e-9 absolute for matrix identities and 1e-12
for scalar special functions.  Determinants and ranks of integer matrices are
exact: singularity is an equality event, so no float path is allowed there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "torus_norm",
    "SvdResult",
    "SvdConvergenceError",
    "jacobi_svd",
    "batch_singular_values",
    "operator_norm",
    "exact_det",
    "exact_rank",
    "kernel_vector_exact",
    "cofactor_det",
    "std_normal_cdf",
    "std_normal_quantile",
    "gaussian_interval_mass",
    "GAUSS_SD",
    "QuadratureResult",
    "QuadratureError",
    "adaptive_quadrature",
    "tensor_tail_integral",
]

MATRIX_TOL = 1e-9
SCALAR_TOL = 1e-12

#: per-coordinate standard deviation of the Gaussian measure used throughout:
#: gamma_l is N(0, (2pi)^{-1} I), i.e. sd = (2pi)^{-1/2}.  The *standard*
#: normal Phi is a separate function; conversions are explicit at call sites.
GAUSS_SD = 1.0 / math.sqrt(2.0 * math.pi)


def torus_norm(x) -> float:
    """Euclidean distance from x to the nearest integer point.

    1-periodic per coordinate; bounded by min(||x||_2, sqrt(dim)/2).
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("torus_norm requires finite entries")
    frac = arr - np.rint(arr)
    return float(np.sqrt(np.sum(frac * frac)))


def torus_norm_sq_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise squared torus norm for a 2-D array (batch helper)."""
    frac = x - np.rint(x)
    return np.einsum("ij,ij->i", frac, frac)


# ---------------------------------------------------------------------------
# One-sided Jacobi SVD
# ---------------------------------------------------------------------------


class SvdConvergenceError(RuntimeError):
    """Raised when Jacobi sweeps fail to converge inside the sweep cap."""


@dataclass(frozen=True)
class SvdResult:
    singular_values: np.ndarray  # nonincreasing, >= 0
    u: np.ndarray  # orthonormal columns
    v: np.ndarray  # orthonormal columns
    tolerance: float

    def reconstruction_error(self, h: np.ndarray) -> float:
        approx = (self.u * self.singular_values) @ self.v.T
        return float(np.linalg.norm(approx - h))


_MAX_SWEEPS = 60
_ROT_TOL = 1e-13


def jacobi_svd(h, max_sweeps: int = _MAX_SWEEPS, tol: float = _ROT_TOL) -> SvdResult:
    """Thin SVD by one-sided Jacobi rotations.

    Convergence: every column pair has |<bp,bq>| <= tol * ||bp|| ||bq||.
    Raises SvdConvergenceError after max_sweeps (never returns silently).
    """
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.all(np.isfinite(h)):
        raise ValueError("svd requires finite entries")
    transposed = h.shape[0] < h.shape[1]
    b = (h.T if transposed else h).copy()
    m, n = b.shape
    v = np.eye(n)
    # columns below this squared norm are numerically null: rotating them
    # further only chases rounding noise and stalls convergence
    null2 = (1e-14 * np.linalg.norm(b)) ** 2
    converged = False
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = b[:, p] @ b[:, p]
                aqq = b[:, q] @ b[:, q]
                apq = b[:, p] @ b[:, q]
                scale = math.sqrt(app * aqq)
                if app <= null2 or aqq <= null2 or abs(apq) <= tol * scale:
                    continue
                off = max(off, abs(apq) / scale)
                theta = 0.5 * math.atan2(2.0 * apq, app - aqq)
                c, s = math.cos(theta), math.sin(theta)
                bp = c * b[:, p] + s * b[:, q]
                bq = -s * b[:, p] + c * b[:, q]
                b[:, p], b[:, q] = bp, bq
                vp = c * v[:, p] + s * v[:, q]
                vq = -s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = vp, vq
        if off == 0.0:
            converged = True
            break
    if not converged:
        raise SvdConvergenceError(f"no convergence in {max_sweeps} sweeps")
    sigma = np.linalg.norm(b, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    b = b[:, order]
    v = v[:, order]
    u = _normalise_with_completion(b, sigma)
    if transposed:
        u, v = v, u
    return SvdResult(singular_values=sigma, u=u, v=v, tolerance=MATRIX_TOL)


def _normalise_with_completion(b: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Columns b/sigma, with zero columns replaced by an orthonormal completion."""
    m, n = b.shape
    cutoff = (sigma[0] if n else 0.0) * 1e-14
    u = np.zeros((m, n))
    filled = []
    for j in range(n):
        if sigma[j] > cutoff and sigma[j] > 0:
            u[:, j] = b[:, j] / sigma[j]
            filled.append(j)
    for j in range(n):
        if sigma[j] <= cutoff or sigma[j] == 0:
            for cand in range(m):
                w = np.zeros(m)
                w[cand] = 1.0
                for i in filled:
                    w -= (u[:, i] @ w) * u[:, i]
                norm = np.linalg.norm(w)
                if norm > 0.5:  # candidate basis vector is far from the span
                    u[:, j] = w / norm
                    filled.append(j)
                    break
    return u


def _round_robin_pairs(n: int) -> list:
    """Tournament schedule: n-1 rounds of disjoint column pairs covering all."""
    arr = list(range(n))
    if n % 2:
        arr.append(-1)  # bye
    m = len(arr)
    rounds = []
    for _ in range(m - 1):
        pairs = [
            (min(arr[i], arr[m - 1 - i]), max(arr[i], arr[m - 1 - i]))
            for i in range(m // 2)
            if arr[i] != -1 and arr[m - 1 - i] != -1
        ]
        rounds.append(pairs)
        arr = [arr[0], arr[-1]] + arr[1:-1]
    return rounds


def batch_singular_values(
    hs: np.ndarray, max_sweeps: int = _MAX_SWEEPS, tol: float = _ROT_TOL
) -> np.ndarray:
    """Singular values for a stack of matrices (B, m, n), m >= n.

    Same one-sided Jacobi rotations as jacobi_svd, applied to every matrix in
    the stack simultaneously; each sweep runs a round-robin schedule so the
    disjoint pairs of a round rotate in one vectorised step.  Returns (B, n)
    nonincreasing values.
    """
    b = np.asarray(hs, dtype=np.float64)
    if b.ndim != 3:
        raise ValueError("expected a stack of matrices")
    from ._dets import jacobi_sigma_batch

    try:
        sig = jacobi_sigma_batch(b, tol, max_sweeps)
    except RuntimeError as exc:
        raise SvdConvergenceError(str(exc)) from exc
    if sig is not None:
        sig.sort(axis=1)
        return sig[:, ::-1]
    b = b.copy()
    _, m, n = b.shape
    if m < n:
        b = np.swapaxes(b, 1, 2).copy()
        m, n = n, m
    if n == 1:
        return np.linalg.norm(b, axis=1)
    null2 = ((1e-14 * np.linalg.norm(b, axis=(1, 2))) ** 2)[:, None]
    rounds = _round_robin_pairs(n)
    for _ in range(max_sweeps):
        dirty = False
        for pairs in rounds:
            pc = np.array([p for p, _ in pairs])
            qc = np.array([q for _, q in pairs])
            bp = b[:, :, pc]
            bq = b[:, :, qc]
            app = np.einsum("bik,bik->bk", bp, bp)
            aqq = np.einsum("bik,bik->bk", bq, bq)
            apq = np.einsum("bik,bik->bk", bp, bq)
            scale = np.sqrt(app * aqq)
            active = (np.abs(apq) > tol * scale) & (app > null2) & (aqq > null2)
            if not np.any(active):
                continue
            dirty = True
            theta = np.where(active, 0.5 * np.arctan2(2.0 * apq, app - aqq), 0.0)
            c = np.cos(theta)[:, None, :]
            s = np.sin(theta)[:, None, :]
            b[:, :, pc] = c * bp + s * bq
            b[:, :, qc] = -s * bp + c * bq
        if not dirty:
            sig = np.linalg.norm(b, axis=1)
            sig.sort(axis=1)
            return sig[:, ::-1]
    raise SvdConvergenceError(f"no convergence in {max_sweeps} sweeps (batched)")


def operator_norm(h) -> float:
    """sigma_1 via the Jacobi SVD (no separate power iteration)."""
    return float(jacobi_svd(h).singular_values[0])


# ---------------------------------------------------------------------------
# Exact integer linear algebra
# ---------------------------------------------------------------------------


def exact_det(a) -> int:
    """Determinant of an integer matrix by Bareiss fraction-free elimination.

    Arbitrary-precision: works on Python ints, bit-exact for any input.
    """
    rows = [[int(x) for x in row] for row in np.asarray(a)]
    n = len(rows)
    if n == 0 or len(rows[0]) != n:
        raise ValueError("exact_det requires a square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            for i in range(k + 1, n):
                if rows[i][k] != 0:
                    rows[k], rows[i] = rows[i], rows[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = rows[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                val = rows[i][j] * pivot - rows[i][k] * rows[k][j]
                q, r = divmod(val, prev)
                if r:  # Bareiss guarantees exact divisibility
                    raise AssertionError("fraction-free division failed")
                rows[i][j] = q
            rows[i][k] = 0
        prev = pivot
    return sign * rows[n - 1][n - 1]


def exact_rank(a) -> int:
    """Rank over the rationals via fraction-free elimination with full pivoting."""
    rows = [[int(x) for x in row] for row in np.asarray(a)]
    if not rows:
        return 0
    m, n = len(rows), len(rows[0])
    rank = 0
    prev = 1
    r = 0
    for c in range(n):
        pivot_row = None
        for i in range(r, m):
            if rows[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pivot = rows[r][c]
        for i in range(r + 1, m):
            for j in range(c + 1, n):
                val = rows[i][j] * pivot - rows[i][c] * rows[r][j]
                q, rem = divmod(val, prev)
                if rem:
                    raise AssertionError("fraction-free division failed")
                rows[i][j] = q
            rows[i][c] = 0
        prev = pivot
        rank += 1
        r += 1
        if r == m:
            break
    return rank


def kernel_vector_exact(a) -> list[int] | None:
    """An integer kernel vector of an integer matrix, or None if nonsingular.

    Exact rational RREF, then denominators cleared and the gcd divided out,
    so downstream atom counting runs on exact data.
    """
    mat = [[Fraction(int(x)) for x in row] for row in np.asarray(a)]
    if not mat:
        return None
    m, n = len(mat), len(mat[0])
    pivots = []
    r = 0
    for c in range(n):
        pivot_row = None
        for i in range(r, m):
            if mat[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        pv = mat[r][c]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(m):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    fc = free[0]
    vec = [Fraction(0)] * n
    vec[fc] = Fraction(1)
    for row_idx, pc in enumerate(pivots):
        vec[pc] = -mat[row_idx][fc]
    lcm = 1
    for x in vec:
        lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in vec]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    return [x // g for x in ints]


def cofactor_det(a) -> int:
    """Naive cofactor-expansion determinant; oracle for n <= 6."""
    m = [[int(x) for x in row] for row in np.asarray(a)]
    n = len(m)
    if n > 8:
        raise ValueError("cofactor oracle capped at n <= 8")
    return _cofactor(m)


def _cofactor(m) -> int:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = 0
    for j in range(n):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        total += (-1) ** j * m[0][j] * _cofactor(minor)
    return total


# ---------------------------------------------------------------------------
# Gaussian special functions and quadrature
# ---------------------------------------------------------------------------


def std_normal_cdf(x: float) -> float:
    """Phi(x) for the *standard* normal (variance 1)."""
    return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))


def std_normal_quantile(p: float) -> float:
    """Phi^{-1}; brings Borell-type statements into checkable form."""
    from scipy.special import ndtri

    return float(ndtri(p))


def gaussian_interval_mass(a: float, b: float, sd: float) -> float:
    """P(a <= X <= b) for X ~ N(0, sd^2); accepts infinite endpoints."""
    if sd <= 0:
        raise ValueError("sd must be positive")
    if a > b:
        raise ValueError("need a <= b")
    root2 = math.sqrt(2.0)
    lo = -1.0 if a == -math.inf else math.erf(a / (sd * root2))
    hi = 1.0 if b == math.inf else math.erf(b / (sd * root2))
    return 0.5 * (hi - lo)


class QuadratureError(RuntimeError):
    """Subdivision cap exceeded."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_bound: float
    evaluations: int


def adaptive_quadrature(
    f,
    a: float,
    b: float,
    tol: float = 1e-12,
    max_intervals: int = 200_000,
    initial_panels: int = 16,
) -> QuadratureResult:
    """Adaptive Simpson integration of f over [a, b].

    Deterministic for a fixed integrand; error estimated by Richardson
    extrapolation per interval.  The range is pre-split into initial_panels
    so an oscillation aligned with the first coarse rule cannot masquerade as
    converged.  Raises QuadratureError at the interval cap.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    evals = 0

    def ev(x):
        nonlocal evals
        evals += 1
        y = f(x)
        if not math.isfinite(y):
            raise ValueError(f"integrand not finite at {x}")
        return y

    panels = max(1, initial_panels)
    edges = [a + (b - a) * i / panels for i in range(panels + 1)]
    stack = []
    for x0, x1 in zip(edges[:-1], edges[1:]):
        f0, f1, f2 = ev(x0), ev(0.5 * (x0 + x1)), ev(x1)
        s = (x1 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)
        stack.append((x0, x1, f0, f1, f2, s, tol / panels))
    total = 0.0
    err = 0.0
    used = 0
    while stack:
        used += 1
        if used > max_intervals:
            raise QuadratureError("adaptive quadrature: subdivision cap exceeded")
        x0, x1, f0, f1, f2, s, budget = stack.pop()
        xm = 0.5 * (x0 + x1)
        fl = ev(0.5 * (x0 + xm))
        fr = ev(0.5 * (xm + x1))
        left = (xm - x0) / 6.0 * (f0 + 4.0 * fl + f1)
        right = (x1 - xm) / 6.0 * (f1 + 4.0 * fr + f2)
        delta = left + right - s
        if abs(delta) <= 15.0 * budget or (x1 - x0) < 1e-14 * (abs(x0) + abs(x1) + 1):
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
        else:
            stack.append((x0, xm, f0, fl, f1, left, budget / 2.0))
            stack.append((xm, x1, f1, fr, f2, right, budget / 2.0))
    return QuadratureResult(value=total, error_bound=max(err, 1e-16), evaluations=evals)


def tensor_tail_integral(k: int, tol: float = 1e-12) -> QuadratureResult:
    """int_{sqrt(k+1)}^inf (1 + 2u/sqrt(k+1))^(k+2) u e^{-2u^2} du.

    Truncated where the integrand is provably below e^{-U}; the analytic tail
    bound is folded into error_bound.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    root = math.sqrt(k + 1.0)

    def integrand(u: float) -> float:
        # evaluate in log space: the polynomial factor overflows for large k
        lg = (k + 2) * math.log1p(2.0 * u / root) + math.log(u) - 2.0 * u * u
        return math.exp(lg) if lg > -745 else 0.0

    upper = max(3.0 * root, root + 12.0)
    # For u >= upper: log integrand <= (k+2)*2u/root + log u - 2u^2 <= -u,
    # since 2u^2 - 2(k+2)u/root - log(u) >= u for u >= 3 sqrt(k+1) + 12.
    tail = math.exp(-upper)
    res = adaptive_quadrature(integrand, root, upper, tol=tol)
    return QuadratureResult(
        value=res.value,
        error_bound=res.error_bound + tail,
        evaluations=res.evaluations,
    )
