"""Compiled fast paths: int64 determinants/ranks and Jacobi sweeps.

Bareiss intermediates are minors of the input, so for an n x n matrix with
entries bounded by B every intermediate is bounded by (B sqrt(n))^n (Hadamard).
The fast path is only taken when that bound fits in int64; otherwise callers
fall back to the arbitrary-precision routine in corenum.  Compiled with numba
when available, with a pure-python fallback.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "hadamard_fits_int64",
    "det_int64",
    "rank_int64",
    "det_batch",
    "rank_batch",
    "jacobi_sigma_batch",
]

_INT64_MAX = float(2**62)  # one guard bit under the true limit


def hadamard_fits_int64(n: int, max_abs: int) -> bool:
    if n == 0:
        return True
    bound = n * (0.5 * math.log(n) + math.log(max(max_abs, 1)))
    return bound < math.log(_INT64_MAX)


def _det_int64_py(m):
    a = [row[:] for row in m]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def _rank_int64_py(m):
    a = [row[:] for row in m]
    if not a:
        return 0
    rows, cols = len(a), len(a[0])
    prev = 1
    r = 0
    for c in range(cols):
        piv = -1
        for i in range(r, rows):
            if a[i][c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        a[r], a[piv] = a[piv], a[r]
        pivot = a[r][c]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                a[i][j] = (a[i][j] * pivot - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = pivot
        r += 1
        if r == rows:
            break
    return r


try:  # pragma: no cover - exercised implicitly
    import numba

    @numba.njit(cache=True, nogil=True)
    def _det_kernel(a):
        n = a.shape[0]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k, k] == 0:
                found = False
                for i in range(k + 1, n):
                    if a[i, k] != 0:
                        for j in range(n):
                            tmp = a[k, j]
                            a[k, j] = a[i, j]
                            a[i, j] = tmp
                        sign = -sign
                        found = True
                        break
                if not found:
                    return 0
            pivot = a[k, k]
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i, j] = (a[i, j] * pivot - a[i, k] * a[k, j]) // prev
                a[i, k] = 0
            prev = pivot
        return sign * a[n - 1, n - 1]

    @numba.njit(cache=True, nogil=True)
    def _rank_kernel(a):
        rows = a.shape[0]
        cols = a.shape[1]
        prev = 1
        r = 0
        for c in range(cols):
            piv = -1
            for i in range(r, rows):
                if a[i, c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for j in range(cols):
                    tmp = a[r, j]
                    a[r, j] = a[piv, j]
                    a[piv, j] = tmp
            pivot = a[r, c]
            for i in range(r + 1, rows):
                for j in range(c + 1, cols):
                    a[i, j] = (a[i, j] * pivot - a[i, c] * a[r, j]) // prev
                a[i, c] = 0
            prev = pivot
            r += 1
            if r == rows:
                break
        return r

    @numba.njit(cache=True, nogil=True)
    def _det_batch_kernel(stack, out):
        for b in range(stack.shape[0]):
            out[b] = _det_kernel(stack[b])

    @numba.njit(cache=True, nogil=True)
    def _rank_batch_kernel(stack, out):
        for b in range(stack.shape[0]):
            out[b] = _rank_kernel(stack[b])

    @numba.njit(cache=True, nogil=True)
    def _jacobi_sweeps(a, tol, max_sweeps):
        # one-sided Jacobi on an (m, n) matrix in place, m >= n; returns 0 on
        # convergence.  Columns below 1e-14 * ||A||_HS are numerically null.
        m, n = a.shape
        hs2 = 0.0
        for i in range(m):
            for j in range(n):
                hs2 += a[i, j] * a[i, j]
        null2 = 1e-28 * hs2
        for _ in range(max_sweeps):
            dirty = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    app = 0.0
                    aqq = 0.0
                    apq = 0.0
                    for i in range(m):
                        app += a[i, p] * a[i, p]
                        aqq += a[i, q] * a[i, q]
                        apq += a[i, p] * a[i, q]
                    if app <= null2 or aqq <= null2:
                        continue
                    if abs(apq) <= tol * math.sqrt(app * aqq):
                        continue
                    dirty = True
                    theta = 0.5 * math.atan2(2.0 * apq, app - aqq)
                    c = math.cos(theta)
                    s = math.sin(theta)
                    for i in range(m):
                        t1 = c * a[i, p] + s * a[i, q]
                        t2 = -s * a[i, p] + c * a[i, q]
                        a[i, p] = t1
                        a[i, q] = t2
            if not dirty:
                return 0
        return 1

    @numba.njit(cache=True, nogil=True)
    def _jacobi_sigma_batch_kernel(stack, out, tol, max_sweeps):
        for b in range(stack.shape[0]):
            if _jacobi_sweeps(stack[b], tol, max_sweeps):
                return 1
            m, n = stack[b].shape
            for j in range(n):
                acc = 0.0
                for i in range(m):
                    acc += stack[b][i, j] * stack[b][i, j]
                out[b, j] = math.sqrt(acc)
        return 0

    _HAVE_NUMBA = True
except Exception:  # pragma: no cover
    _HAVE_NUMBA = False


def det_int64(a: np.ndarray) -> int:
    """Exact determinant; caller must have checked hadamard_fits_int64."""
    m = np.array(a, dtype=np.int64)
    if _HAVE_NUMBA:
        return int(_det_kernel(m))
    return int(_det_int64_py(m.tolist()))


def rank_int64(a: np.ndarray) -> int:
    m = np.array(a, dtype=np.int64)
    if _HAVE_NUMBA:
        return int(_rank_kernel(m))
    return int(_rank_int64_py(m.tolist()))


def det_batch(stack: np.ndarray) -> np.ndarray:
    """Determinants of a (B, n, n) int64 stack (consumed destructively)."""
    work = np.array(stack, dtype=np.int64)
    out = np.empty(work.shape[0], dtype=np.int64)
    if _HAVE_NUMBA:
        _det_batch_kernel(work, out)
        return out
    for b in range(work.shape[0]):
        out[b] = _det_int64_py(work[b].tolist())
    return out


def rank_batch(stack: np.ndarray) -> np.ndarray:
    work = np.array(stack, dtype=np.int64)
    out = np.empty(work.shape[0], dtype=np.int64)
    if _HAVE_NUMBA:
        _rank_batch_kernel(work, out)
        return out
    for b in range(work.shape[0]):
        out[b] = _rank_int64_py(work[b].tolist())
    return out


def jacobi_sigma_batch(stack: np.ndarray, tol: float, max_sweeps: int):
    """Unsorted column norms after one-sided Jacobi sweeps, or None when the
    compiled kernel is unavailable.  Raises on non-convergence."""
    if not _HAVE_NUMBA:
        return None
    work = np.array(stack, dtype=np.float64)
    if work.shape[1] < work.shape[2]:
        work = np.ascontiguousarray(np.swapaxes(work, 1, 2))
    out = np.empty((work.shape[0], work.shape[2]), dtype=np.float64)
    if _jacobi_sigma_batch_kernel(work, out, tol, max_sweeps):
        raise RuntimeError("jacobi kernel failed to converge")
    return out
