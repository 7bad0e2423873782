"""Characteristic functions, level sets and Gaussian geometry.

Gaussian convention, fixed once: gamma_l is the law of N(0, (2pi)^{-1} I_l),
i.e. coordinate sd GAUSS_SD = (2pi)^{-1/2}.  The standard normal Phi used in
the Brunn-Minkowski consequence is a separate function; conversions between
the two are explicit at call sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corenum import (
    GAUSS_SD,
    adaptive_quadrature,
    gaussian_interval_mass,
    std_normal_cdf,
    std_normal_quantile,
    torus_norm,
    torus_norm_sq_rows,
)
from .mc import CI_LEVEL, McEstimate, clopper_pearson, mc_event_count, run_chunked
from .reports import HOLDS, INCONCLUSIVE, LemmaReport, VACUOUS, VIOLATED
from .rng import SeedSpec, Stream

__all__ = [
    "CharFnSpec",
    "char_fn_eval",
    "lazy_walk_char",
    "psi_char",
    "chi_char",
    "LevelSetSpec",
    "Cylinder",
    "BoxUnion",
    "verify_cos_phi_bounds",
    "verify_fourier_inversion",
    "gaussian_measure_mc",
    "verify_gauss_bm",
    "verify_borell_1d",
    "verify_gauss_tail",
    "verify_close_points",
    "verify_slice_bound",
    "verify_level_triangle",
    "verify_esseen",
    "verify_reverse_esseen",
    "ESSEEN_M_GRID",
]

#: the existential scale m in the Esseen lemma is searched on this grid
ESSEEN_M_GRID = np.geomspace(1e-3, 1e3, 64)


# ---------------------------------------------------------------------------
# Characteristic functions
# ---------------------------------------------------------------------------


def lazy_walk_char(w: np.ndarray, mu: float, theta) -> float:
    """phi(theta) = prod_j ((1-mu) + mu cos(2 pi (W theta)_j)) for the walk W^T tau."""
    wt = np.asarray(w, dtype=np.float64) @ np.asarray(theta, dtype=np.float64)
    return float(np.prod((1.0 - mu) + mu * np.cos(2.0 * np.pi * wt)))


def psi_char(v, xi) -> float:
    """E exp(2 pi i <Av, xi>) for the symmetric sign matrix A.

    Diagonal entries contribute cos(2 pi v_k xi_k); each upper-triangle entry
    couples (j,k) through cos(2 pi (xi_j v_k + xi_k v_j)).
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    xi = np.asarray(xi, dtype=np.float64).ravel()
    diag = np.prod(np.cos(2.0 * np.pi * v * xi))
    cross = np.outer(xi, v) + np.outer(v, xi)
    iu = np.triu_indices(v.size, k=1)
    return float(diag * np.prod(np.cos(2.0 * np.pi * cross[iu])))


def chi_char(v, xi, d: int, mu: float = 0.25) -> float:
    """E exp(2 pi i <Mv, xi>) for the zeroed matrix with mu-lazy block H1."""
    v = np.asarray(v, dtype=np.float64).ravel()
    xi = np.asarray(xi, dtype=np.float64).ravel()
    cross = np.outer(xi[:d], v[d:]) + np.outer(v[:d], xi[d:])
    return float(np.prod((1.0 - mu) + mu * np.cos(2.0 * np.pi * cross)))


@dataclass(frozen=True)
class CharFnSpec:
    """kind 'lazy-walk' needs (w, mu); 'symmetric-matrix' needs v;
    'zeroed-matrix' needs (v, d, mu)."""

    kind: str
    w: np.ndarray | None = None
    mu: float = 0.25
    v: np.ndarray | None = None
    d: int | None = None


def char_fn_eval(spec: CharFnSpec, point) -> float:
    if spec.kind == "lazy-walk":
        val = lazy_walk_char(spec.w, spec.mu, point)
        if spec.mu <= 0.25 and val <= 0:
            raise AssertionError("lazy-walk characteristic function must be positive")
        return val
    if spec.kind == "symmetric-matrix":
        return psi_char(spec.v, point)
    if spec.kind == "zeroed-matrix":
        return chi_char(spec.v, point, spec.d, spec.mu)
    raise ValueError(f"unknown characteristic function kind {spec.kind!r}")


@dataclass(frozen=True)
class LevelSetSpec:
    """S_W(t) = {theta : ||W theta||_T <= sqrt(t)}."""

    w: np.ndarray
    t: float

    def contains(self, theta) -> bool:
        return torus_norm(self.w @ np.asarray(theta)) <= math.sqrt(self.t)

    def contains_rows(self, thetas: np.ndarray) -> np.ndarray:
        return torus_norm_sq_rows(thetas @ self.w.T) <= self.t


@dataclass(frozen=True)
class Cylinder:
    """Gamma_{r,s} in R^(k+2): ||theta_[k]|| <= r, |theta_{k+1}|,|theta_{k+2}| <= s."""

    k: int
    r: float
    s: float

    def contains(self, theta) -> bool:
        theta = np.asarray(theta, dtype=np.float64).ravel()
        head = np.linalg.norm(theta[: self.k])
        return (
            head <= self.r
            and abs(theta[self.k]) <= self.s
            and abs(theta[self.k + 1]) <= self.s
        )


# ---------------------------------------------------------------------------
# Scalar inequality sweeps
# ---------------------------------------------------------------------------


def _dist_to_z(x: np.ndarray) -> np.ndarray:
    return np.abs(x - np.rint(x))


def verify_cos_phi_bounds(
    mu: float,
    grid: int = 10_000,
    seed: SeedSpec | None = None,
    tol: float = 1e-12,
    matrix_trials: int = 10_000,
) -> LemmaReport:
    """Sweep mu ||x||_T^2 <= -log(1 - mu + mu cos(2 pi x)) <= 32 mu ||x||_T^2
    on [-2, 2], plus the matrix-level sandwich on random (W, theta)."""
    if not 0 <= mu <= 0.25:
        raise ValueError("the scalar bounds are asserted for mu in [0, 1/4]")
    xs = np.linspace(-2.0, 2.0, grid)
    mid = -np.log((1.0 - mu) + mu * np.cos(2.0 * np.pi * xs))
    d2 = _dist_to_z(xs) ** 2
    low_margin = float(np.min(mid - mu * d2))
    high_margin = float(np.min(32.0 * mu * d2 - mid))
    violations = int(np.sum(mid - mu * d2 < -tol) + np.sum(32.0 * mu * d2 - mid < -tol))

    sandwich_margin = math.inf
    if seed is not None and mu > 0:
        stream = Stream(seed)
        for _ in range(matrix_trials):
            two_d = 2 * (1 + int(stream.integers(1, 4)[0]))
            ell = 1 + int(stream.integers(1, 3)[0])
            w = stream.signs(two_d * ell).reshape(two_d, ell).astype(np.float64)
            theta = stream.normals(ell)
            phi = lazy_walk_char(w, mu, theta)
            tn2 = torus_norm(w @ theta) ** 2
            lo = math.exp(-32.0 * mu * tn2)
            hi = math.exp(-mu * tn2)
            sandwich_margin = min(sandwich_margin, phi - lo, hi - phi)
            if phi - lo < -tol or hi - phi < -tol:
                violations += 1
    verdict = HOLDS if violations == 0 else VIOLATED
    return LemmaReport(
        lemma_id="cos-approx",
        verdict=verdict,
        lhs_hat=min(low_margin, high_margin),
        rhs_hat=0.0,
        params={
            "mu": mu,
            "grid": grid,
            "violations": violations,
            "sandwich_margin": sandwich_margin,
        },
        seed=seed,
    )


def verify_fourier_inversion(
    atoms, probs, w: float, tol: float = 1e-6, window: float = 6.0
) -> LemmaReport:
    """E exp(-pi |X-w|^2) against the Gaussian-damped Fourier integral (l=1).

    The left side carries the full exponent -pi |X-w|^2: exp(-pi theta^2) is
    self-dual under the 2 pi Fourier convention, which pins the identity (a
    two-atom law at +-1 makes the integral e^{-pi}, not e^{-pi/2}).
    """
    atoms = np.asarray(atoms, dtype=np.float64).ravel()
    probs = np.asarray(probs, dtype=np.float64).ravel()
    if abs(probs.sum() - 1.0) > 1e-12 or np.any(probs < 0):
        raise ValueError("probs must be a probability vector")
    lhs = float(np.sum(probs * np.exp(-np.pi * (atoms - w) ** 2)))

    def integrand(theta: float) -> float:
        return math.exp(-math.pi * theta * theta) * float(
            np.sum(probs * np.cos(2.0 * math.pi * theta * (atoms - w)))
        )

    quad = adaptive_quadrature(integrand, -window, window, tol=tol / 10.0)
    gauss_tail = math.erfc(window * math.sqrt(math.pi))  # 2 int_T^inf e^{-pi t^2}
    total_err = quad.error_bound + gauss_tail
    diff = abs(lhs - quad.value)
    verdict = HOLDS if diff <= tol + total_err else VIOLATED
    return LemmaReport(
        lemma_id="fourier-inversion",
        verdict=verdict,
        lhs_hat=lhs,
        rhs_hat=quad.value,
        params={"w": w, "diff": diff, "err_bound": total_err, "evals": quad.evaluations},
    )


# ---------------------------------------------------------------------------
# Gaussian measure: Monte Carlo and the exact box-union calculus
# ---------------------------------------------------------------------------


def gaussian_measure_mc(
    indicator,
    dim: int,
    budget: int,
    seed: SeedSpec,
    threads: int | None = None,
    level: float = CI_LEVEL,
) -> McEstimate:
    """MC estimate of gamma_dim(S); indicator maps (m, dim) points to bools."""
    if dim < 1:
        raise ValueError("dim must be >= 1")

    def chunk_fn(stream: Stream, m: int) -> int:
        pts = stream.normals(m * dim).reshape(m, dim) * GAUSS_SD
        return int(np.sum(indicator(pts)))

    return mc_event_count(seed, budget, chunk_fn, threads=threads, level=level)


_BOX_CAP = 4096


@dataclass(frozen=True)
class BoxUnion:
    """Finite union of axis-aligned closed boxes with exact gamma measure.

    boxes has shape (k, dim, 2); the calculus (translation, Minkowski sum,
    A - A, fibers) stays inside the class, so every derived measure is exact.
    """

    dim: int
    boxes: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boxes, dtype=np.float64)
        if b.ndim != 3 or b.shape[1] != self.dim or b.shape[2] != 2:
            raise ValueError("boxes must have shape (k, dim, 2)")
        if np.any(b[:, :, 0] > b[:, :, 1]):
            raise ValueError("box intervals must satisfy lo <= hi")
        if b.shape[0] > _BOX_CAP:
            raise ValueError(f"box count {b.shape[0]} exceeds cap {_BOX_CAP}")
        object.__setattr__(self, "boxes", b)

    @staticmethod
    def single(intervals) -> "BoxUnion":
        arr = np.asarray(intervals, dtype=np.float64)[None, :, :]
        return BoxUnion(dim=arr.shape[1], boxes=arr)

    def measure(self) -> float:
        """Exact gamma measure via per-coordinate sweep disjointification."""
        if self.boxes.shape[0] == 0:
            return 0.0
        break_pts = [
            np.unique(self.boxes[:, j, :].ravel()) for j in range(self.dim)
        ]
        cell_masses = []
        for j, pts in enumerate(break_pts):
            masses = [
                gaussian_interval_mass(pts[i], pts[i + 1], GAUSS_SD)
                for i in range(len(pts) - 1)
            ]
            cell_masses.append(np.array(masses))
        n_cells = int(np.prod([len(p) - 1 for p in break_pts]))
        if n_cells > 2_000_000:
            raise ValueError("box-union cell count blowup beyond cap")
        total = 0.0
        shape = [len(p) - 1 for p in break_pts]
        for flat in range(n_cells):
            idx = []
            rem = flat
            for s in reversed(shape):
                idx.append(rem % s)
                rem //= s
            idx.reverse()
            lo = np.array([break_pts[j][idx[j]] for j in range(self.dim)])
            hi = np.array([break_pts[j][idx[j] + 1] for j in range(self.dim)])
            inside = np.any(
                np.all((self.boxes[:, :, 0] <= lo + 1e-15) & (hi <= self.boxes[:, :, 1] + 1e-15), axis=1)
            )
            if inside:
                mass = 1.0
                for j in range(self.dim):
                    mass *= cell_masses[j][idx[j]]
                total += mass
        return total

    def translate(self, x) -> "BoxUnion":
        shift = np.asarray(x, dtype=np.float64).reshape(1, self.dim, 1)
        return BoxUnion(dim=self.dim, boxes=self.boxes + shift)

    def minkowski_sum(self, intervals) -> "BoxUnion":
        """A + B for a single box B given as (dim, 2) intervals."""
        b = np.asarray(intervals, dtype=np.float64)
        out = self.boxes.copy()
        out[:, :, 0] += b[:, 0]
        out[:, :, 1] += b[:, 1]
        return BoxUnion(dim=self.dim, boxes=out)

    def diffset(self) -> "BoxUnion":
        """A - A as the union of pairwise Minkowski differences of boxes."""
        k = self.boxes.shape[0]
        if k * k > _BOX_CAP:
            raise ValueError("difference-set box count blowup beyond cap")
        out = np.empty((k * k, self.dim, 2))
        for i in range(k):
            for j in range(k):
                out[i * k + j, :, 0] = self.boxes[i, :, 0] - self.boxes[j, :, 1]
                out[i * k + j, :, 1] = self.boxes[i, :, 1] - self.boxes[j, :, 0]
        return BoxUnion(dim=self.dim, boxes=out)

    def fiber_vertical(self, theta_head) -> "BoxUnion":
        """S(theta_[k]) c R^2: last-two-coordinate slice at a fixed head."""
        th = np.asarray(theta_head, dtype=np.float64).ravel()
        k = th.size
        if k + 2 != self.dim:
            raise ValueError("vertical fiber needs dim = len(head) + 2")
        keep = np.all(
            (self.boxes[:, :k, 0] <= th) & (th <= self.boxes[:, :k, 1]), axis=1
        )
        return BoxUnion(dim=2, boxes=self.boxes[keep][:, k:, :])

    def fiber_horizontal(self, a: float, b: float, y) -> "BoxUnion":
        """F_y(S; a, b) c R^k: heads theta with (theta, a, b) in S - y."""
        y = np.asarray(y, dtype=np.float64).ravel()
        k = self.dim - 2
        pa, pb = a + y[k], b + y[k + 1]
        keep = (
            (self.boxes[:, k, 0] <= pa)
            & (pa <= self.boxes[:, k, 1])
            & (self.boxes[:, k + 1, 0] <= pb)
            & (pb <= self.boxes[:, k + 1, 1])
        )
        heads = self.boxes[keep][:, :k, :] - y[:k].reshape(1, k, 1)
        return BoxUnion(dim=k, boxes=heads)


def verify_gauss_bm(a: BoxUnion, tol: float = 1e-12) -> LemmaReport:
    """gamma_k(A - A) >= gamma_k(A)^4, both sides exact on the box calculus."""
    lhs = a.diffset().measure()
    rhs = a.measure() ** 4
    verdict = HOLDS if lhs >= rhs - tol else VIOLATED
    return LemmaReport(
        lemma_id="GaussBM",
        verdict=verdict,
        lhs_hat=lhs,
        rhs_hat=rhs,
        params={"dim": a.dim, "boxes": int(a.boxes.shape[0])},
    )


def verify_borell_1d(a: float, b: float, tol: float = 1e-12) -> LemmaReport:
    """1-D consequence of the Gaussian Brunn-Minkowski theorem with A = B = [a,b]:
    gamma(A + A) >= Phi(2 Phi^{-1}(gamma(A))), exact via erf."""
    if a > b:
        raise ValueError("need a <= b")
    ga = gaussian_interval_mass(a, b, GAUSS_SD)
    lhs = gaussian_interval_mass(2 * a, 2 * b, GAUSS_SD)
    rhs = std_normal_cdf(2.0 * std_normal_quantile(ga))
    verdict = HOLDS if lhs >= rhs - tol else VIOLATED
    return LemmaReport(
        lemma_id="Borell",
        verdict=verdict,
        lhs_hat=lhs,
        rhs_hat=rhs,
        params={"a": a, "b": b},
    )


def verify_gauss_tail(
    k: int, budget: int, seed: SeedSpec, threads: int | None = None,
    level: float = CI_LEVEL,
) -> LemmaReport:
    """gamma_k(||x||^2 >= k) <= exp(-k/8), MC upper CI against the bound."""
    if k < 1:
        raise ValueError("k must be >= 1")

    def chunk_fn(stream: Stream, m: int) -> int:
        pts = stream.normals(m * k).reshape(m, k) * GAUSS_SD
        return int(np.sum(np.einsum("ij,ij->i", pts, pts) >= k))

    est = mc_event_count(seed, budget, chunk_fn, threads=threads, level=level)
    bound = math.exp(-k / 8.0)
    verdict = HOLDS if est.ci_high <= bound else (
        VIOLATED if est.ci_low > bound else INCONCLUSIVE
    )
    return LemmaReport(
        lemma_id="Gtail",
        verdict=verdict,
        lhs_hat=est.p_hat,
        lhs_ci=(est.ci_low, est.ci_high),
        rhs_hat=bound,
        params={"k": k, "samples": budget},
        seed=seed,
    )


def verify_close_points(
    s_set: BoxUnion, s: float, grid_cap: int = 4096
) -> LemmaReport:
    """If gamma_2(S) >= 8 s^2 there are x, y in S with s < ||x-y||_inf <= 16."""
    if s_set.dim != 2:
        raise ValueError("close-points check is two-dimensional")
    mass = s_set.measure()
    if mass < 8.0 * s * s:
        return LemmaReport(
            lemma_id="2dclosepoints",
            verdict=VACUOUS,
            lhs_hat=mass,
            rhs_hat=8.0 * s * s,
            params={"s": s},
            notes="hypothesis gamma_2(S) >= 8 s^2 fails; statement vacuous",
        )
    pts = [box[:, 0].copy() for box in s_set.boxes]
    pts += [box[:, 1].copy() for box in s_set.boxes]
    pts += [np.array([box[0, 0], box[1, 1]]) for box in s_set.boxes]
    pts += [np.array([box[0, 1], box[1, 0]]) for box in s_set.boxes]
    step = max(s / 2.0, 1e-3)
    for box in s_set.boxes:
        nx = min(int((box[0, 1] - box[0, 0]) / step) + 2, 64)
        ny = min(int((box[1, 1] - box[1, 0]) / step) + 2, 64)
        for gx in np.linspace(box[0, 0], box[0, 1], nx):
            for gy in np.linspace(box[1, 0], box[1, 1], ny):
                pts.append(np.array([gx, gy]))
                if len(pts) > grid_cap:
                    break
    arr = np.array(pts[:grid_cap])
    diff = np.abs(arr[:, None, :] - arr[None, :, :]).max(axis=2)
    hit = np.argwhere((diff > s) & (diff <= 16.0))
    if hit.size:
        i, j = hit[0]
        return LemmaReport(
            lemma_id="2dclosepoints",
            verdict=HOLDS,
            lhs_hat=mass,
            rhs_hat=8.0 * s * s,
            params={"s": s, "witness_x": arr[i].tolist(), "witness_y": arr[j].tolist()},
        )
    return LemmaReport(
        lemma_id="2dclosepoints",
        verdict=INCONCLUSIVE,
        lhs_hat=mass,
        rhs_hat=8.0 * s * s,
        params={"s": s},
        notes="witness search cap exceeded",
    )


def _shell_reachable(diff_box: np.ndarray, r: float, s: float) -> bool:
    """Does an axis-aligned box meet Gamma_{r,16} \\ Gamma_{r,s}?  (dim = k+2)

    Coordinates are independent, so the box meets the shell iff the head can
    reach norm <= r, both tail intervals meet [-16,16], and at least one tail
    interval reaches beyond s in absolute value while staying within 16.
    """
    k = diff_box.shape[0] - 2
    lo, hi = diff_box[:, 0], diff_box[:, 1]
    closest = np.clip(0.0, lo[:k], hi[:k])  # nearest-to-origin head point
    if np.linalg.norm(closest) > r:
        return False
    for i in (k, k + 1):
        if lo[i] > 16.0 or hi[i] < -16.0:  # tail interval misses [-16, 16]
            return False
    for i in (k, k + 1):
        if (hi[i] > s and lo[i] <= 16.0) or (lo[i] < -s and hi[i] >= -16.0):
            return True
    return False


def verify_slice_bound(s_set: BoxUnion, r: float, s: float) -> LemmaReport:
    """Empty-shell hypothesis => max_theta gamma_2(S(theta_[k])) <= 8 s^2.

    Exact on box unions: the hypothesis reduces to pairwise difference boxes
    avoiding the shell, and the max over heads is attained on a head cell.
    """
    k = s_set.dim - 2
    if k < 1:
        raise ValueError("need dim >= 3")
    diffs = s_set.diffset()
    for box in diffs.boxes:
        if _shell_reachable(box, r, s):
            return LemmaReport(
                lemma_id="slice-upperBound",
                verdict=VACUOUS,
                lhs_hat=0.0,
                rhs_hat=8.0 * s * s,
                params={"r": r, "s": s},
                notes="empty-shell hypothesis fails on this set; statement vacuous",
            )
    head_pts = [np.unique(s_set.boxes[:, j, :].ravel()) for j in range(k)]
    worst = 0.0
    mids = [0.5 * (p[:-1] + p[1:]) for p in head_pts]
    grids = np.meshgrid(*mids, indexing="ij") if k > 0 else []
    heads = np.stack([g.ravel() for g in grids], axis=1)
    for head in heads:
        worst = max(worst, s_set.fiber_vertical(head).measure())
    verdict = HOLDS if worst <= 8.0 * s * s + 1e-12 else VIOLATED
    return LemmaReport(
        lemma_id="slice-upperBound",
        verdict=verdict,
        lhs_hat=worst,
        rhs_hat=8.0 * s * s,
        params={"r": r, "s": s, "k": k},
    )


def verify_level_triangle(
    w: np.ndarray,
    m: float,
    trials: int,
    seed: SeedSpec,
    window: float = 4.0,
    min_hits: int = 16,
) -> LemmaReport:
    """S_W(m) - S_W(m) c S_W(4m), by rejection-sampled member pairs.

    Membership sampling is window-truncated to [-window, window]^l; also
    checks the fiber inclusion F_y(S;a,b) - F_y(S;a,b) c F_0(S_W(4m);0,0).
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    w = np.asarray(w, dtype=np.float64)
    ell = w.shape[1]
    spec_m = LevelSetSpec(w=w, t=m)
    spec_4m = LevelSetSpec(w=w, t=4.0 * m)
    stream = Stream(seed)
    # rejection acceptance can be far below 1% for small m: draw generously
    batch = max(200 * trials, 65_536)
    thetas = (stream.uniform(batch * ell).reshape(batch, ell) * 2.0 - 1.0) * window
    members = thetas[spec_m.contains_rows(thetas)]
    if members.shape[0] < max(2, min_hits):
        return LemmaReport(
            lemma_id="LevelSetTriangleInq",
            verdict=INCONCLUSIVE,
            lhs_hat=float(members.shape[0]),
            rhs_hat=float(min_hits),
            params={"m": m, "window": window},
            seed=seed,
            notes="too few level-set hits under rejection sampling",
        )
    idx = stream.integers(2 * trials, members.shape[0]).reshape(trials, 2)
    diffs = members[idx[:, 0]] - members[idx[:, 1]]
    bad = int(np.sum(~spec_4m.contains_rows(diffs)))

    fiber_bad = 0
    fiber_pairs = 0
    if ell >= 3:
        k = ell - 2
        # centre the fiber on a known member so rejection has mass to find
        anchor = members[0]
        y = stream.normals(ell) * 0.01
        ab = anchor[k:] - y[k:]
        heads = anchor[:k] - y[:k] + (
            stream.uniform(batch * k).reshape(batch, k) * 2.0 - 1.0
        ) * window
        full = np.concatenate(
            [heads + y[:k], np.tile(ab + y[k:], (batch, 1))], axis=1
        )
        keep = spec_m.contains_rows(full)
        hf = heads[keep]
        if hf.shape[0] >= 2:
            jdx = stream.integers(2 * trials, hf.shape[0]).reshape(trials, 2)
            hd = hf[jdx[:, 0]] - hf[jdx[:, 1]]
            padded = np.concatenate([hd, np.zeros((trials, 2))], axis=1)
            fiber_bad = int(np.sum(~spec_4m.contains_rows(padded)))
            fiber_pairs = trials
    verdict = HOLDS if bad == 0 and fiber_bad == 0 else VIOLATED
    return LemmaReport(
        lemma_id="LevelSetTriangleInq",
        verdict=verdict,
        lhs_hat=float(bad + fiber_bad),
        rhs_hat=0.0,
        params={
            "m": m,
            "pairs": trials,
            "fiber_pairs": fiber_pairs,
            "members": int(members.shape[0]),
        },
        seed=seed,
    )


# ---------------------------------------------------------------------------
# The Esseen pair
# ---------------------------------------------------------------------------


def _level_set_gamma_counts(
    w: np.ndarray, m_grid: np.ndarray, budget: int, seed: SeedSpec,
    threads: int | None,
) -> np.ndarray:
    """Hit counts of gamma_l(S_W(m)) for every m in the grid, one sample pool."""
    ell = w.shape[1]

    def chunk_fn(stream: Stream, mm: int) -> np.ndarray:
        g = stream.normals(mm * ell).reshape(mm, ell) * GAUSS_SD
        tn2 = torus_norm_sq_rows(g @ w.T)
        return np.searchsorted(np.sort(tn2), m_grid, side="right")

    counts = run_chunked(seed, budget, chunk_fn, threads=threads)
    return np.sum(np.stack(counts), axis=0)


def verify_esseen(
    w: np.ndarray,
    nu: float,
    beta: float,
    budget: int,
    seed: SeedSpec,
    m_grid: np.ndarray | None = None,
    threads: int | None = None,
    level: float = CI_LEVEL,
) -> LemmaReport:
    """L(W^T tau, beta sqrt(l)) <= 2 exp(2 b^2 l - nu m / 2) gamma_l(S_W(m)) for SOME m.

    The scale m is existential (it is the maximiser of e^{-nu u/2} gamma(S_W(u))
    in the source argument), so the verifier searches the grid for a witness:
    holds iff some grid m certifies LHS upper CI <= RHS lower CI.  A grid
    refutation is only grid-strong and is noted as such.
    """
    if not 0 < nu <= 0.25:
        raise ValueError("need nu in (0, 1/4]")
    if beta <= 0:
        raise ValueError("beta must be positive")
    w = np.asarray(w, dtype=np.float64)
    two_d, ell = w.shape
    m_grid = ESSEEN_M_GRID if m_grid is None else np.asarray(m_grid)

    def sampler(stream: Stream, m: int) -> np.ndarray:
        tau = stream.lazy(m * two_d, nu).reshape(m, two_d).astype(np.float64)
        return tau @ w

    levy_radius = beta * math.sqrt(ell)
    lhs = _levy(sampler, levy_radius, budget, seed.child("lhs"), threads, level)

    counts = _level_set_gamma_counts(w, m_grid, budget, seed.child("gamma"), threads)
    scale = 2.0 * np.exp(2.0 * beta * beta * ell - nu * m_grid / 2.0)
    rhs_lo = np.empty_like(m_grid)
    rhs_hi = np.empty_like(m_grid)
    for i, k in enumerate(counts):
        lo, hi = clopper_pearson(int(k), budget, level)
        rhs_lo[i] = scale[i] * lo
        rhs_hi[i] = scale[i] * hi
    best = int(np.argmax(rhs_lo))
    if lhs.ci_high <= rhs_lo[best]:
        verdict = HOLDS
        notes = ""
    elif lhs.ci_low > float(np.max(rhs_hi)):
        verdict = VIOLATED
        notes = "refutation is grid-strength only (existential m searched on a grid)"
    else:
        verdict = INCONCLUSIVE
        notes = ""
    return LemmaReport(
        lemma_id="esseen",
        verdict=verdict,
        lhs_hat=lhs.p_hat,
        lhs_ci=(lhs.ci_low, lhs.ci_high),
        rhs_hat=float(rhs_lo[best]),
        rhs_ci=(float(rhs_lo[best]), float(rhs_hi[best])),
        params={
            "nu": nu,
            "beta": beta,
            "ell": ell,
            "two_d": two_d,
            "witness_m": float(m_grid[best]),
            "samples": budget,
        },
        seed=seed,
        notes=notes,
    )


def _levy(sampler, radius, budget, seed, threads, level):
    from .concentration import levy_mc

    return levy_mc(sampler, radius, budget, seed, threads=threads, level=level)


def verify_reverse_esseen(
    w: np.ndarray,
    mu: float,
    beta: float,
    t: float,
    budget: int,
    seed: SeedSpec,
    threads: int | None = None,
    level: float = CI_LEVEL,
) -> LemmaReport:
    """gamma_l(S_W(t)) e^{-32 mu t} <= P(||W^T tau|| <= beta sqrt(l)) + e^{-b^2 l}."""
    if not 0 < mu <= 0.25:
        raise ValueError("need mu in (0, 1/4]")
    w = np.asarray(w, dtype=np.float64)
    two_d, ell = w.shape

    def gamma_chunk(stream: Stream, m: int) -> int:
        g = stream.normals(m * ell).reshape(m, ell) * GAUSS_SD
        return int(np.sum(torus_norm_sq_rows(g @ w.T) <= t))

    gamma_est = mc_event_count(
        seed.child("gamma"), budget, gamma_chunk, threads=threads, level=level
    )

    radius = beta * math.sqrt(ell)

    def ball_chunk(stream: Stream, m: int) -> int:
        tau = stream.lazy(m * two_d, mu).reshape(m, two_d).astype(np.float64)
        x = tau @ w
        return int(np.sum(np.einsum("ij,ij->i", x, x) <= radius * radius))

    ball_est = mc_event_count(
        seed.child("ball"), budget, ball_chunk, threads=threads, level=level
    )
    damp = math.exp(-32.0 * mu * t)
    slack = math.exp(-beta * beta * ell)
    lhs_hat = gamma_est.p_hat * damp
    lhs_hi = gamma_est.ci_high * damp
    lhs_lo = gamma_est.ci_low * damp
    rhs_hat = ball_est.p_hat + slack
    rhs_lo = ball_est.ci_low + slack
    rhs_hi = ball_est.ci_high + slack
    if lhs_hi <= rhs_lo:
        verdict = HOLDS
    elif lhs_lo > rhs_hi:
        verdict = VIOLATED
    else:
        verdict = INCONCLUSIVE
    return LemmaReport(
        lemma_id="revEsseen",
        verdict=verdict,
        lhs_hat=lhs_hat,
        lhs_ci=(lhs_lo, lhs_hi),
        rhs_hat=rhs_hat,
        rhs_ci=(rhs_lo, rhs_hi),
        params={"mu": mu, "beta": beta, "t": t, "ell": ell, "samples": budget},
        seed=seed,
    )
