"""Least common denominator and the conditioned inverse Littlewood-Offord
verifiers.

The working LCD is D_alpha(v) = inf{phi > 0 : ||phi v||_T <= min(phi ||v||/2,
sqrt(alpha d))}.  The intro variant (distance to the nonzero lattice points)
is exposed through mode="intro".  The scan below certifies its bracket on the
continuum, not just on evaluated points: phi -> ||phi v||_T is Lipschitz with
constant ||v||_2, and the right-hand side with constant ||v||_2/2, so a cell
whose endpoint margins beat 1.5 ||v|| (width/2) provably contains no
admissible dilate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corenum import batch_singular_values, torus_norm
from .mc import CI_LEVEL, McEstimate, clopper_pearson, mc_event_count, run_chunked
from .reports import (
    HOLDS,
    INCONCLUSIVE,
    LemmaReport,
    PRECONDITIONS_UNMET,
    VACUOUS,
    VIOLATED,
)
from .rng import Box, SeedSpec, Stream, _box_points

__all__ = [
    "LcdResult",
    "lcd",
    "replay_certificate",
    "augmented_matrix",
    "AugmentedMatrix",
    "RankEventSpec",
    "verify_inverse_lwo",
    "verify_cond_walk_lcd",
    "verify_hanson_wright",
    "verify_tensorization",
    "rank_event_mc",
    "lcd_rarity_experiment",
    "verify_second_moment",
    "verify_projection_anticoncentration",
]

PHI_MAX_DEFAULT = 32.0  # twice the K = 16 target every downstream use needs
DEGENERATE_NORM = 1e-12


@dataclass(frozen=True)
class LcdResult:
    alpha: float
    bracket_low: float
    bracket_high: float
    witness_phi: float | None
    status: str  # certified | capped-at-phi-max | degenerate
    search_tol: float
    evaluations: tuple = field(default_factory=tuple)  # (phi, torus, margin) triples
    suspect_low: float | None = None  # leftmost unresolved near-tangency, if any

    def at_most(self, k: float) -> bool:
        """Certified D_alpha <= k (a witness dilate at or below k exists)."""
        return self.status == "certified" and self.witness_phi is not None and (
            self.witness_phi <= k
        )

    def exceeds(self, k: float) -> bool:
        """Certified D_alpha > k on the scanned range."""
        if self.suspect_low is not None and self.suspect_low <= k:
            return False
        if self.status == "capped-at-phi-max":
            return self.bracket_low >= k
        return self.status == "certified" and self.bracket_low > k


def _dist_nonzero_lattice(x: np.ndarray) -> float:
    """Distance from x to Z^d \\ {0}."""
    p = np.rint(x)
    base = x - p
    if np.any(p != 0):
        return float(np.linalg.norm(base))
    # nearest nonzero point: move one coordinate to +-1
    d2 = float(base @ base)
    best = math.inf
    for j in range(x.size):
        alt = min((x[j] - 1.0) ** 2, (x[j] + 1.0) ** 2)
        best = min(best, d2 - base[j] ** 2 + alt)
    return math.sqrt(best)


def lcd(
    v,
    alpha: float,
    phi_max: float = PHI_MAX_DEFAULT,
    grid_resolution: float = 1e-3,
    mode: str = "working",
    collect_certificate: bool = False,
) -> LcdResult:
    """Certified bracket for the least common denominator of v.

    Scans [phi_start, phi_max] with cells of width min(grid_resolution,
    0.49/||v||), subdividing any cell the Lipschitz bound cannot clear, down
    to width grid_resolution/1e6.  The returned bracket satisfies: no phi
    below bracket_low is admissible, and witness_phi meets the defining
    inequality within +search_tol.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0,1)")
    if phi_max <= 0:
        raise ValueError("phi_max must be positive")
    norm = float(np.linalg.norm(v))
    if norm < DEGENERATE_NORM:
        return LcdResult(alpha, 0.0, 0.0, None, "degenerate", 0.0)
    d = v.size
    sqrt_ad = math.sqrt(alpha * d)
    if mode == "working":
        lipschitz = 1.5 * norm

        def margin(phi: float) -> tuple[float, float]:
            tn = torus_norm(phi * v)
            return tn, tn - min(phi * norm / 2.0, sqrt_ad)

        # all coords of phi*v sit in [-1/2, 1/2] here, so ||phi v||_T = phi||v||
        # strictly beats both branches of the min: provably inadmissible.
        phi_start = 1.0 / (2.0 * float(np.max(np.abs(v))))
    elif mode == "intro":
        lipschitz = norm

        def margin(phi: float) -> tuple[float, float]:
            dist = _dist_nonzero_lattice(phi * v)
            return dist, dist - sqrt_ad

        phi_start = 0.0
    else:
        raise ValueError("mode must be 'working' or 'intro'")

    w_min = grid_resolution / 1e6
    tol = lipschitz * w_min
    h0 = min(grid_resolution, 0.49 / norm)
    evals: list[tuple[float, float, float]] = []
    suspects: list[float] = []

    def f(phi: float) -> float:
        tn, mg = margin(phi)
        if collect_certificate:
            evals.append((phi, tn, mg))
        return mg

    def bisect_crossing(l: float, r: float, fl: float, fr: float):
        # invariant: fl > 0 >= fr; shrink to width w_min around the crossing
        while r - l > w_min:
            mid = 0.5 * (l + r)
            fm = f(mid)
            if fm <= 0.0:
                r, fr = mid, fm
            else:
                l, fl = mid, fm
        return l, r

    def leftmost(l: float, r: float, fl: float, fr: float):
        # precondition: fl > 0 and [scan start, l] certified or suspect-tracked
        if fr <= 0.0:
            return bisect_crossing(l, r, fl, fr)
        if (fl + fr) / 2.0 > lipschitz * (r - l) / 2.0:
            return None  # min over the cell provably positive
        if r - l <= w_min:
            suspects.append(l)  # unresolved near-tangency, conservatively kept
            return None
        mid = 0.5 * (l + r)
        fm = f(mid)
        if fm <= 0.0:
            return bisect_crossing(l, mid, fl, fm)
        found = leftmost(l, mid, fl, fm)
        if found is not None:
            return found
        return leftmost(mid, r, fm, fr)

    if phi_start >= phi_max:
        # every phi <= phi_max sits in the analytically excluded range
        return LcdResult(alpha, phi_max, math.inf, None, "capped-at-phi-max", tol)
    lo = phi_start if mode == "working" else w_min
    flo = f(lo)
    if flo <= 0.0:
        # admissible right at the scan start: in intro mode nothing below
        # w_min was excluded, so the bracket floor is 0 there.
        result = (lo * (1.0 - 1e-12) if mode == "working" else 0.0, lo)
    else:
        result = None
        while lo < phi_max and result is None:
            hi = min(lo + h0, phi_max)
            fhi = f(hi)
            result = leftmost(lo, hi, flo, fhi)
            lo, flo = hi, fhi
    suspect_low = min(suspects) if suspects else None
    if result is None:
        return LcdResult(
            alpha,
            phi_max,
            math.inf,
            None,
            "capped-at-phi-max",
            tol,
            tuple(evals),
            suspect_low,
        )
    bl, bh = result
    return LcdResult(alpha, bl, bh, bh, "certified", tol, tuple(evals), suspect_low)


def replay_certificate(res: LcdResult, v, alpha: float, mode: str = "working") -> bool:
    """Audit an emitted certificate: recomputed margins must match, the witness
    must satisfy the defining inequality within search_tol, and every recorded
    point below bracket_low must fail it."""
    v = np.asarray(v, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(v))
    sqrt_ad = math.sqrt(alpha * v.size)
    for phi, tn, mg in res.evaluations:
        if mode == "working":
            tn2 = torus_norm(phi * v)
            mg2 = tn2 - min(phi * norm / 2.0, sqrt_ad)
        else:
            tn2 = _dist_nonzero_lattice(phi * v)
            mg2 = tn2 - sqrt_ad
        if abs(tn2 - tn) > 1e-9 or abs(mg2 - mg) > 1e-9:
            return False
        if phi < res.bracket_low and mg <= 0:
            return False
    if res.status == "certified":
        phi = res.witness_phi
        tn = torus_norm(phi * v) if mode == "working" else _dist_nonzero_lattice(phi * v)
        bound = min(phi * norm / 2.0, sqrt_ad) if mode == "working" else sqrt_ad
        if tn > bound + res.search_tol:
            return False
    return True


# ---------------------------------------------------------------------------
# Augmented matrices and the conditioned-walk verifiers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AugmentedMatrix:
    """W_Y = [W, (0_d; Y), (Y; 0_d)], a 2d x (k+2) matrix."""

    w: np.ndarray
    y: np.ndarray

    def assemble(self) -> np.ndarray:
        return augmented_matrix(self.w, self.y)


def augmented_matrix(w: np.ndarray, y: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    d = y.size
    if w.shape[0] != 2 * d:
        raise ValueError("W must have 2 d rows for a d-dimensional Y")
    col1 = np.concatenate([np.zeros(d), y])
    col2 = np.concatenate([y, np.zeros(d)])
    return np.column_stack([w, col1, col2])


def _lazy_walk_sampler(w: np.ndarray, mu: float):
    two_d = w.shape[0]

    def sampler(stream: Stream, m: int) -> np.ndarray:
        tau = stream.lazy(m * two_d, mu).reshape(m, two_d).astype(np.float64)
        return tau @ w

    return sampler


def verify_inverse_lwo(
    v,
    w_rows: np.ndarray,
    alpha: float,
    t: float,
    budget: int,
    seed: SeedSpec,
    R: float = 1.0,
    c1: float = 0.1,
    c2: float = 1.0,
    mu: float = 0.25,
    threads: int | None = None,
    level: float = CI_LEVEL,
    regime_tag: str = "lab",
) -> LemmaReport:
    """Joint-constraint inverse theorem: if P(|<tau,v>| <= t and ||W tau|| <=
    c2 sqrt(k)) >= R t e^{-c1 k} then D_alpha(v) <= 16/t  (intro-mode LCD).

    The constants R, c1, c2 are existential in the source; the values used
    are recorded in the report.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    d = v.size
    w_rows = np.asarray(w_rows, dtype=np.float64).reshape(-1, d)
    k = w_rows.shape[0]
    if k and np.max(np.abs(w_rows @ w_rows.T - np.eye(k))) > 1e-9:
        return LemmaReport(
            lemma_id="invLwO",
            verdict=PRECONDITIONS_UNMET,
            lhs_hat=0.0,
            rhs_hat=0.0,
            params={"reason": "rows of W are not orthonormal"},
            regime_tag=regime_tag,
        )

    def chunk_fn(stream: Stream, m: int) -> int:
        tau = stream.lazy(m * d, mu).reshape(m, d).astype(np.float64)
        hard = np.abs(tau @ v) <= t
        if k:
            wt = tau @ w_rows.T
            weak = np.einsum("ij,ij->i", wt, wt) <= c2 * c2 * k
        else:
            weak = np.ones(m, dtype=bool)
        return int(np.sum(hard & weak))

    est = mc_event_count(seed, budget, chunk_fn, threads=threads, level=level)
    threshold = R * t * math.exp(-c1 * k)
    phi_cap = 16.0 / t
    res = lcd(v, alpha, phi_max=phi_cap * 1.05, mode="intro")
    conclusion = res.at_most(phi_cap)
    params = {
        "t": t,
        "k": k,
        "alpha": alpha,
        "R": R,
        "c1": c1,
        "c2": c2,
        "lcd_status": res.status,
        "lcd_bracket": [res.bracket_low, res.bracket_high],
        "hypothesis_threshold": threshold,
    }
    if est.ci_high < threshold:
        verdict = VACUOUS  # hypothesis certifiably fails: implication is empty
    elif est.ci_low >= threshold:
        verdict = HOLDS if conclusion else VIOLATED
    else:
        verdict = HOLDS if conclusion else INCONCLUSIVE
    return LemmaReport(
        lemma_id="invLwO",
        verdict=verdict,
        lhs_hat=est.p_hat,
        lhs_ci=(est.ci_low, est.ci_high),
        rhs_hat=threshold,
        params=params,
        seed=seed,
        regime_tag=regime_tag,
    )


def _matrix_shape_preconditions(w: np.ndarray, k: int) -> str | None:
    if k == 0:
        return None
    op = float(batch_singular_values(w[None, :, :])[0, 0])
    hs = float(np.linalg.norm(w))
    if op > 2.0 + 1e-9:
        return f"||W|| = {op:.4f} > 2"
    if hs < math.sqrt(k) / 2.0 - 1e-9:
        return f"||W||_HS = {hs:.4f} < sqrt(k)/2"
    return None


def verify_cond_walk_lcd(
    y,
    w: np.ndarray,
    c0: float,
    alpha: float,
    t: float,
    budget: int,
    seed: SeedSpec,
    R: float | None = None,
    regime_tag: str = "lab",
    mu: float = 0.25,
    threads: int | None = None,
    level: float = CI_LEVEL,
) -> LemmaReport:
    """Conditioned-walk inverse theorem, in the contrapositive direction:
    when D_alpha(Y) > 16 is certified, L(W_Y^T tau, sqrt(c0) sqrt(k+1)) must
    stay below (R t)^2 exp(-c0 k)."""
    y = np.asarray(y, dtype=np.float64).ravel()
    w = np.asarray(w, dtype=np.float64).reshape(2 * y.size, -1)
    k = w.shape[1]
    d = y.size
    if R is None:
        R = 2.0**32 / (c0 * c0)  # published constant; astronomical at desk scale
    problems = []
    if regime_tag == "paper":
        if c0 > 2.0**-24:
            problems.append("paper regime needs c0 <= 2^-24")
        if k > 2.0**-10 * alpha * d:
            problems.append("k > 2^-10 alpha d")
        if t < math.exp(-(2.0**-9) * alpha * d):
            problems.append("t below exp(-2^-9 alpha d)")
    shape_problem = _matrix_shape_preconditions(w, k)
    if shape_problem:
        problems.append(shape_problem)
    if np.linalg.norm(y) < 2.0**-10 * c0 / t:
        problems.append("||Y|| < 2^-10 c0 / t")
    if problems:
        return LemmaReport(
            lemma_id="CondWalkLCMfinal",
            verdict=PRECONDITIONS_UNMET,
            lhs_hat=0.0,
            rhs_hat=0.0,
            params={"reasons": problems},
            regime_tag=regime_tag,
            seed=seed,
        )
    res = lcd(y, alpha, phi_max=16.0)
    params = {
        "c0": c0,
        "alpha": alpha,
        "t": t,
        "k": k,
        "R": R,
        "lcd_status": res.status,
        "samples": budget,
    }
    if not res.exceeds(16.0):
        return LemmaReport(
            lemma_id="CondWalkLCMfinal",
            verdict=VACUOUS,
            lhs_hat=0.0,
            rhs_hat=0.0,
            params=params,
            regime_tag=regime_tag,
            seed=seed,
            notes="hypothesis D_alpha(Y) > 16 not satisfied; statement vacuous",
        )
    from .concentration import levy_mc

    wy = augmented_matrix(w, y)
    lhs = levy_mc(
        _lazy_walk_sampler(wy, mu),
        math.sqrt(c0) * math.sqrt(k + 1.0),
        budget,
        seed,
        threads=threads,
        level=level,
    )
    rhs = (R * t) ** 2 * math.exp(-c0 * k)
    notes = "lab-constants" if regime_tag == "lab" else ""
    if rhs >= 1.0:
        verdict = VACUOUS
        notes = (notes + "; " if notes else "") + "bound >= 1: trivially true"
    elif lhs.ci_high <= rhs:
        verdict = HOLDS
    elif lhs.ci_low > rhs:
        verdict = VIOLATED
    else:
        verdict = INCONCLUSIVE
    return LemmaReport(
        lemma_id="CondWalkLCMfinal",
        verdict=verdict,
        lhs_hat=lhs.p_hat,
        lhs_ci=(lhs.ci_low, lhs.ci_high),
        rhs_hat=rhs,
        params=params,
        regime_tag=regime_tag,
        seed=seed,
        notes=notes,
    )


def verify_hanson_wright(
    w: np.ndarray,
    nu: float,
    delta: float,
    budget: int,
    seed: SeedSpec,
    slack: float = 0.1,
    threads: int | None = None,
    level: float = CI_LEVEL,
    regime_tag: str = "lab",
) -> LemmaReport:
    """P(||W^T sigma|| <= delta sqrt(k)) <= 4 exp(-2^-12 nu k), plus the proof's
    median diagnostic: median ||W^T sigma|| >= sqrt(nu/2) ||W||_HS / ||W||
    up to the configured slack."""
    w = np.asarray(w, dtype=np.float64)
    two_d, k = w.shape
    if not 0 < nu < 1:
        raise ValueError("nu must be in (0,1)")
    problems = []
    if not delta < math.sqrt(nu) / 16.0:
        problems.append("delta >= sqrt(nu)/16")
    shape_problem = _matrix_shape_preconditions(w, k)
    if shape_problem:
        problems.append(shape_problem)
    if problems:
        return LemmaReport(
            lemma_id="HansonWright",
            verdict=PRECONDITIONS_UNMET,
            lhs_hat=0.0,
            rhs_hat=0.0,
            params={"reasons": problems},
            regime_tag=regime_tag,
            seed=seed,
        )
    radius = delta * math.sqrt(k)
    norms_chunks = run_chunked(
        seed,
        budget,
        lambda s, m: np.linalg.norm(
            s.lazy(m * two_d, nu).reshape(m, two_d).astype(np.float64) @ w, axis=1
        ),
        threads=threads,
    )
    norms = np.concatenate(norms_chunks)
    kk = int(np.sum(norms <= radius))
    lo, hi = clopper_pearson(kk, budget, level)
    bound = 4.0 * math.exp(-(2.0**-12) * nu * k)
    op = float(batch_singular_values(w[None, :, :])[0, 0])
    hs = float(np.linalg.norm(w))
    median = float(np.median(norms))
    median_floor = math.sqrt(nu / 2.0) * hs / max(op, 1e-30) * (1.0 - slack)
    median_ok = median >= median_floor
    vacuous_tail = bound >= 1.0
    if not median_ok:
        verdict = VIOLATED
    elif vacuous_tail:
        verdict = VACUOUS
    elif hi <= bound:
        verdict = HOLDS
    elif lo > bound:
        verdict = VIOLATED
    else:
        verdict = INCONCLUSIVE
    notes = "vacuous-scale: tail bound >= 1 at this k" if vacuous_tail else ""
    return LemmaReport(
        lemma_id="HansonWright",
        verdict=verdict,
        lhs_hat=kk / budget,
        lhs_ci=(lo, hi),
        rhs_hat=bound,
        params={
            "nu": nu,
            "delta": delta,
            "k": k,
            "median": median,
            "median_floor": median_floor,
            "median_ok": median_ok,
            "samples": budget,
        },
        seed=seed,
        regime_tag=regime_tag,
        notes=notes,
    )


def verify_tensorization(
    w: np.ndarray,
    mu: float,
    beta: float,
    n: int,
    d: int,
    budget: int,
    seed: SeedSpec,
    threads: int | None = None,
    level: float = CI_LEVEL,
    regime_tag: str = "lab",
) -> LemmaReport:
    """Row anti-concentration tensorises:
    P(||H W||_HS <= b^2 sqrt((k+1)(n-d))) <= (2^5 e^{2 b^2 k} L(W^T tau, b sqrt(k+1)))^(n-d).

    W has k+2 columns; H is (n-d) x 2d with iid mu-lazy rows.  The Levy factor
    on the right is a candidate-center lower bound, which only makes the
    verdict more demanding.
    """
    if not 0 < beta < 0.125:
        raise ValueError("beta must be in (0, 1/8)")
    w = np.asarray(w, dtype=np.float64)
    two_d = w.shape[0]
    if two_d != 2 * d:
        raise ValueError("W must have 2 d rows")
    k = w.shape[1] - 2
    if k < 0:
        raise ValueError("W must have at least 2 columns")
    rows = n - d
    lhs_radius = beta * beta * math.sqrt((k + 1.0) * rows)

    def chunk_fn(stream: Stream, m: int) -> int:
        h = stream.lazy(m * rows * two_d, mu).reshape(m, rows, two_d).astype(np.float64)
        hw = h @ w
        hs2 = np.einsum("bij,bij->b", hw, hw)
        return int(np.sum(hs2 <= lhs_radius * lhs_radius))

    lhs = mc_event_count(seed.child("lhs"), budget, chunk_fn, threads=threads, level=level)

    from .concentration import levy_mc

    levy = levy_mc(
        _lazy_walk_sampler(w, mu),
        beta * math.sqrt(k + 1.0),
        budget,
        seed.child("levy"),
        threads=threads,
        level=level,
    )
    scale = 32.0 * math.exp(2.0 * beta * beta * k)
    rhs_hat = (scale * levy.p_hat) ** rows
    rhs_lo = (scale * levy.ci_low) ** rows
    rhs_hi = (scale * levy.ci_high) ** rows
    if rhs_lo >= 1.0:
        verdict = VACUOUS
    elif lhs.ci_high <= rhs_lo:
        verdict = HOLDS
    elif lhs.ci_low > rhs_hi:
        verdict = VIOLATED
    else:
        verdict = INCONCLUSIVE
    return LemmaReport(
        lemma_id="tensor",
        verdict=verdict,
        lhs_hat=lhs.p_hat,
        lhs_ci=(lhs.ci_low, lhs.ci_high),
        rhs_hat=rhs_hat,
        rhs_ci=(rhs_lo, rhs_hi),
        params={"beta": beta, "n": n, "d": d, "k": k, "mu": mu, "samples": budget},
        seed=seed,
        regime_tag=regime_tag,
    )


# ---------------------------------------------------------------------------
# Rank events for the rectangular block H = [H1, H2]
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RankEventSpec:
    """Event parameters for the robust-rank estimate.

    sigma_cut = c0 2^-4 sqrt(n); ball_radius = n; E_k is the event that
    exactly k singular values of H fall below the cut.
    """

    n: int
    d: int
    k: int
    c0: float

    def __post_init__(self):
        if not self.d < self.n:
            raise ValueError("need d < n")
        if not 0 <= self.k <= 2 * self.d:
            raise ValueError("need 0 <= k <= 2d")
        if self.n - self.d < 2 * self.d:
            raise ValueError("need n - d >= 2d so H is genuinely rectangular")

    @property
    def sigma_cut(self) -> float:
        return self.c0 * 2.0**-4 * math.sqrt(self.n)

    @property
    def ball_radius(self) -> float:
        return float(self.n)


@dataclass(frozen=True)
class RankEventResult:
    estimate: McEstimate
    occupancy: np.ndarray  # histogram over E_0..E_2d
    bound: float | None
    verdict: str
    report: LemmaReport


def rank_event_mc(
    spec: RankEventSpec,
    x,
    mu: float,
    budget: int,
    seed: SeedSpec,
    alpha: float = 0.1,
    N: float | None = None,
    R: float | None = None,
    threads: int | None = None,
    level: float = CI_LEVEL,
    regime_tag: str = "lab",
) -> RankEventResult:
    """Joint event MC: sigma_{2d-k+1}(H) <= cut and ||H1 X||, ||H2 X|| <= n.

    Side data: which E_j each sample fell in (exactly one per sample).  When
    D_alpha(r_n X) > 16 is certified and N is supplied, the estimate is
    compared against e^{-c0 n k / 4} (R / N)^(2n - 2d) under the active
    constants.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != spec.d:
        raise ValueError("X must have dimension d")
    n, d, k = spec.n, spec.d, spec.k
    two_d = 2 * d
    rows = n - d
    cut = spec.sigma_cut
    ball = spec.ball_radius

    def chunk_fn(stream: Stream, m: int):
        h = stream.lazy(m * rows * two_d, mu).reshape(m, rows, two_d).astype(np.float64)
        sig = batch_singular_values(h)  # (m, 2d), nonincreasing
        below = np.sum(sig < cut, axis=1)  # the E_j index per sample
        h1x = h[:, :, :d] @ x
        h2x = h[:, :, d:] @ x
        balls = (np.einsum("bi,bi->b", h1x, h1x) <= ball * ball) & (
            np.einsum("bi,bi->b", h2x, h2x) <= ball * ball
        )
        # sigma_{2d-k+1} <= cut means at least k of the 2d values below cut;
        # for k = 0 the condition is vacuous by the sigma_j = 0 convention.
        sing_cond = below >= k if k > 0 else np.ones(m, dtype=bool)
        hist = np.bincount(below, minlength=two_d + 1)
        return int(np.sum(sing_cond & balls)), hist

    results = run_chunked(seed, budget, chunk_fn, threads=threads)
    hits = sum(r[0] for r in results)
    occupancy = np.sum(np.stack([r[1] for r in results]), axis=0)
    est = McEstimate.from_count(hits, budget, seed, level)

    r_n = spec.c0 / (16.0 * math.sqrt(n))
    lcd_res = lcd(r_n * x, alpha, phi_max=16.0)
    bound = None
    verdict = INCONCLUSIVE
    notes = ""
    if R is None:
        R = 2.0**39 / spec.c0**3
    if not lcd_res.exceeds(16.0):
        verdict = VACUOUS
        notes = "D_alpha(r_n X) > 16 not certified; no bound asserted"
    elif N is None:
        verdict = VACUOUS
        notes = "no box scale N supplied; no bound asserted"
    else:
        bound = math.exp(-spec.c0 * n * k / 4.0) * (R / N) ** (2 * n - 2 * d)
        if bound >= 1.0:
            verdict = VACUOUS
            notes = "bound >= 1: trivially true"
        elif est.ci_high <= bound:
            verdict = HOLDS
        elif est.ci_low > bound:
            verdict = VIOLATED
    report = LemmaReport(
        lemma_id="rankH",
        verdict=verdict,
        lhs_hat=est.p_hat,
        lhs_ci=(est.ci_low, est.ci_high),
        rhs_hat=bound if bound is not None else math.nan,
        params={
            "n": n,
            "d": d,
            "k": k,
            "c0": spec.c0,
            "alpha": alpha,
            "N": N,
            "R": R,
            "lcd_status": lcd_res.status,
            "occupancy_total": int(occupancy.sum()),
            "samples": budget,
        },
        seed=seed,
        regime_tag=regime_tag,
        notes=notes,
    )
    return RankEventResult(
        estimate=est, occupancy=occupancy, bound=bound, verdict=verdict, report=report
    )


def lcd_rarity_experiment(
    d: int,
    N: int,
    kappa: float,
    alpha: float,
    budget: int,
    seed: SeedSpec,
    c0: float = 0.25,
    K: float = 16.0,
    n: int | None = None,
    grid_resolution: float = 0.5,
    threads: int | None = None,
    level: float = CI_LEVEL,
    regime_tag: str = "lab",
) -> LemmaReport:
    """P_X(D_alpha(r_n X) <= K) <= (2^20 alpha)^(d/4) for X uniform on the flat box.

    r_n = c0 2^-4 n^{-1/2} with n defaulting to d.  Guard rails: the bound
    must land in a measurable range, and the hypothesis d >= K^2/alpha is
    reported (it is unreachable at desk scale, which the report records
    rather than hides).
    """
    n = n or d
    rhs = (2.0**20 * alpha) ** (d / 4.0)
    params = {
        "d": d,
        "n": n,
        "N": N,
        "kappa": kappa,
        "alpha": alpha,
        "K": K,
        "c0": c0,
        "hypothesis_d_ok": d >= K * K / alpha,
        "samples": budget,
    }
    if alpha >= 2.0**-20:
        return LemmaReport(
            lemma_id="lcd-rare",
            verdict=VACUOUS,
            lhs_hat=0.0,
            rhs_hat=rhs,
            params=params,
            seed=seed,
            regime_tag=regime_tag,
            notes="2^20 alpha >= 1 makes the bound vacuous",
        )
    if rhs < 1e-3:
        suggested = (1e-1) ** (4.0 / d) / 2.0**20
        return LemmaReport(
            lemma_id="lcd-rare",
            verdict=PRECONDITIONS_UNMET,
            lhs_hat=0.0,
            rhs_hat=rhs,
            params=params,
            seed=seed,
            regime_tag=regime_tag,
            notes=(
                f"bound {rhs:.3g} is unmeasurable at desk budgets; "
                f"try alpha near {suggested:.3g}"
            ),
        )
    if not K * N < 2.0**d:
        return LemmaReport(
            lemma_id="lcd-rare",
            verdict=PRECONDITIONS_UNMET,
            lhs_hat=0.0,
            rhs_hat=rhs,
            params=params,
            seed=seed,
            regime_tag=regime_tag,
            notes="need K N < 2^d",
        )
    box = Box.flat(d, N, kappa)
    r_n = c0 * 2.0**-4 / math.sqrt(n)

    def chunk_fn(stream: Stream, m: int) -> int:
        pts = _box_points(box, stream, m)
        hits = 0
        for row in pts:
            # a coarse scan pitch is sound here: admissibility is carried by
            # the Lipschitz certificate, and sqrt(alpha d) is tiny, so clean
            # cells clear in one test while candidate cells subdivide
            res = lcd(
                r_n * row.astype(np.float64),
                alpha,
                phi_max=K,
                grid_resolution=grid_resolution,
            )
            # unresolved near-tangencies count as hits: conservative for the
            # upper-bound comparison
            if res.at_most(K) or (res.suspect_low is not None and res.suspect_low <= K):
                hits += 1
        return hits

    est = mc_event_count(seed, budget, chunk_fn, threads=threads, level=level)
    if est.ci_high <= rhs:
        verdict = HOLDS
    elif est.ci_low > rhs:
        verdict = VIOLATED
    else:
        verdict = INCONCLUSIVE
    return LemmaReport(
        lemma_id="lcd-rare",
        verdict=verdict,
        lhs_hat=est.p_hat,
        lhs_ci=(est.ci_low, est.ci_high),
        rhs_hat=rhs,
        params=params,
        seed=seed,
        regime_tag=regime_tag,
        notes="" if params["hypothesis_d_ok"] else "hypothesis d >= K^2/alpha unmet (lab regime)",
    )


def verify_projection_anticoncentration(
    n: int,
    d: int,
    k: int,
    c0: float,
    N0: int,
    budget: int,
    seed: SeedSpec,
    mu: float = 0.25,
    threads: int | None = None,
    level: float = CI_LEVEL,
    regime_tag: str = "lab",
) -> LemmaReport:
    """Qualitative rate check of the projection anti-concentration oracle.

    For a fixed H with a certified sigma-gap (sigma_{2d-k}(H) >= c0 sqrt(n)/16),
    P_X(||H^T X|| <= n) over box vectors X must decay as the box scale doubles
    with log-slope at most -(2d - k - 0.5) log 2, CI-aware.  The absolute
    constant of the underlying projection theorem is configuration, never
    asserted.
    """
    rows = n - d
    two_d = 2 * d
    cut = c0 * math.sqrt(n) / 16.0
    h = None
    for attempt in range(64):
        cand = (
            Stream(seed.child(f"H{attempt}"))
            .lazy(rows * two_d, mu)
            .reshape(rows, two_d)
            .astype(np.float64)
        )
        sig = batch_singular_values(cand[None, :, :])[0]
        if sig[two_d - k - 1] >= cut:
            h = cand
            break
    if h is None:
        return LemmaReport(
            lemma_id="LwO-for-AX",
            verdict=PRECONDITIONS_UNMET,
            lhs_hat=0.0,
            rhs_hat=0.0,
            params={"reason": "no H with the required sigma gap"},
            regime_tag=regime_tag,
            seed=seed,
        )

    estimates = []
    for i, scale in enumerate((N0, 2 * N0)):
        box = Box.flat(rows, scale, 2.0)

        def chunk_fn(stream: Stream, m: int, box=box) -> int:
            x = _box_points(box, stream, m).astype(np.float64)
            hx = x @ h  # rows of x against H^T
            return int(np.sum(np.einsum("bj,bj->b", hx, hx) <= n * n))

        estimates.append(
            mc_event_count(
                seed.child(f"N{i}"), budget, chunk_fn, threads=threads, level=level
            )
        )
    p1, p2 = estimates
    slope_bound = -(two_d - k - 0.5) * math.log(2.0)
    if p2.ci_high <= 0 or p1.ci_low <= 0:
        verdict = INCONCLUSIVE
        slope_hi = math.inf
    else:
        slope_hi = math.log(p2.ci_high / p1.ci_low)
        slope_lo = (
            math.log(p2.ci_low / p1.ci_high) if p2.ci_low > 0 else -math.inf
        )
        if slope_hi <= slope_bound:
            verdict = HOLDS
        elif slope_lo > slope_bound:
            verdict = VIOLATED
        else:
            verdict = INCONCLUSIVE
    return LemmaReport(
        lemma_id="LwO-for-AX",
        verdict=verdict,
        lhs_hat=math.log(p2.p_hat / p1.p_hat) if p1.p_hat > 0 and p2.p_hat > 0 else math.nan,
        lhs_ci=(float("nan"), slope_hi),
        rhs_hat=slope_bound,
        params={
            "n": n,
            "d": d,
            "k": k,
            "N0": N0,
            "p_N": p1.p_hat,
            "p_2N": p2.p_hat,
            "samples": budget,
        },
        seed=seed,
        regime_tag=regime_tag,
    )


def verify_second_moment(
    x,
    n: int,
    d: int,
    mu: float,
    budget: int,
    seed: SeedSpec,
    radius: float | None = None,
    threads: int | None = None,
    level: float = CI_LEVEL,
    regime_tag: str = "lab",
) -> LemmaReport:
    """(P_M(||M X|| <= n))^2 <= P_H(A1 and A2) with A1 the two H_i X balls of
    radius n and A2 the ball ||H^T X_[d+1,n]|| <= 2n."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != n:
        raise ValueError("X must have dimension n")
    radius = float(n) if radius is None else radius
    rows = n - d
    xd = x[:d]
    xr = x[d:]

    def m_chunk(stream: Stream, m: int) -> int:
        h = stream.lazy(m * rows * d, mu).reshape(m, rows, d).astype(np.float64)
        top = np.einsum("bij,i->bj", h, xr)
        bot = h @ xd
        norm2 = np.einsum("bj,bj->b", top, top) + np.einsum("bi,bi->b", bot, bot)
        return int(np.sum(norm2 <= radius * radius))

    lhs = mc_event_count(seed.child("M"), budget, m_chunk, threads=threads, level=level)

    def h_chunk(stream: Stream, m: int) -> int:
        h = stream.lazy(m * rows * 2 * d, mu).reshape(m, rows, 2 * d).astype(np.float64)
        h1x = h[:, :, :d] @ xd
        h2x = h[:, :, d:] @ xd
        a1 = (np.einsum("bi,bi->b", h1x, h1x) <= radius * radius) & (
            np.einsum("bi,bi->b", h2x, h2x) <= radius * radius
        )
        htx = np.einsum("bij,i->bj", h, xr)
        a2 = np.einsum("bj,bj->b", htx, htx) <= 4.0 * radius * radius
        return int(np.sum(a1 & a2))

    rhs = mc_event_count(seed.child("H"), budget, h_chunk, threads=threads, level=level)
    lhs_sq_hi = lhs.ci_high**2
    lhs_sq_lo = lhs.ci_low**2
    if lhs_sq_hi <= rhs.ci_low:
        verdict = HOLDS
    elif lhs_sq_lo > rhs.ci_high:
        verdict = VIOLATED
    else:
        verdict = INCONCLUSIVE
    return LemmaReport(
        lemma_id="2ndMoment",
        verdict=verdict,
        lhs_hat=lhs.p_hat**2,
        lhs_ci=(lhs_sq_lo, lhs_sq_hi),
        rhs_hat=rhs.p_hat,
        rhs_ci=(rhs.ci_low, rhs.ci_high),
        params={"n": n, "d": d, "mu": mu, "radius": radius, "samples": budget},
        seed=seed,
        regime_tag=regime_tag,
    )
