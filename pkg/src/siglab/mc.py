"""Deterministic, chunked Monte Carlo engine.

The budget is split into fixed-size chunks; chunk i draws from Philox counter
block i of the stream.  Workers may process chunks in any order and in any
number of threads: partial results are folded in chunk order, so the final
numbers are identical for every thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from scipy.stats import beta as _beta

from .rng import SeedSpec, Stream

__all__ = [
    "CHUNK",
    "McEstimate",
    "clopper_pearson",
    "wilson_interval",
    "hoeffding_mean_ci",
    "default_threads",
    "run_chunked",
    "mc_event_count",
    "mc_mean",
]

CHUNK = 1 << 14
CI_LEVEL = 0.99

THREADS_ENV = "SIGLAB_THREADS"


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def clopper_pearson(k: int, n: int, level: float = CI_LEVEL) -> tuple[float, float]:
    """Exact binomial two-sided confidence interval."""
    if not 0 <= k <= n or n <= 0:
        raise ValueError("need 0 <= k <= n, n > 0")
    alpha = 1.0 - level
    lo = 0.0 if k == 0 else float(_beta.ppf(alpha / 2.0, k, n - k + 1))
    hi = 1.0 if k == n else float(_beta.ppf(1.0 - alpha / 2.0, k + 1, n - k))
    return lo, hi


def wilson_interval(k: int, n: int, level: float = CI_LEVEL) -> tuple[float, float]:
    """Wilson score interval (used for census fractions)."""
    from scipy.special import ndtri

    z = float(ndtri(1.0 - (1.0 - level) / 2.0))
    p = k / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def hoeffding_mean_ci(
    mean: float, n: int, level: float = CI_LEVEL, span: float = 1.0
) -> tuple[float, float]:
    """Two-sided Hoeffding interval for the mean of a [0, span] variable."""
    half = span * math.sqrt(math.log(2.0 / (1.0 - level)) / (2.0 * n))
    return max(0.0, mean - half), min(span, mean + half)


@dataclass(frozen=True)
class McEstimate:
    """Probability (or expectation) estimate with a two-sided CI."""

    p_hat: float
    ci_low: float
    ci_high: float
    samples: int
    seed: SeedSpec
    method: str = "monte-carlo"

    def __post_init__(self):
        if not self.ci_low <= self.p_hat <= self.ci_high:
            raise ValueError("CI must contain the point estimate")

    @staticmethod
    def from_count(
        k: int, n: int, seed: SeedSpec, level: float = CI_LEVEL
    ) -> "McEstimate":
        lo, hi = clopper_pearson(k, n, level)
        return McEstimate(p_hat=k / n, ci_low=lo, ci_high=hi, samples=n, seed=seed)

    @staticmethod
    def exact(value: float, seed: SeedSpec, samples: int = 0) -> "McEstimate":
        return McEstimate(
            p_hat=value,
            ci_low=value,
            ci_high=value,
            samples=samples,
            seed=seed,
            method="exact",
        )


def run_chunked(seed: SeedSpec, budget: int, chunk_fn, threads: int | None = None):
    """Map chunk_fn(stream, size) over the budget; fold results in chunk order.

    chunk_fn must be a pure function of its stream and size.  Returns the list
    of per-chunk results, ordered by chunk index.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    sizes = [CHUNK] * (budget // CHUNK)
    if budget % CHUNK:
        sizes.append(budget % CHUNK)
    threads = threads if threads is not None else default_threads()

    def job(i: int):
        return chunk_fn(Stream(seed, chunk=i), sizes[i])

    if threads <= 1 or len(sizes) == 1:
        return [job(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, range(len(sizes))))


def mc_event_count(
    seed: SeedSpec,
    budget: int,
    event_fn,
    threads: int | None = None,
    level: float = CI_LEVEL,
) -> McEstimate:
    """Estimate P(event) where event_fn(stream, m) returns the hit count."""
    counts = run_chunked(seed, budget, event_fn, threads=threads)
    k = int(sum(int(c) for c in counts))
    return McEstimate.from_count(k, budget, seed, level)


def mc_mean(
    seed: SeedSpec,
    budget: int,
    sum_fn,
    threads: int | None = None,
    level: float = CI_LEVEL,
    span: float = 1.0,
) -> McEstimate:
    """Estimate E[X] for X in [0, span]; sum_fn(stream, m) returns the chunk sum."""
    sums = run_chunked(seed, budget, sum_fn, threads=threads)
    mean = float(sum(float(s) for s in sums)) / budget
    lo, hi = hoeffding_mean_ci(mean, budget, level, span)
    return McEstimate(p_hat=mean, ci_low=lo, ci_high=hi, samples=budget, seed=seed)
