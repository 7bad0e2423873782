import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siglab.concentration import (
    levy_exact_discrete,
    levy_mc,
    levy_opnorm_mc,
    rho_eps_exact,
    rho_exact,
    small_ball_mc,
    threshold_estimate,
    threshold_lower_bound,
)
from siglab.rng import SeedSpec, Stream


def naive_rho(v, eps=None):
    """Independent oracle: full itertools enumeration with per-window sweep."""
    v = list(v)
    sums = sorted(
        sum(e * x for e, x in zip(signs, v))
        for signs in itertools.product((-1, 1), repeat=len(v))
    )
    n = len(sums)
    if eps is None:
        best = 0
        i = 0
        while i < n:
            j = i
            while j < n and abs(sums[j] - sums[i]) <= 1e-9:
                j += 1
            best = max(best, j - i)
            i = j
        return best / n
    best = 0
    for i in range(n):
        count = sum(1 for s in sums if sums[i] <= s < sums[i] + 2 * eps)
        best = max(best, count)
    return best / n


def test_rho_examples():
    assert rho_exact([1.0]) == 0.5
    assert rho_exact([1, 1, 1, 1]) == 0.375
    assert rho_eps_exact([1.0], 3.0) == 1.0
    assert rho_eps_exact([1, 1, 1, 1], 0.0) == rho_exact([1, 1, 1, 1])
    assert rho_eps_exact([1, 1, 1, 1], 1.5) == pytest.approx(10 / 16)


def test_rho_matches_naive_oracle():
    stream = Stream(SeedSpec(21, "rho"))
    for trial in range(60):
        n = 2 + int(stream.integers(1, 9)[0])
        v = (stream.integers(n, 11) - 5).astype(float)
        assert rho_exact(v) == pytest.approx(naive_rho(v), abs=1e-12)
        eps = float(stream.uniform(1)[0] * 2)
        if eps > 0:
            assert rho_eps_exact(v, eps) == pytest.approx(naive_rho(v, eps), abs=1e-12)


def test_rho_dimension_cap():
    with pytest.raises(ValueError, match="rho_mc"):
        rho_exact(np.ones(27))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(-6, 6).filter(bool), min_size=2, max_size=8),
    st.floats(0.1, 3.0),
)
def test_rho_invariances(vals, scale):
    v = np.array(vals, dtype=float)
    base = rho_exact(v)
    assert rho_exact(scale * v) == pytest.approx(base, abs=1e-12)
    perm = np.random.default_rng(0).permutation(v.size)
    assert rho_exact(v[perm]) == pytest.approx(base, abs=1e-12)
    assert rho_exact(-v) == pytest.approx(base, abs=1e-12)
    # rho <= rho_eps, and rho_eps nondecreasing in eps
    assert base <= rho_eps_exact(v, 0.3) + 1e-12
    assert rho_eps_exact(v, 0.3) <= rho_eps_exact(v, 0.9) + 1e-12


def test_erdos_bound_at_n10():
    bound = 2**-10 * math.comb(10, 5)
    assert bound == pytest.approx(0.24609375)
    stream = Stream(SeedSpec(22, "erdos"))
    for _ in range(200):
        v = stream.normals(10)
        v[np.abs(v) < 1e-3] = 1.0
        assert rho_exact(v) <= bound + 1e-12
    assert rho_exact(np.ones(10)) == pytest.approx(bound)


def test_levy_examples():
    zero = lambda stream, m: np.zeros((m, 1))
    est = levy_mc(zero, 0.5, 2000, SeedSpec(23, "levy"))
    assert est.p_hat == 1.0

    def rademacher(stream, m):
        return stream.signs(m).astype(float)[:, None]

    est = levy_mc(rademacher, 0.5, 20_000, SeedSpec(24, "levy"))
    assert est.ci_low <= 0.5 <= est.ci_high

    def walk(stream, m):
        s = stream.signs(4 * m).reshape(m, 4).astype(float)
        return (s @ np.ones(4))[:, None]

    est = levy_mc(walk, 0.5, 50_000, SeedSpec(25, "levy"))
    assert est.ci_low <= 0.375 <= est.ci_high
    assert abs(est.p_hat - 0.375) < 0.02


def test_levy_opnorm_monotone_and_cap():
    v = np.zeros(10)
    v[0] = 1.0
    e1 = levy_opnorm_mc(v, 1.0, 4000, SeedSpec(26, "op"))
    e2 = levy_opnorm_mc(v, 2.0, 4000, SeedSpec(26, "op"))
    assert e1.p_hat <= e2.ci_high + 0.02
    with pytest.raises(ValueError):
        levy_opnorm_mc(2 * v, 1.0, 4000, SeedSpec(26, "op"))


def test_levy_opnorm_huge_radius_measures_norm_cap():
    # at t >= 2n the ball event is certain, so the estimate is P(||A|| <= 4 sqrt n)
    n = 50
    v = np.zeros(n)
    v[0] = 1.0
    est = levy_opnorm_mc(v, 2.0 * n, 1000, SeedSpec(29, "op50"), n_centers=4)
    assert est.p_hat > 0.99


def test_rho_mc_agrees_with_exact():
    from siglab.concentration import rho_mc

    v = np.array([1.0, 1.0, 1.0, 1.0])
    est = rho_mc(v, 50_000, SeedSpec(30, "rhomc"))
    # candidate-center lower-bound protocol: must bracket the true atom mass
    assert est.ci_low <= rho_exact(v) <= est.ci_high + 0.02


def test_levy_exact_discrete_simple():
    atoms = np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]])
    probs = np.array([0.5, 0.3, 0.2])
    assert levy_exact_discrete(atoms, probs, 0.1) == pytest.approx(0.5)
    assert levy_exact_discrete(atoms, probs, 0.51) == pytest.approx(0.8)
    assert levy_exact_discrete(atoms, probs, 10.0) == pytest.approx(1.0)


def test_small_ball_closed_form():
    # t = 0, v = e1: P(||Mv|| = 0) = P(first H1 column is zero) = (1-mu)^(n-d)
    n, d, mu = 8, 2, 0.25
    v = np.zeros(n)
    v[0] = 1.0
    est = small_ball_mc(v, 0.0, n, d, mu, 200_000, SeedSpec(27, "sb"))
    assert est.ci_low <= (1 - mu) ** (n - d) <= est.ci_high
    big = small_ball_mc(v, n, n, d, mu, 2000, SeedSpec(27, "sb2"))
    assert big.p_hat == 1.0


def test_threshold_bracket_against_binomial_oracle():
    from scipy.stats import binom

    v = np.zeros(8)
    v[0] = 1.0
    th = threshold_estimate(
        v, 2.0, 8, 2, 100_000, SeedSpec(28, "th"), max_budget=4_000_000
    )
    assert not th.inconclusive

    def g(t):
        return binom.cdf(math.floor(8 * t * t), 6, 0.25) - (8 * t) ** 8

    assert g(th.t_low) >= 0
    assert g(th.t_high) < 0
    # universal bounds
    assert th.t_low >= threshold_lower_bound(2.0, 8, 2, 0.25) - 1e-12
    assert th.t_high <= 1 / 8 + 1e-12
