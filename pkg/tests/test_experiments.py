import json
import math
import os
from fractions import Fraction

import numpy as np
import pytest

from siglab.experiments import (
    CurveRow,
    fit_exponential,
    q_lower_diagnostic,
    rank_evolution,
    singularity_exhaustive,
    singularity_mc,
    verify_opnorm_concentration,
    verify_replacement_chain,
)
from siglab.rng import SeedSpec

FIXTURES = json.load(
    open(os.path.join(os.path.dirname(__file__), "fixtures_singularity.json"))
)["counts"]


def test_exhaustive_matches_fixtures():
    for n in range(1, 6):
        row = singularity_exhaustive(n)
        count, total = FIXTURES[str(n)]
        assert (row.count, row.total) == (count, total)
    assert singularity_exhaustive(1).count == 0
    assert Fraction(singularity_exhaustive(2).count, singularity_exhaustive(2).total) == Fraction(1, 2)
    with pytest.raises(ValueError):
        singularity_exhaustive(7)


def test_mc_agrees_with_exhaustive():
    for n in (2, 4, 5):
        exact = Fraction(*FIXTURES[str(n)])
        est = singularity_mc(n, 40_000, SeedSpec(91, f"mc{n}"))
        assert est.ci_low <= float(exact) <= est.ci_high
    # n = 6 sits beyond the frozen fixtures: enumerate it here and cross-check
    row6 = singularity_exhaustive(6)
    est6 = singularity_mc(6, 40_000, SeedSpec(91, "mc6"))
    assert est6.ci_low <= row6.p_hat <= est6.ci_high


def test_fit_exponential_synthetic():
    rows = [
        CurveRow(n=n, method="synthetic", count=1, total=1, p_hat=2.0**-n,
                 ci_low=2.0**-n * 0.99, ci_high=2.0**-n * 1.01, seed=None, samples=1)
        for n in range(4, 16)
    ]
    fit = fit_exponential(rows, (4, 15))
    assert fit.slope == pytest.approx(-math.log(2), abs=1e-9)
    # p_n = n^2 2^-n: closed-form weighted least squares oracle
    rows2 = [
        CurveRow(n=n, method="synthetic", count=1, total=1,
                 p_hat=n * n * 2.0**-n, ci_low=n * n * 2.0**-n * 0.99,
                 ci_high=n * n * 2.0**-n * 1.01, seed=None, samples=1)
        for n in range(4, 16)
    ]
    fit2 = fit_exponential(rows2, (4, 15))
    xs = np.arange(4, 16, dtype=float)
    ys = np.log(xs * xs * 2.0**-xs)
    slope_ref = np.polyfit(xs, ys, 1)[0]
    assert fit2.slope == pytest.approx(slope_ref, abs=1e-6)
    with pytest.raises(ValueError):
        fit_exponential(rows[:3], (4, 15))


def test_rank_evolution_exhaustive_exact():
    res = rank_evolution(3, "exhaustive", 0, None)
    assert res.master_verdict == "holds"
    assert res.interlacing_violations == 0
    assert res.lhs == float(Fraction(*FIXTURES["3"]))
    for rec in res.records:
        assert sum(rec.joint_counts.values()) == rec.total
        for (rm, rm1), _ in rec.joint_counts.items():
            assert 0 <= rm - rm1 <= 2


def test_rank_evolution_mc():
    res = rank_evolution(4, "monte-carlo", 20_000, SeedSpec(92, "re"), gamma=0.05)
    assert res.interlacing_violations == 0
    assert res.master_verdict in ("holds", "inconclusive")
    assert res.surrogate_reports
    assert "surrogate" in res.surrogate_reports[0].notes


def test_opnorm_concentration():
    rep = verify_opnorm_concentration(64, 400, SeedSpec(93, "op"))
    assert rep.verdict == "holds"
    assert 1.5 <= rep.params["mean_sigma1_over_sqrt_n"] <= 2.5
    with pytest.raises(ValueError):
        verify_opnorm_concentration(8, 100, SeedSpec(93, "op"))


def test_q_lower_diagnostic():
    rep = q_lower_diagnostic(6, 1.5, 4000, SeedSpec(94, "q"))
    assert rep.lhs_hat == 0.0  # gamma > 1 is impossible for rho
    rep = q_lower_diagnostic(6, 2.0**-6, 4000, SeedSpec(94, "q2"))
    # every rho is >= 2^-n: frequency equals the singularity frequency
    est = singularity_mc(6, 4000, SeedSpec(94, "q2"))
    assert rep.lhs_hat == pytest.approx(est.p_hat, abs=0.03)


def test_replacement_chain_trivial_t():
    v = np.ones(8) / math.sqrt(8)
    rep = verify_replacement_chain(v, 1.0, 2.0, 8, 2, 20_000, SeedSpec(95, "rep"))
    assert rep.verdict == "holds"
    assert rep.rhs_hat >= 1.0
    assert rep.params["sweep_violations"] == 0
