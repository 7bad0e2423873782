import math

import numpy as np
import pytest

from siglab.corenum import torus_norm
from siglab.lcd import (
    RankEventSpec,
    augmented_matrix,
    lcd,
    rank_event_mc,
    replay_certificate,
    verify_cond_walk_lcd,
    verify_hanson_wright,
    verify_second_moment,
    verify_tensorization,
)
from siglab.rng import Box, SeedSpec, Stream, _box_points, sample_ortho_frame


def grid_oracle_first_admissible(v, alpha, phi_max, step):
    """Brute-force grid scan of the working-mode defining inequality."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    sqrt_ad = math.sqrt(alpha * v.size)
    phi = step
    while phi <= phi_max:
        if torus_norm(phi * v) <= min(phi * norm / 2.0, sqrt_ad):
            return phi
        phi += step
    return None


def test_lcd_e1():
    d = 9
    e1 = np.zeros(d)
    e1[0] = 1.0
    assert math.sqrt(0.2 * d) >= 1 / 3
    res = lcd(e1, 0.2, phi_max=4.0, grid_resolution=1e-3)
    assert res.status == "certified"
    assert res.bracket_low <= 2 / 3 <= res.bracket_high
    assert res.bracket_high - res.bracket_low <= 1e-5


def test_lcd_scale_law():
    stream = Stream(SeedSpec(51, "lcd"))
    for _ in range(20):
        v = stream.normals(8)
        v /= np.linalg.norm(v)
        base = lcd(v, 0.15, phi_max=32.0, grid_resolution=1e-3)
        for lam in (0.5, 2.0, 10.0):
            scaled = lcd(
                lam * v, 0.15, phi_max=32.0 / lam, grid_resolution=1e-3 / lam
            )
            assert scaled.status == base.status
            if base.status == "certified":
                rel = abs(scaled.witness_phi - base.witness_phi / lam) / (
                    base.witness_phi / lam
                )
                assert rel <= 1e-6


def test_lcd_three_four_five():
    v = np.array([0.6, 0.8])
    res = lcd(v, 0.51, phi_max=6.0, grid_resolution=1e-4)
    # phi = 5 is admissible (torus norm of (3,4) is zero), and the certified
    # bracket must agree with a brute-force grid oracle below it
    assert torus_norm(5 * v) < 1e-12
    assert res.status == "certified"
    oracle = grid_oracle_first_admissible(v, 0.51, 6.0, 1e-4)
    assert oracle is not None
    assert res.bracket_high <= oracle + 1e-4


def test_lcd_monotone_in_alpha():
    stream = Stream(SeedSpec(52, "lcd"))
    for _ in range(100):
        v = stream.normals(6)
        v /= np.linalg.norm(v)
        lo = lcd(v, 0.05, phi_max=64.0)
        hi = lcd(v, 0.3, phi_max=64.0)
        if lo.status == "certified" and hi.status == "certified":
            assert hi.bracket_high <= lo.bracket_high + 1e-6


def test_lcd_modes_agree_when_witness_nonzero():
    stream = Stream(SeedSpec(53, "lcd"))
    agreements = 0
    for _ in range(100):
        v = stream.normals(6)
        v /= np.linalg.norm(v)
        work = lcd(v, 0.2, phi_max=32.0)
        intro = lcd(v, 0.2, phi_max=32.0, mode="intro")
        if work.status == "certified" and intro.status == "certified":
            nearest = np.rint(work.witness_phi * v)
            if np.any(nearest != 0):
                agreements += 1
                assert abs(work.witness_phi - intro.witness_phi) <= max(
                    1e-3, 1e-3 * work.witness_phi
                ) or intro.witness_phi <= work.witness_phi + 1e-6
    assert agreements > 0


def test_lcd_degenerate_and_cap():
    res = lcd(np.zeros(4) + 1e-15, 0.1)
    assert res.status == "degenerate"
    # tiny coordinates: no dilate below phi_max can wrap
    res = lcd(np.full(4, 1e-3), 0.001, phi_max=16.0)
    assert res.status == "capped-at-phi-max"
    assert res.bracket_low == 16.0


def test_lcd_certificate_replay():
    stream = Stream(SeedSpec(54, "lcd"))
    for _ in range(10):
        v = stream.normals(8)
        v /= np.linalg.norm(v)
        res = lcd(v, 0.15, phi_max=32.0, collect_certificate=True)
        assert replay_certificate(res, v, 0.15)


def test_augmented_matrix_shape():
    y = np.arange(1.0, 4.0)
    w = np.ones((6, 2))
    wy = augmented_matrix(w, y)
    assert wy.shape == (6, 4)
    assert np.array_equal(wy[:, 2], np.concatenate([np.zeros(3), y]))
    assert np.array_equal(wy[:, 3], np.concatenate([y, np.zeros(3)]))


def test_cond_walk_preconditions_and_vacuous():
    d = 8
    y = np.ones(d) * 1e-9  # violates ||Y|| >= 2^-10 c0 / t
    w = np.zeros((2 * d, 0))
    rep = verify_cond_walk_lcd(y, w, c0=0.25, alpha=0.05, t=0.1, budget=2000,
                               seed=SeedSpec(55, "cw"))
    assert rep.verdict == "preconditions-unmet"
    # witness below 16: vacuous
    y = np.zeros(d)
    y[0] = 1.0
    rep = verify_cond_walk_lcd(y, w, c0=0.25, alpha=0.2, t=0.1, budget=2000,
                               seed=SeedSpec(56, "cw"))
    assert rep.verdict == "vacuous"


def test_cond_walk_k0_reduction_holds():
    # k = 0 collapses to the two-sided scalar-walk statement
    d = 8
    x = _box_points(Box.flat(d, 256, 2.0), Stream(SeedSpec(57, "cw")), 1)[0]
    y = (0.25 / (16 * math.sqrt(d))) * x.astype(float)
    rep = verify_cond_walk_lcd(y, np.zeros((2 * d, 0)), c0=0.25, alpha=1e-4,
                               t=0.1, budget=60_000, seed=SeedSpec(58, "cw"), R=4.0)
    assert rep.verdict in ("holds", "vacuous")
    assert rep.verdict == "holds"


def test_hanson_wright_preconditions_and_median():
    u = sample_ortho_frame(64, 16, SeedSpec(59, "hw")).matrix
    rep = verify_hanson_wright(u, nu=0.25, delta=0.2, budget=2000,
                               seed=SeedSpec(60, "hw"))
    assert rep.verdict == "preconditions-unmet"  # delta >= sqrt(nu)/16
    rep = verify_hanson_wright(u, nu=0.25, delta=0.02, budget=50_000,
                               seed=SeedSpec(61, "hw"))
    assert rep.verdict in ("holds", "vacuous")
    assert rep.params["median_ok"]
    # orthonormal columns: median >= sqrt(nu/2) sqrt(k) within slack
    assert rep.params["median"] >= math.sqrt(0.25 / 2) * 4.0 * 0.9


def test_tensorization_trivial_and_single_row():
    w = np.zeros((8, 3))
    rep = verify_tensorization(w, mu=0.25, beta=0.1, n=6, d=4, budget=2000,
                               seed=SeedSpec(62, "tz"))
    assert rep.verdict == "vacuous"  # RHS = 32^(n-d) >= 1, LHS = 1
    assert rep.lhs_hat == 1.0
    w = Stream(SeedSpec(63, "tz")).signs(16 * 3).reshape(16, 3).astype(float)
    rep = verify_tensorization(w, mu=0.25, beta=0.1, n=9, d=8, budget=50_000,
                               seed=SeedSpec(64, "tz"))
    assert rep.verdict in ("holds", "vacuous")
    with pytest.raises(ValueError):
        verify_tensorization(w, mu=0.25, beta=0.2, n=9, d=8, budget=2000,
                             seed=SeedSpec(65, "tz"))


def test_rank_event_examples():
    spec = RankEventSpec(n=16, d=4, k=0, c0=0.25)
    x = np.array([5.0, -6.0, 7.0, -5.0])
    res = rank_event_mc(spec, x, 0.25, 5000, SeedSpec(66, "re"), alpha=1e-4,
                        N=4.0, R=4.0)
    # k = 0: the sigma condition is vacuous, the event is the ball event
    assert res.occupancy.sum() == 5000
    spec1 = RankEventSpec(n=16, d=4, k=1, c0=0.25)
    res1 = rank_event_mc(spec1, x, 0.25, 5000, SeedSpec(66, "re"), alpha=1e-4,
                         N=4.0, R=4.0)
    assert res1.estimate.p_hat <= res.estimate.p_hat + 1e-12
    # huge ball radius: event reduces to the sigma condition alone
    with pytest.raises(ValueError):
        RankEventSpec(n=10, d=4, k=1, c0=0.25)  # n - d < 2d


def test_second_moment_trivial():
    n, d = 12, 3
    rep = verify_second_moment(np.zeros(n), n, d, 0.25, 2000, SeedSpec(67, "sm"))
    assert rep.lhs_hat == 1.0 and rep.rhs_hat == 1.0
    rep = verify_second_moment(np.ones(n) * 0.001, n, d, 0.25, 2000,
                               SeedSpec(68, "sm"), radius=1e6)
    assert rep.lhs_hat == 1.0 and rep.rhs_hat == 1.0
