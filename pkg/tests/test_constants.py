import math

import pytest

from siglab.constants import LAB, RegimeConstants, paper_regime


def test_lab_defaults_valid():
    assert LAB.regime_tag == "lab"
    assert 0 < LAB.kappa0 < 1 < LAB.kappa1
    assert LAB.cover_kappa() == max(LAB.kappa1 / LAB.kappa0, 2**8 * LAB.kappa0**-4)
    assert LAB.gamma(10) == pytest.approx(math.exp(-0.05 * 10))


def test_paper_regime_relations():
    reg = paper_regime(1_000_000)
    assert reg.regime_tag == "paper"
    assert reg.c0 <= 2.0**-24
    assert reg.d == math.ceil(reg.c0**2 * 1_000_000 / 2)


def test_paper_regime_rejects_large_c0():
    with pytest.raises(ValueError):
        RegimeConstants(
            kappa0=0.5, kappa1=2.0, c0=0.25, L=2.0, mu=0.25, d=None,
            alpha=None, c=0.05, delta_comp=0.25, rho_comp=0.5,
            regime_tag="paper",
        )


def test_field_validation():
    with pytest.raises(ValueError):
        RegimeConstants(
            kappa0=1.5, kappa1=2.0, c0=0.25, L=2.0, mu=0.25, d=None,
            alpha=None, c=0.05, delta_comp=0.25, rho_comp=0.5,
        )
    with pytest.raises(ValueError):
        RegimeConstants(
            kappa0=0.5, kappa1=2.0, c0=0.25, L=2.0, mu=1.5, d=None,
            alpha=None, c=0.05, delta_comp=0.25, rho_comp=0.5,
        )
