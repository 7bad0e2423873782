"""Constants ledger: the two parameter regimes.

The asymptotic regime of the source bounds (c0 <= 2^-24, n >= L^(64/c0^2)) is
unreachable on a desk, so every experiment runs under an explicitly tagged
regime.  "paper" enforces the published relations; "lab" holds desk-scale
stand-ins and is what the default suites use.  Verifiers refuse to mix the
two silently: every report carries the tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = ["RegimeConstants", "LAB", "paper_regime"]


@dataclass(frozen=True)
class RegimeConstants:
    kappa0: float
    kappa1: float
    c0: float
    L: float
    mu: float
    d: int | None
    alpha: float | None
    c: float
    delta_comp: float
    rho_comp: float
    regime_tag: str = "lab"
    # The source uses three different constants all named R; they are kept
    # apart here.  R_invert's absolute constant C is unspecified there, so
    # none of these carries a correctness claim in the lab regime.
    R_lcd: float = 4.0
    R_rank: float = 4.0
    R_invert: float = 4.0

    def __post_init__(self):
        if not 0 < self.kappa0 < 1 < self.kappa1:
            raise ValueError("need 0 < kappa0 < 1 < kappa1")
        if not 0 < self.mu <= 1:
            raise ValueError("mu must be in (0,1]")
        if self.d is not None and self.d < 1:
            raise ValueError("d must be >= 1")
        if self.regime_tag == "paper":
            if self.c0 > 2.0**-24:
                raise ValueError("paper regime requires c0 <= 2^-24")

    def gamma(self, n: int) -> float:
        """gamma = e^{-c n}, the structured-vector cutoff."""
        return math.exp(-self.c * n)

    def cover_kappa(self) -> float:
        """Aspect ratio for box covers: max(kappa1/kappa0, 2^8 kappa0^-4)."""
        return max(self.kappa1 / self.kappa0, 2.0**8 * self.kappa0**-4.0)

    def with_d_for(self, n: int) -> "RegimeConstants":
        if self.regime_tag == "paper":
            return replace(self, d=math.ceil(self.c0**2 * n / 2))
        return self


#: Desk-scale defaults.  alpha is tuned per experiment and left unset here.
LAB = RegimeConstants(
    kappa0=0.5,
    kappa1=2.0,
    c0=0.25,
    L=2.0,
    mu=0.25,
    d=None,
    alpha=None,
    c=0.05,
    delta_comp=0.25,
    rho_comp=0.5,
    regime_tag="lab",
)


def paper_regime(n: int, rho: float = 0.5, delta: float = 0.16) -> RegimeConstants:
    """Published relations with the (uncomputed) compressible constants supplied.

    kappa0 = rho, kappa1 = delta^{-1/2}/2, c0 = min(2^-24, rho sqrt(delta)),
    d = ceil(c0^2 n / 2).
    """
    c0 = min(2.0**-24, rho * math.sqrt(delta))
    return RegimeConstants(
        kappa0=rho,
        kappa1=delta**-0.5 / 2,
        c0=c0,
        L=2.0,
        mu=0.25,
        d=math.ceil(c0**2 * n / 2),
        alpha=None,
        c=2.0**-30,
        delta_comp=delta,
        rho_comp=rho,
        regime_tag="paper",
    )
