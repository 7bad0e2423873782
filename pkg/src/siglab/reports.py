"""Lemma report records and the CSV schemas shared by the CLI.

Column orders (documented contract, also in the README):
  singularity curve: n,method,count,total,p_hat,ci_low,ci_high,seed,samples
  rank evolution:    m,rk_m,rk_m_minus_1,count,total
  lemma reports:     lemma_id,regime_tag,verdict,lhs_hat,lhs_ci_low,lhs_ci_high,
                     rhs_hat,rhs_ci_low,rhs_ci_high,params_json,seed
  net census:        point_hash,p_inner_hat,ci_low,ci_high,verdict
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .rng import SeedSpec

__all__ = [
    "HOLDS",
    "VIOLATED",
    "INCONCLUSIVE",
    "VACUOUS",
    "PRECONDITIONS_UNMET",
    "LemmaReport",
    "format_value",
    "SINGULARITY_HEADER",
    "RANK_HEADER",
    "LEMMA_HEADER",
    "CENSUS_HEADER",
    "point_hash",
]

HOLDS = "holds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"
VACUOUS = "vacuous"
PRECONDITIONS_UNMET = "preconditions-unmet"

SINGULARITY_HEADER = [
    "n",
    "method",
    "count",
    "total",
    "p_hat",
    "ci_low",
    "ci_high",
    "seed",
    "samples",
]
RANK_HEADER = ["m", "rk_m", "rk_m_minus_1", "count", "total"]
LEMMA_HEADER = [
    "lemma_id",
    "regime_tag",
    "verdict",
    "lhs_hat",
    "lhs_ci_low",
    "lhs_ci_high",
    "rhs_hat",
    "rhs_ci_low",
    "rhs_ci_high",
    "params_json",
    "seed",
]
CENSUS_HEADER = ["point_hash", "p_inner_hat", "ci_low", "ci_high", "verdict"]


def format_value(x) -> str:
    """Shortest round-trip representation; identical bytes across runs."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def point_hash(coords) -> str:
    h = hashlib.blake2b(digest_size=8)
    h.update(",".join(str(int(c)) for c in coords).encode())
    return h.hexdigest()


@dataclass(frozen=True)
class LemmaReport:
    lemma_id: str
    verdict: str
    lhs_hat: float
    rhs_hat: float
    lhs_ci: tuple = (float("nan"), float("nan"))
    rhs_ci: tuple = (float("nan"), float("nan"))
    regime_tag: str = "lab"
    params: dict = field(default_factory=dict)
    seed: SeedSpec | None = None
    notes: str = ""

    @property
    def ok(self) -> bool:
        """True unless the verdict is an outright violation."""
        return self.verdict != VIOLATED

    def to_row(self) -> list[str]:
        params = dict(self.params)
        if self.notes:
            params["notes"] = self.notes
        return [
            self.lemma_id,
            self.regime_tag,
            self.verdict,
            format_value(float(self.lhs_hat)),
            format_value(float(self.lhs_ci[0])),
            format_value(float(self.lhs_ci[1])),
            format_value(float(self.rhs_hat)),
            format_value(float(self.rhs_ci[0])),
            format_value(float(self.rhs_ci[1])),
            json.dumps(params, sort_keys=True, default=str),
            str(self.seed) if self.seed else "",
        ]
