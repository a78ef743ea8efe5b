"""Download-cost bounds for leaky private information retrieval.

Closed-form achievable and converse download costs (bits downloaded per
message bit) as functions of the system shape (N databases, K messages)
and the two privacy budgets: eps bounds the likelihood ratio any database
can form about the desired index, delta bounds the information the user
may learn about the undesired messages, in bits per message bit.

Each side has a leakage threshold (delta1 for the achievable scheme,
delta2 for the converse) beyond which extra delta buys nothing: the cost
curve is flat and no shared randomness is required. Below the threshold
the cost falls linearly in delta and the databases must share a key of
alpha1 (resp. alpha2) L bits that the user never sees.

All functions take a SystemParams and treat eps at or above its cap as
infinite, evaluating exact limits instead of overflowing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .params import SystemParams

# Comparison tolerance used for regime classification at the PIR point.
REL_TOL = 1e-9


def _require_multi_db(params: SystemParams) -> None:
    if params.n_databases < 2:
        raise ValueError(
            "bounds need n_databases >= 2; the single-database setting is "
            "degenerate, see single_server_cost"
        )


def delta1_threshold(params: SystemParams) -> float:
    """Smallest delta at which the achievable scheme needs no shared key.

    Equals (N^(K-1) - 1) / ((N-1) (e^eps + N^(K-1) - 1)); decreasing in
    eps, 0 in the eps -> infinity limit.
    """
    _require_multi_db(params)
    n, m = params.n_databases, params.n_databases ** (params.n_messages - 1)
    e = params.exp_eps()
    if math.isinf(e):
        return 0.0
    return (m - 1) / ((n - 1) * (e + m - 1))


def delta2_threshold(params: SystemParams) -> float:
    """Converse-side counterpart of delta1_threshold.

    Equals (F^(K-1) - 1) / ((F - 1) F^(K-1)) with F = N e^eps; never
    exceeds delta1_threshold.
    """
    _require_multi_db(params)
    e = params.exp_eps()
    if math.isinf(e):
        return 0.0
    f = params.n_databases * e
    fk = f ** (params.n_messages - 1)
    return (fk - 1) / ((f - 1) * fk)


def alpha1_rate(params: SystemParams) -> float:
    """Shared-key rate (key bits per message bit) of the achievable scheme.

    1/(N-1) - delta (e^eps + N^(K-1) - 1)/(N^(K-1) - 1), clamped at zero;
    exactly zero for delta >= delta1_threshold, and zero for all delta in
    the eps -> infinity limit.
    """
    _require_multi_db(params)
    e = params.exp_eps()
    if math.isinf(e):
        return 0.0
    if params.delta >= delta1_threshold(params):
        return 0.0
    n, m = params.n_databases, params.n_databases ** (params.n_messages - 1)
    return max(0.0, 1.0 / (n - 1) - params.delta * (e + m - 1) / (m - 1))


def alpha2_rate(params: SystemParams) -> float:
    """Converse lower bound on the shared-key rate; <= alpha1_rate."""
    _require_multi_db(params)
    e = params.exp_eps()
    if math.isinf(e):
        return 0.0
    if params.delta >= delta2_threshold(params):
        return 0.0
    f = params.n_databases * e
    fk = f ** (params.n_messages - 1)
    return max(0.0, 1.0 / (f - 1) - params.delta * fk / (fk - 1))


def d_upper(params: SystemParams) -> float:
    """Achievable download cost in bits per message bit.

    1 + 1/(N-1) - delta e^eps/(N^(K-1) - 1) for delta below
    delta1_threshold; flat at 1 + delta1_threshold beyond it.
    """
    _require_multi_db(params)
    n, m = params.n_databases, params.n_databases ** (params.n_messages - 1)
    e = params.exp_eps()
    d1 = delta1_threshold(params)
    if params.delta >= d1:
        return 1.0 + d1
    return 1.0 + 1.0 / (n - 1) - params.delta * e / (m - 1)


def d_lower(params: SystemParams) -> float:
    """Converse download cost in bits per message bit.

    1 + 1/(F-1) - delta/(F^(K-1) - 1) with F = N e^eps for delta below
    delta2_threshold; flat at 1 + delta2_threshold beyond it.
    """
    _require_multi_db(params)
    e = params.exp_eps()
    d2 = delta2_threshold(params)
    if params.delta >= d2:
        return 1.0 + d2
    f = params.n_databases * e
    fk = f ** (params.n_messages - 1)
    return 1.0 + 1.0 / (f - 1) - params.delta / (fk - 1)


def gap_ratio(params: SystemParams) -> tuple[float, float]:
    """(d_upper / d_lower, multiplicative cap (N - e^-eps)/(N - 1)).

    The ratio never exceeds the cap and equals 1 at eps = 0, where the
    two bounds coincide for every delta.
    """
    _require_multi_db(params)
    n = params.n_databases
    inv_e = 0.0 if params.eps_unbounded else math.exp(-params.eps)
    cap = (n - inv_e) / (n - 1)
    return d_upper(params) / d_lower(params), cap


@dataclass(frozen=True)
class SingleServerOutcome:
    """Result of the one-database setting: feasible only for delta >= K-1."""

    feasible: bool
    cost: float


def single_server_cost(n_messages: int, delta: float) -> SingleServerOutcome:
    """Optimal cost with a single database, any eps.

    With one server and delta < K - 1 no finite download suffices; once
    delta >= K - 1 the user can simply download everything (cost K).
    """
    if n_messages < 2:
        raise ValueError("n_messages must be >= 2")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if delta < n_messages - 1:
        return SingleServerOutcome(False, math.inf)
    return SingleServerOutcome(True, float(n_messages))


class Regime(Enum):
    SPIR = "SPIR"
    PIR = "PIR"
    L_PIR = "L-PIR"
    LEAKY_DB = "LeakyDB"
    NO_PRIVACY = "NoPrivacy"
    GENERAL = "General"


@dataclass(frozen=True)
class RegimeInfo:
    regime: Regime
    reference_cost: Optional[float]


def classify_regime(params: SystemParams) -> RegimeInfo:
    """Name the privacy regime and attach its closed-form cost if it has one.

    eps = 0 and delta = 0 (exact) is symmetric PIR; eps = 0 with delta at
    the keyless threshold (relative tolerance 1e-9) is classic PIR; eps = 0
    below the threshold trades key for leakage (LeakyDB, where both bounds
    agree); delta at or past the threshold with eps > 0 is user-side-only
    leakage (L-PIR); unbounded eps with delta = 0 needs no protocol at all.
    """
    _require_multi_db(params)
    n, k = params.n_databases, params.n_messages
    m = n ** (k - 1)
    if params.eps_unbounded:
        if params.delta == 0.0:
            return RegimeInfo(Regime.NO_PRIVACY, 1.0)
        return RegimeInfo(Regime.L_PIR, 1.0 + delta1_threshold(params))
    if params.eps == 0.0:
        if params.delta == 0.0:
            return RegimeInfo(Regime.SPIR, n / (n - 1))
        pir_delta = delta1_threshold(params)
        if math.isclose(params.delta, pir_delta, rel_tol=REL_TOL):
            return RegimeInfo(Regime.PIR, sum(n ** -j for j in range(k)))
        if params.delta < pir_delta:
            return RegimeInfo(Regime.LEAKY_DB, n / (n - 1) - params.delta / (m - 1))
        return RegimeInfo(Regime.GENERAL, None)
    if params.delta >= delta1_threshold(params):
        return RegimeInfo(Regime.L_PIR, 1.0 + delta1_threshold(params))
    return RegimeInfo(Regime.GENERAL, None)


@dataclass(frozen=True)
class BoundsReport:
    """Everything the bound layer knows about one parameter point."""

    params: SystemParams
    d_upper: float
    d_lower: float
    alpha1: float
    alpha2: float
    delta1: float
    delta2: float
    gap_ratio: float
    gap_cap: float
    regime: Regime
    reference_cost: Optional[float]

    def to_dict(self) -> dict:
        return {
            "n": self.params.n_databases,
            "k": self.params.n_messages,
            "eps": self.params.eps,
            "delta": self.params.delta,
            "d_upper": self.d_upper,
            "d_lower": self.d_lower,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "gap_ratio": self.gap_ratio,
            "gap_cap": self.gap_cap,
            "regime": self.regime.value,
            "reference_cost": self.reference_cost,
        }


def bounds_report(params: SystemParams) -> BoundsReport:
    ratio, cap = gap_ratio(params)
    info = classify_regime(params)
    return BoundsReport(
        params=params,
        d_upper=d_upper(params),
        d_lower=d_lower(params),
        alpha1=alpha1_rate(params),
        alpha2=alpha2_rate(params),
        delta1=delta1_threshold(params),
        delta2=delta2_threshold(params),
        gap_ratio=ratio,
        gap_cap=cap,
        regime=info.regime,
        reference_cost=info.reference_cost,
    )
