"""Event-driven plasticity rules and their rate-based averages.

Every rule works under nearest-spike pairing: a post spike pairs with the most
recent pre spike, a pre spike with the most recent post spike, and the triplet
terms look back only to the previous spike of the same train. Contributions
are summed with :func:`math.fsum`, so the totals do not depend on event order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from functools import singledispatch

import numpy as np

from ._validation import SingularParametersError, check_positive
from .spikes import Interactions, nearest_interactions

__all__ = [
    "PairParams",
    "TripletParams",
    "SuppressionParams",
    "BcmSpec",
    "ThresholdSpec",
    "PARAM_NAMES",
    "BIAS_ALIASES",
    "pstdp_total",
    "tstdp_total",
    "suppressive_total",
    "evaluate",
    "averaged_drift",
    "drift_root",
    "bcm_threshold",
]


@dataclass(frozen=True)
class PairParams:
    a_plus: float
    a_minus: float
    tau_plus: float
    tau_minus: float

    def __post_init__(self):
        check_positive(self.a_plus, "a_plus", strict=False)
        check_positive(self.a_minus, "a_minus", strict=False)
        check_positive(self.tau_plus, "tau_plus")
        check_positive(self.tau_minus, "tau_minus")


#: Order used whenever triplet parameters travel as a flat vector.
PARAM_NAMES = (
    "a2_plus",
    "a2_minus",
    "a3_plus",
    "a3_minus",
    "tau_plus",
    "tau_minus",
    "tau_x",
    "tau_y",
)

#: Circuit bias-current names and the model parameter each one sets. The
#: currents are labels only; no ampere-to-model calibration is implied.
BIAS_ALIASES = {
    "I_pot1": "a2_plus",
    "I_dep1": "a2_minus",
    "I_pot2": "a3_plus",
    "I_dep2": "a3_minus",
    "I_tp1": "tau_plus",
    "I_td1": "tau_minus",
    "I_tp2": "tau_y",
    "I_td2": "tau_x",
}

AMPLITUDES = PARAM_NAMES[:4]
TIME_CONSTANTS = PARAM_NAMES[4:]


@dataclass(frozen=True)
class TripletParams:
    """Amplitudes (dimensionless) and time constants (seconds) of the triplet rule.

    ``a3_minus = a2_plus = 0`` gives the minimal rule used for frequency
    dependent pairing data; ``a3_minus = 0`` alone gives the minimal rule used
    for pairing/triplet/quadruplet data.
    """

    a2_plus: float
    a2_minus: float
    a3_plus: float
    a3_minus: float
    tau_plus: float
    tau_minus: float
    tau_x: float
    tau_y: float

    def __post_init__(self):
        for name in AMPLITUDES:
            check_positive(getattr(self, name), name, strict=False)
        for name in TIME_CONSTANTS:
            check_positive(getattr(self, name), name)

    def to_array(self):
        return np.array([getattr(self, name) for name in PARAM_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values):
        return cls(**{name: float(v) for name, v in zip(PARAM_NAMES, values)})

    @classmethod
    def from_mapping(cls, mapping):
        """Build from model names and/or bias-current aliases."""
        kwargs = {}
        for key, value in mapping.items():
            name = BIAS_ALIASES.get(key, key)
            if name not in PARAM_NAMES:
                raise KeyError(f"unknown triplet parameter {key!r}")
            if name in kwargs:
                raise KeyError(f"parameter {name!r} given twice (alias {key!r})")
            kwargs[name] = float(value)
        missing = set(PARAM_NAMES) - set(kwargs)
        if missing:
            raise KeyError(f"missing triplet parameters: {sorted(missing)}")
        return cls(**kwargs)

    def as_dict(self):
        return asdict(self)

    def replace(self, **changes):
        return replace(self, **changes)

    def pair(self):
        return PairParams(self.a2_plus, self.a2_minus, self.tau_plus, self.tau_minus)


@dataclass(frozen=True)
class SuppressionParams:
    pair: PairParams
    tau_s: float

    def __post_init__(self):
        check_positive(self.tau_s, "tau_s")


def _events(trains):
    if isinstance(trains, Interactions):
        return trains
    return nearest_interactions(trains.pre, trains.post)


def _decay(lag, tau):
    """``exp(-lag / tau)`` with absent lags (NaN) mapped to zero."""
    out = np.zeros_like(lag)
    ok = ~np.isnan(lag)
    out[ok] = np.exp(-lag[ok] / tau)
    return out


def _pair_terms(ev, a_plus, a_minus, tau_plus, tau_minus):
    lag = ev.lag_opposite
    has = ~np.isnan(lag)
    post = ev.is_post & has
    pre = ~ev.is_post & has
    ltp = post & (lag > 0)
    tie = post & (lag == 0)
    terms = np.zeros(len(ev))
    terms[ltp] = a_plus * np.exp(-lag[ltp] / tau_plus)
    # Δt = 0 belongs to the depression branch
    terms[tie] = -a_minus
    terms[pre] = -a_minus * np.exp(-lag[pre] / tau_minus)
    return terms


def pstdp_total(params, trains):
    """Total pair-rule weight change over all nearest-neighbour pairings."""
    ev = _events(trains)
    terms = _pair_terms(ev, params.a_plus, params.a_minus, params.tau_plus, params.tau_minus)
    return math.fsum(terms)


def tstdp_contributions(params, trains):
    """Per-event weight changes of the triplet rule, in merged event order."""
    ev = _events(trains)
    p = params
    lag = ev.lag_opposite
    has = ~np.isnan(lag)
    ltp = ev.is_post & has & (lag > 0)
    tie = ev.is_post & has & (lag == 0)
    ltd = ~ev.is_post & has
    # previous same-type spike, read just before the current one
    y_trace = _decay(ev.lag_same[ltp], p.tau_y)
    x_trace = _decay(ev.lag_same[ltd], p.tau_x)
    terms = np.zeros(len(ev))
    terms[ltp] = np.exp(-lag[ltp] / p.tau_plus) * (p.a2_plus + p.a3_plus * y_trace)
    terms[ltd] = -np.exp(-lag[ltd] / p.tau_minus) * (p.a2_minus + p.a3_minus * x_trace)
    if tie.any():
        # the coincident pre sits immediately before the post in merged order
        idx = np.flatnonzero(tie) - 1
        terms[tie] = -(p.a2_minus + p.a3_minus * _decay(ev.lag_same[idx], p.tau_x))
    return terms


def tstdp_total(params, trains):
    """Total triplet-rule weight change (additive, unbounded)."""
    return math.fsum(tstdp_contributions(params, trains))


def _efficacy(times, tau_s):
    eff = np.ones(times.size)
    if times.size > 1:
        eff[1:] = -np.expm1(-np.diff(times) / tau_s)
    return eff


def suppressive_total(params, trains):
    """Pair rule with each spike scaled by ``1 - exp(-ISI / tau_s)``.

    A spike without a predecessor in its own train has efficacy 1.
    """
    pre = np.asarray(trains.pre, dtype=float)
    post = np.asarray(trains.post, dtype=float)
    eff_pre = _efficacy(pre, params.tau_s)
    eff_post = _efficacy(post, params.tau_s)
    k = params.pair

    i = np.searchsorted(pre, post, side="right") - 1
    ok = i >= 0
    lag = post[ok] - pre[i[ok]]
    kernel = np.where(lag > 0, k.a_plus * np.exp(-lag / k.tau_plus), -k.a_minus)
    ltp = eff_post[ok] * eff_pre[i[ok]] * kernel

    j = np.searchsorted(post, pre, side="left") - 1
    ok = j >= 0
    lag = pre[ok] - post[j[ok]]
    ltd = -eff_pre[ok] * eff_post[j[ok]] * k.a_minus * np.exp(-lag / k.tau_minus)
    return math.fsum(np.concatenate([ltp, ltd]))


@singledispatch
def evaluate(params, trains):
    """Total weight change of ``trains`` under the rule selected by the params type."""
    raise TypeError(f"no plasticity rule for {type(params).__name__}")


evaluate.register(PairParams, pstdp_total)
evaluate.register(TripletParams, tstdp_total)
evaluate.register(SuppressionParams, suppressive_total)


# ----------------------------------------------------------- rate-based view


def averaged_drift(params, rho_pre, rho_post):
    """Time-averaged drift ``<dw/dt>`` for independent Poisson trains (weight/s)."""
    p = params
    rho_pre = np.asarray(rho_pre, dtype=float)
    rho_post = np.asarray(rho_post, dtype=float)
    out = rho_pre * rho_post * (
        -p.a2_minus * p.tau_minus
        + p.a2_plus * p.tau_plus
        - p.a3_minus * p.tau_minus * p.tau_x * rho_pre
        + p.a3_plus * p.tau_plus * p.tau_y * rho_post
    )
    return float(out) if out.ndim == 0 else out


def drift_root(params):
    """Post rate at which the minimal-rule drift changes sign (Hz)."""
    p = params
    denom = p.a3_plus * p.tau_plus * p.tau_y
    if denom <= 0:
        raise SingularParametersError("a3_plus * tau_plus * tau_y must be > 0")
    return (p.a2_minus * p.tau_minus - p.a2_plus * p.tau_plus) / denom


@dataclass(frozen=True)
class BcmSpec:
    """BCM-style reading of the minimal triplet rule.

    ``phi(rho_post)`` is the averaged drift per unit presynaptic rate; it is
    zero at ``rho_post = 0``, negative below ``theta`` and positive above.
    """

    params: TripletParams

    @property
    def theta(self):
        return drift_root(self.params)

    def phi(self, rho_post):
        p = self.params.replace(a3_minus=0.0)
        return averaged_drift(p, 1.0, rho_post)


@dataclass(frozen=True)
class ThresholdSpec:
    """Inputs of the all-to-all modification threshold.

    ``post_rate_moment`` is the expectation of the p-th power of the post
    rate and ``rho0_p`` its long-run reference value (both in Hz**p).
    """

    p_exponent: float
    rho0_p: float
    post_rate_moment: float


def bcm_threshold(params, spec):
    """All-to-all sliding threshold (Hz); a reference marker for nearest-spike runs."""
    p = params
    denom = spec.rho0_p * p.a3_plus * p.tau_plus * p.tau_y
    if not denom > 0:
        raise SingularParametersError("rho0_p * a3_plus * tau_plus * tau_y must be > 0")
    return spec.post_rate_moment * (p.a2_minus * p.tau_minus - p.a2_plus * p.tau_plus) / denom
