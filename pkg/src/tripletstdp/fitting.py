"""NMSE objective and simplex fitting of triplet-rule parameters.

Free parameters are optimised in log space so amplitudes and time constants
stay positive without penalties. Parameters in the frozen set keep their
initial value (zero amplitudes must be frozen).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from ._validation import InvalidProtocolError, check_count
from .rules import PARAM_NAMES, TripletParams, tstdp_contributions
from .spikes import nearest_interactions

log = logging.getLogger(__name__)

__all__ = [
    "DataPoint",
    "Dataset",
    "FitOptions",
    "FitResult",
    "MASKS",
    "nmse",
    "predict",
    "fit",
    "multi_start_fit",
    "DEFAULT_INIT_BOUNDS",
]

#: Frozen parameter sets of the two minimal rules and the full rule.
MASKS = {
    "visual-cortex": frozenset({"a2_plus", "a3_minus", "tau_x"}),
    "hippocampal": frozenset({"a3_minus", "tau_x"}),
    "full": frozenset(),
}

_RESERVED_SIZES = {"visual-cortex": 10, "hippocampal": 13}

#: Log-uniform ranges for random initialisation: amplitudes, then time constants (s).
DEFAULT_INIT_BOUNDS = {
    **{name: (1e-4, 1e-1) for name in PARAM_NAMES[:4]},
    **{name: (2e-3, 2e-1) for name in PARAM_NAMES[4:]},
}


@dataclass(frozen=True)
class DataPoint:
    protocol: object
    dw_exp: float
    sem: float

    def __post_init__(self):
        if not self.sem > 0:
            raise ValueError(f"sem must be > 0, got {self.sem!r}")


@dataclass(frozen=True)
class Dataset:
    name: str
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError("a dataset needs at least one point")
        expected = _RESERVED_SIZES.get(self.name)
        if expected is not None and len(self.points) != expected:
            raise ValueError(
                f"dataset name {self.name!r} is reserved for {expected} points, "
                f"got {len(self.points)}"
            )

    def __len__(self):
        return len(self.points)

    @property
    def dw_exp(self):
        return np.array([p.dw_exp for p in self.points])

    @property
    def sem(self):
        return np.array([p.sem for p in self.points])

    @property
    def protocols(self):
        return [p.protocol for p in self.points]


@dataclass(frozen=True)
class FitOptions:
    max_iter: int = 2000
    tol_x: float = 1e-6
    tol_f: float = 1e-6
    initial_step: float = 0.25
    restarts: int = 2


@dataclass
class FitResult:
    params: TripletParams
    nmse: float
    iterations: int
    converged: bool
    trace: np.ndarray = field(repr=False)
    evaluations: int = 0
    failed: bool = False
    message: str = ""


def nmse(dataset, predictions):
    """Mean squared residual in units of each point's standard error."""
    predictions = np.asarray(predictions, dtype=float)
    if predictions.shape != (len(dataset),):
        raise ValueError(
            f"expected {len(dataset)} predictions, got shape {predictions.shape}"
        )
    sem = dataset.sem
    if np.any(sem <= 0):
        raise ValueError("every sem must be > 0")
    z = (dataset.dw_exp - predictions) / sem
    return float(np.mean(z * z))


@lru_cache(maxsize=4096)
def _interactions(protocol):
    trains = protocol.generate()
    return nearest_interactions(trains.pre, trains.post)


def predict_protocols(params, protocols):
    out = np.empty(len(protocols))
    for i, protocol in enumerate(protocols):
        try:
            ev = _interactions(protocol)
        except InvalidProtocolError as err:
            raise InvalidProtocolError(f"data point {i}: {err}") from err
        out[i] = math.fsum(tstdp_contributions(params, ev))
    return out


def predict(params, dataset):
    """Triplet-rule weight change for each data point's protocol."""
    return predict_protocols(params, dataset.protocols)


def _free_names(frozen):
    unknown = set(frozen) - set(PARAM_NAMES)
    if unknown:
        raise ValueError(f"unknown parameters in frozen set: {sorted(unknown)}")
    return [n for n in PARAM_NAMES if n not in frozen]


def fit(dataset, initial, frozen=MASKS["hippocampal"], options=None, *, distort=None):
    """Minimise the NMSE over the free parameters with Nelder-Mead.

    ``distort`` maps candidate parameters to the parameters actually
    simulated; it models a fixed device mismatch during retuning.
    """
    options = options or FitOptions()
    free = _free_names(frozen)
    x_init = initial.to_array()
    idx = np.array([PARAM_NAMES.index(n) for n in free], dtype=int)
    if np.any(x_init[idx] <= 0):
        bad = [n for n in free if getattr(initial, n) <= 0]
        raise ValueError(f"free parameters must be > 0 (freeze them instead): {bad}")
    distort = distort or (lambda p: p)
    protocols = dataset.protocols
    # build every protocol up front so a bad point aborts before optimising
    for i, protocol in enumerate(protocols):
        try:
            _interactions(protocol)
        except InvalidProtocolError as err:
            raise InvalidProtocolError(f"data point {i}: {err}") from err

    def unpack(z):
        x = x_init.copy()
        x[idx] = np.exp(z)
        return TripletParams.from_array(x)

    evaluations = 0

    def objective(z):
        nonlocal evaluations
        evaluations += 1
        try:
            value = nmse(dataset, predict_protocols(distort(unpack(z)), protocols))
        except (ValueError, FloatingPointError, OverflowError):
            return np.inf
        return value if np.isfinite(value) else np.inf

    z = np.log(x_init[idx])
    best = objective(z)
    trace = [best]
    if not free:
        return FitResult(initial, best, 0, True, np.array(trace), evaluations,
                         failed=not np.isfinite(best), message="all parameters frozen")

    def record(intermediate_result):
        trace.append(min(trace[-1], float(intermediate_result.fun)))

    iterations = 0
    converged = False
    message = ""
    for attempt in range(1 + options.restarts):
        simplex = np.vstack([z, z + options.initial_step * np.eye(len(z))])
        # an all-inf simplex makes scipy's spread check compute inf - inf
        with np.errstate(invalid="ignore"):
            res = minimize(
                objective, z, method="Nelder-Mead", callback=record,
                options={
                    "maxiter": max(options.max_iter - iterations, 1),
                    "xatol": options.tol_x,
                    "fatol": options.tol_f,
                    "initial_simplex": simplex,
                },
            )
        iterations += res.nit
        message = res.message
        improved = res.fun < best - options.tol_f
        if res.fun <= best:
            z, best = res.x, float(res.fun)
        converged = bool(res.success)
        if not converged or not improved or iterations >= options.max_iter:
            break
        log.debug("restart %d from nmse=%g", attempt + 1, best)

    failed = not np.isfinite(best)
    return FitResult(
        params=unpack(z),
        nmse=best,
        iterations=iterations,
        converged=converged and not failed,
        trace=np.array(trace),
        evaluations=evaluations,
        failed=failed,
        message="objective never finite" if failed else message,
    )


def random_initial(template, frozen, rng, bounds=None):
    """Log-uniform draw of the free parameters; frozen ones come from ``template``."""
    bounds = {**DEFAULT_INIT_BOUNDS, **(bounds or {})}
    x = template.to_array()
    for i, name in enumerate(PARAM_NAMES):
        if name not in frozen:
            lo, hi = bounds[name]
            x[i] = np.exp(rng.uniform(np.log(lo), np.log(hi)))
    return TripletParams.from_array(x)


def multi_start_fit(dataset, template, frozen=MASKS["hippocampal"], n_starts=10, seed=0,
                    options=None, *, bounds=None):
    """Best of ``n_starts`` fits from log-uniform random initialisations.

    Start ``k`` uses the ``k``-th draw of one generator seeded with ``seed``,
    so the first ``m`` starts are the same for any ``n_starts >= m``.
    """
    n_starts = check_count(n_starts, "n_starts")
    rng = np.random.default_rng(seed)
    best = None
    for k in range(n_starts):
        init = random_initial(template, frozen, rng, bounds)
        result = fit(dataset, init, frozen, options)
        log.info("start %d: nmse=%g", k, result.nmse)
        if result.failed:
            continue
        if best is None or result.nmse < best.nmse:
            best = result
    if best is None:
        return FitResult(template, np.inf, 0, False, np.array([np.inf]), failed=True,
                         message="all starts failed")
    return best
