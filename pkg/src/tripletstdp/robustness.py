"""Monte Carlo mismatch analysis and worst-case retuning.

A threshold-voltage shift ``delta`` scales a subthreshold current by
``exp(delta / v_scale)``. Amplitudes are currents; time constants are set by
currents too, so their inverses get the same factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_count, check_positive
from .fitting import MASKS, fit, nmse, predict
from .rules import PARAM_NAMES, TripletParams

__all__ = [
    "PerturbationSpec",
    "McReport",
    "perturbation_vector",
    "apply_perturbation",
    "perturb",
    "monte_carlo",
    "retune",
]

_AMPLITUDE = np.array([name.startswith("a") for name in PARAM_NAMES])


@dataclass(frozen=True)
class PerturbationSpec:
    sigma_v: float = 0.030
    v_scale: float = 0.032
    n_runs: int = 1000
    seed: int = 0

    def __post_init__(self):
        check_positive(self.sigma_v, "sigma_v", strict=False)
        check_positive(self.v_scale, "v_scale")
        check_count(self.n_runs, "n_runs")


def perturbation_vector(spec, run_index):
    """Independent Gaussian voltage shifts (V), one per parameter, for one run."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(run_index,)))
    deltas = rng.normal(0.0, 1.0, size=len(PARAM_NAMES))
    return deltas * spec.sigma_v


def apply_perturbation(params, deltas, v_scale=0.032):
    factor = np.exp(np.asarray(deltas, dtype=float) / v_scale)
    x = params.to_array()
    x = np.where(_AMPLITUDE, x * factor, x / factor)
    return TripletParams.from_array(x)


def perturb(params, spec, run_index):
    return apply_perturbation(params, perturbation_vector(spec, run_index), spec.v_scale)


@dataclass(frozen=True)
class McReport:
    """Per-run NMSE of a Monte Carlo campaign plus the baseline.

    ``deltas[i]`` holds the voltage shifts of run ``i`` in
    :data:`~tripletstdp.rules.PARAM_NAMES` order. Failed runs have NaN NMSE.
    """

    baseline_nmse: float
    nmse: np.ndarray
    deltas: np.ndarray
    v_scale: float

    @property
    def failed(self):
        return ~np.isfinite(self.nmse)

    @property
    def worst_index(self):
        values = np.where(self.failed, -np.inf, self.nmse)
        return int(np.argmax(values))

    @property
    def worst_nmse(self):
        return float(self.nmse[self.worst_index])

    @property
    def worst_perturbation(self):
        return self.deltas[self.worst_index]

    def summary(self):
        ok = self.nmse[~self.failed]
        q05, q25, q50, q75, q95 = np.quantile(ok, [0.05, 0.25, 0.5, 0.75, 0.95])
        return {
            "baseline": self.baseline_nmse,
            "runs": int(self.nmse.size),
            "failed": int(self.failed.sum()),
            "min": float(ok.min()),
            "q05": float(q05),
            "q25": float(q25),
            "median": float(q50),
            "mean": float(ok.mean()),
            "q75": float(q75),
            "q95": float(q95),
            "max": float(ok.max()),
            "worst_run": self.worst_index,
        }


def monte_carlo(dataset, params, spec=None):
    spec = spec or PerturbationSpec()
    baseline = nmse(dataset, predict(params, dataset))
    deltas = np.vstack([perturbation_vector(spec, i) for i in range(spec.n_runs)])
    values = np.empty(spec.n_runs)
    for i, d in enumerate(deltas):
        try:
            value = nmse(dataset, predict(apply_perturbation(params, d, spec.v_scale), dataset))
        except (ValueError, FloatingPointError, OverflowError):
            value = np.nan
        values[i] = value if np.isfinite(value) else np.nan
    return McReport(baseline, values, deltas, spec.v_scale)


def retune(dataset, worst_perturbation, initial, frozen=MASKS["hippocampal"], options=None,
           *, v_scale=0.032):
    """Refit the free parameters with the mismatch held fixed.

    The returned parameters are the new settings before distortion; the
    optimiser starts from ``initial``, so the result is never worse than the
    un-retuned perturbed NMSE.
    """
    deltas = np.asarray(worst_perturbation, dtype=float)
    return fit(dataset, initial, frozen, options,
               distort=lambda p: apply_perturbation(p, deltas, v_scale))
