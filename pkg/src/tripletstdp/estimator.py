"""scikit-learn style wrapper around triplet-rule fitting.

``X`` is a sequence of protocol objects (anything with ``generate()``
returning pre/post trains), ``y`` the measured weight changes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .fitting import MASKS, DataPoint, Dataset, FitOptions, fit, multi_start_fit, nmse
from .fitting import predict_protocols
from .presets import HIPPOCAMPAL_STYLE
from .rules import PARAM_NAMES, TripletParams

_DEFAULTS = HIPPOCAMPAL_STYLE.as_dict()


def check_protocols(X):
    """Return ``X`` as a list of protocols, rejecting arrays of numbers and empty input."""
    if isinstance(X, Dataset):
        return X.protocols
    if isinstance(X, np.ndarray) and X.dtype != object:
        raise TypeError("X must be a sequence of protocol objects, not a numeric array")
    if isinstance(X, np.ndarray):
        protocols = list(np.ravel(np.asarray(X, dtype=object)))
    else:
        protocols = list(X)
    if not protocols:
        raise ValueError("X is empty")
    for i, p in enumerate(protocols):
        if not callable(getattr(p, "generate", None)):
            raise TypeError(f"X[{i}] is not a protocol: {p!r}")
    return protocols


def _check_targets(y, n, name):
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"{name} must be finite")
    return y


class TripletSTDPRegressor(RegressorMixin, BaseEstimator):
    """Fit the triplet rule to weight-change measurements by NMSE minimisation.

    Parameters named in ``frozen`` (a mask name or a set of parameter names)
    keep their constructor value. With ``n_starts > 1`` free parameters are
    initialised at random and the constructor values of free parameters are
    ignored.
    """

    def __init__(
        self,
        a2_plus=_DEFAULTS["a2_plus"],
        a2_minus=_DEFAULTS["a2_minus"],
        a3_plus=_DEFAULTS["a3_plus"],
        a3_minus=_DEFAULTS["a3_minus"],
        tau_plus=_DEFAULTS["tau_plus"],
        tau_minus=_DEFAULTS["tau_minus"],
        tau_x=_DEFAULTS["tau_x"],
        tau_y=_DEFAULTS["tau_y"],
        frozen="hippocampal",
        max_iter=2000,
        tol_x=1e-6,
        tol_f=1e-6,
        restarts=2,
        n_starts=1,
        random_state=None,
    ):
        self.a2_plus = a2_plus
        self.a2_minus = a2_minus
        self.a3_plus = a3_plus
        self.a3_minus = a3_minus
        self.tau_plus = tau_plus
        self.tau_minus = tau_minus
        self.tau_x = tau_x
        self.tau_y = tau_y
        self.frozen = frozen
        self.max_iter = max_iter
        self.tol_x = tol_x
        self.tol_f = tol_f
        self.restarts = restarts
        self.n_starts = n_starts
        self.random_state = random_state

    def _initial(self):
        return TripletParams(**{name: getattr(self, name) for name in PARAM_NAMES})

    def _frozen(self):
        if isinstance(self.frozen, str):
            if self.frozen not in MASKS:
                raise ValueError(f"unknown mask {self.frozen!r}; choose from {sorted(MASKS)}")
            return MASKS[self.frozen]
        return frozenset(self.frozen)

    def fit(self, X, y=None, sem=None):
        """Fit to protocols ``X`` and targets ``y``; ``sem`` defaults to ones.

        A :class:`~tripletstdp.fitting.Dataset` may be passed as ``X`` with
        ``y`` omitted.
        """
        if isinstance(X, Dataset) and y is None:
            dataset = X
        else:
            protocols = check_protocols(X)
            if y is None:
                raise ValueError("y is required unless X is a Dataset")
            y = _check_targets(y, len(protocols), "y")
            sem = np.ones(len(protocols)) if sem is None else _check_targets(
                sem, len(protocols), "sem")
            dataset = Dataset("estimator", [DataPoint(p, a, b) for p, a, b in
                                            zip(protocols, y, sem)])
        options = FitOptions(self.max_iter, self.tol_x, self.tol_f, restarts=self.restarts)
        if self.n_starts > 1:
            seed = self.random_state if self.random_state is not None else 0
            result = multi_start_fit(dataset, self._initial(), self._frozen(), self.n_starts,
                                     seed, options)
        else:
            result = fit(dataset, self._initial(), self._frozen(), options)
        if result.failed:
            raise RuntimeError(f"fit failed: {result.message}")
        self.fit_result_ = result
        self.params_ = result.params
        self.nmse_ = result.nmse
        self.n_iter_ = result.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        return predict_protocols(self.params_, check_protocols(X))

    def nmse(self, X, y=None, sem=None):
        """NMSE of the fitted rule on ``X`` (or a Dataset)."""
        check_is_fitted(self, "params_")
        if isinstance(X, Dataset) and y is None:
            return nmse(X, predict_protocols(self.params_, X.protocols))
        protocols = check_protocols(X)
        y = _check_targets(y, len(protocols), "y")
        sem = np.ones(len(protocols)) if sem is None else _check_targets(sem, len(protocols), "sem")
        z = (y - self.predict(protocols)) / sem
        return float(np.mean(z * z))
