"""Protocol sweeps: learning window, pairing frequency, triplets, quadruplets, BCM curves.

Repetition protocols report the total weight change over all repetitions;
Poisson protocols report drift per second. Sweeps are reproducible from
``(arguments, seed)``: trial ``k`` of grid point ``i`` draws from
``SeedSequence(seed, spawn_key=(i, k))``, so results do not depend on
evaluation order or on ``n_jobs``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import InvalidProtocolError, check_count
from .rules import evaluate
from .spikes import (
    TRIPLET_KINDS,
    Poisson,
    generate_pairing,
    generate_quadruplet,
    generate_triplet,
    triplet_timings,
)

log = logging.getLogger(__name__)

__all__ = [
    "SweepResult",
    "DEFAULT_DT_GRID",
    "DEFAULT_RHO_GRID",
    "DEFAULT_RHO_POST_GRID",
    "DEFAULT_T_GRID",
    "stdp_window",
    "frequency_sweep",
    "triplet_grid",
    "quadruplet_sweep",
    "six_triplet_matrix",
    "six_triplet_sweep",
    "bcm_curve",
    "bcm_presynaptic_curve",
    "zero_crossings",
]

DEFAULT_DT_GRID = np.array([t for t in range(-100, 105, 5) if t != 0]) / 1000.0
DEFAULT_RHO_GRID = np.array([0.1, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50], dtype=float)
DEFAULT_RHO_POST_GRID = np.arange(0.0, 51.0, 2.0)
DEFAULT_T_GRID = np.array([t for t in range(-100, 110, 10) if abs(t) >= 10]) / 1000.0


@dataclass(frozen=True)
class SweepResult:
    """Mean, spread and trial count of the weight change at each grid point.

    ``std`` is the sample standard deviation over trials (0 for a single
    trial or a deterministic protocol). ``skipped`` lists grid points whose
    protocol could not be built, with the reason.
    """

    variables: tuple
    points: list
    mean: np.ndarray
    std: np.ndarray
    trials: np.ndarray
    skipped: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def column(self, name):
        i = self.variables.index(name)
        return np.array([p[i] for p in self.points])

    def rows(self):
        for point, m, s, n in zip(self.points, self.mean, self.std, self.trials):
            yield (*point, float(m), float(s), int(n))

    @property
    def sem(self):
        return self.std / np.sqrt(self.trials)


def _seed_for(seed, index, trial):
    return np.random.SeedSequence(seed, spawn_key=(index, trial))


def _map(fn, items, n_jobs):
    if n_jobs is None or n_jobs == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=None if n_jobs < 0 else n_jobs) as pool:
        return list(pool.map(fn, items))


def _sweep(variables, points, make, params, *, trials=1, seed=0, stochastic=False,
           duration=None, n_jobs=1):
    """Evaluate ``params`` on ``make(point, seed_sequence)`` for every point.

    ``make`` returns protocol trains or raises :class:`InvalidProtocolError`,
    in which case the point is skipped and reported. Stochastic sweeps divide
    by ``duration`` to report drift per second.
    """
    trials = check_count(trials, "trials")

    def one(item):
        index, point = item
        try:
            if not stochastic:
                return float(evaluate(params, make(point, None))), None
            values = []
            for k in range(trials):
                trains = make(point, _seed_for(seed, index, k))
                dw = evaluate(params, trains)
                values.append(dw / duration if duration else dw)
            return np.array(values), None
        except InvalidProtocolError as err:
            return None, str(err)

    results = _map(one, list(enumerate(points)), n_jobs)
    kept, means, stds, counts, skipped = [], [], [], [], []
    for point, (value, reason) in zip(points, results):
        if reason is not None:
            log.warning("skipping %s=%s: %s", variables, point, reason)
            skipped.append((point, reason))
            continue
        kept.append(point)
        if stochastic:
            means.append(value.mean())
            stds.append(value.std(ddof=1) if value.size > 1 else 0.0)
        else:
            means.append(value)
            stds.append(0.0)
        counts.append(trials if stochastic else 1)
    return SweepResult(
        variables=tuple(variables),
        points=kept,
        mean=np.array(means, dtype=float),
        std=np.array(stds, dtype=float),
        trials=np.array(counts, dtype=int),
        skipped=skipped,
    )


def stdp_window(params, dt_grid=DEFAULT_DT_GRID, rho=1.0, n_pairs=60, *, trials=1):
    """Total weight change of a pairing protocol as a function of ``dt``."""
    points = [(float(dt),) for dt in dt_grid]
    return _sweep(("dt",), points, lambda p, _: generate_pairing(p[0], rho, n_pairs),
                  params, trials=trials)


def frequency_sweep(params, dt_set=(10e-3, -10e-3), rho_grid=DEFAULT_RHO_GRID, n_pairs=60,
                    *, trials=1):
    """Pairing protocol weight change versus repetition frequency, for each ``dt``."""
    points = [(float(dt), float(rho)) for dt in dt_set for rho in rho_grid]
    return _sweep(("dt", "rho"), points,
                  lambda p, _: generate_pairing(p[0], p[1], n_pairs), params, trials=trials)


def triplet_grid(params, kind, timings, rho=1.0, n=60, *, trials=1):
    """Weight change of a triplet protocol for each signed ``(dt1, dt2)``."""
    points = [(kind, float(a), float(b)) for a, b in timings]
    return _sweep(("kind", "dt1", "dt2"), points,
                  lambda p, _: generate_triplet(p[0], p[1], p[2], rho, n), params,
                  trials=trials)


def quadruplet_sweep(params, dt=5e-3, T_grid=DEFAULT_T_GRID, rho=1.0, n=60, *, trials=1):
    points = [(float(T),) for T in T_grid]
    return _sweep(("T",), points, lambda p, _: generate_quadruplet(dt, p[0], rho, n),
                  params, trials=trials)


def six_triplet_matrix(params, gap1, gap2, rho=0.2, n=60):
    """Weight change of all six triplet orderings with inter-spike gaps ``gap1, gap2``.

    Returns ``{kind: dw}``; the signed timings of each ordering come from
    :func:`~tripletstdp.spikes.triplet_timings`.
    """
    out = {}
    for kind in TRIPLET_KINDS:
        dt1, dt2 = triplet_timings(kind, gap1, gap2)
        out[kind] = float(evaluate(params, generate_triplet(kind, dt1, dt2, rho, n)))
    return out


def six_triplet_sweep(params, gaps, rho=0.2, n=60, *, trials=1):
    points = []
    for g1, g2 in gaps:
        for kind in TRIPLET_KINDS:
            points.append((kind, *triplet_timings(kind, g1, g2)))
    return _sweep(("kind", "dt1", "dt2"), points,
                  lambda p, _: generate_triplet(p[0], p[1], p[2], rho, n), params,
                  trials=trials)


def _require_minimal(params):
    if getattr(params, "a3_minus", 0.0) != 0.0:
        raise ValueError("BCM curves use the minimal rule: a3_minus must be 0")


def bcm_curve(params, rho_pre=10.0, rho_post_grid=DEFAULT_RHO_POST_GRID, duration=100.0,
              trials=10, seed=0, *, n_jobs=1):
    """Drift (weight/s) under independent Poisson trains versus the post rate."""
    _require_minimal(params)
    points = [(float(rho_pre), float(r)) for r in rho_post_grid]
    return _sweep(
        ("rho_pre", "rho_post"), points,
        lambda p, s: Poisson(p[0], p[1], duration, s).generate(),
        params, trials=trials, seed=seed, stochastic=True,
        duration=duration, n_jobs=n_jobs,
    )


def bcm_presynaptic_curve(params, rho_grid=DEFAULT_RHO_POST_GRID, duration=100.0, trials=10,
                          seed=0, *, n_jobs=1):
    """As :func:`bcm_curve` with the post rate tied to the pre rate."""
    _require_minimal(params)
    points = [(float(r),) for r in rho_grid]
    return _sweep(
        ("rho",), points,
        lambda p, s: Poisson(p[0], p[0], duration, s, post_from_pre=True).generate(),
        params, trials=trials, seed=seed, stochastic=True,
        duration=duration, n_jobs=n_jobs,
    )


def zero_crossings(x, y):
    """Linearly interpolated locations where ``y`` changes sign.

    Points where ``y`` is exactly zero are ignored, so a curve that starts at
    zero and turns negative has no crossing there.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nz = y != 0
    x, y = x[nz], y[nz]
    idx = np.flatnonzero(np.sign(y[:-1]) != np.sign(y[1:]))
    return x[idx] - y[idx] * (x[idx + 1] - x[idx]) / (y[idx + 1] - y[idx])
