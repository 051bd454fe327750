"""Spike trains, stimulation protocols and nearest-neighbour interaction events.

All times are in seconds of biological time. Every deterministic protocol is
laid out so that its first spike sits at ``t = 0``; the plasticity rules are
translation invariant, so this is only a convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from ._validation import (
    RESOLUTION,
    InvalidProtocolError,
    check_count,
    check_positive,
    check_spike_times,
)

__all__ = [
    "SpikeTrain",
    "ProtocolTrains",
    "Interactions",
    "Pairing",
    "TripletPattern",
    "Quadruplet",
    "SixTriplet",
    "Poisson",
    "Protocol",
    "TRIPLET_KINDS",
    "generate_pairing",
    "generate_triplet",
    "generate_quadruplet",
    "generate_poisson",
    "nearest_interactions",
    "triplet_timings",
]

TRIPLET_KINDS = (
    "pre-post-pre",
    "post-pre-post",
    "pre-pre-post",
    "post-pre-pre",
    "pre-post-post",
    "post-post-pre",
)


@dataclass(frozen=True, eq=False)
class SpikeTrain:
    """Immutable, strictly increasing spike times."""

    times: np.ndarray

    def __post_init__(self):
        arr = check_spike_times(self.times).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "times", arr)

    def __len__(self):
        return self.times.size

    def __iter__(self):
        return iter(self.times.tolist())

    def __array__(self, dtype=None, copy=None):
        return self.times if dtype is None else self.times.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, SpikeTrain):
            return NotImplemented
        return np.array_equal(self.times, other.times)

    def __repr__(self):
        return f"SpikeTrain(n={len(self)})"

    def shift(self, offset):
        return SpikeTrain(self.times + offset)


@dataclass(frozen=True)
class ProtocolTrains:
    pre: SpikeTrain
    post: SpikeTrain

    @classmethod
    def from_times(cls, pre, post):
        return cls(SpikeTrain(pre), SpikeTrain(post))

    def shift(self, offset):
        return ProtocolTrains(self.pre.shift(offset), self.post.shift(offset))


# ---------------------------------------------------------------- generators


def _repeat(pre_offsets, post_offsets, rho, n):
    """Tile one repetition of a pattern ``n`` times with period ``1 / rho``."""
    rho = check_positive(rho, "rho")
    n = check_count(n, "n")
    pre_offsets = np.asarray(pre_offsets, dtype=float)
    post_offsets = np.asarray(post_offsets, dtype=float)
    origin = min(pre_offsets.min(), post_offsets.min())
    pre_offsets = pre_offsets - origin
    post_offsets = post_offsets - origin
    span = max(pre_offsets.max(), post_offsets.max())
    period = 1.0 / rho
    if n > 1 and span + RESOLUTION > period:
        raise InvalidProtocolError(
            f"pattern span {span * 1e3:.6g} ms does not fit in the repetition "
            f"period {period * 1e3:.6g} ms (rho={rho:g} Hz)"
        )
    starts = np.arange(n) / rho
    pre = (starts[:, None] + pre_offsets[None, :]).ravel()
    post = (starts[:, None] + post_offsets[None, :]).ravel()
    return ProtocolTrains(SpikeTrain(np.sort(pre)), SpikeTrain(np.sort(post)))


def generate_pairing(dt, rho=1.0, n_pairs=60):
    """``n_pairs`` pre/post pairs with ``t_post - t_pre = dt``, repeated at ``rho``."""
    dt = float(dt)
    if dt == 0:
        raise InvalidProtocolError("dt=0 pairs coincident pre and post spikes")
    if abs(dt) >= 1.0 / check_positive(rho, "rho"):
        raise InvalidProtocolError(f"|dt|={abs(dt):g} s must be shorter than 1/rho")
    return _repeat([0.0], [dt], rho, n_pairs)


def _triplet_offsets(kind, dt1, dt2):
    """Pre and post offsets of one triplet.

    For the two-pre kinds ``dt_i = t_post - t_pre_i``; for the two-post kinds
    ``dt_i = t_post_i - t_pre``. Index 1 is always the earlier of the pair.
    """
    if kind not in TRIPLET_KINDS:
        raise InvalidProtocolError(f"unknown triplet kind {kind!r}")
    if kind.count("pre") == 2:
        pre, post = [-dt1, -dt2], [0.0]
    else:
        pre, post = [0.0], [dt1, dt2]
    events = sorted([(t, "pre") for t in pre] + [(t, "post") for t in post])
    order = "-".join(label for _, label in events)
    times = [t for t, _ in events]
    if order != kind or min(np.diff(times)) <= 0 or pre[0] > pre[-1] or post[0] > post[-1]:
        raise InvalidProtocolError(
            f"timings dt1={dt1 * 1e3:g} ms, dt2={dt2 * 1e3:g} ms do not produce a "
            f"{kind} triplet"
        )
    return pre, post


def generate_triplet(kind, dt1, dt2, rho=1.0, n=60):
    """Triplet of spikes repeated ``n`` times at ``rho``.

    ``pre-post-pre`` takes ``dt1 = t_post - t_pre1 > 0`` and
    ``dt2 = t_post - t_pre2 < 0``; ``post-pre-post`` takes
    ``dt1 = t_post1 - t_pre < 0`` and ``dt2 = t_post2 - t_pre > 0``.
    The other four orderings follow the same two definitions.
    """
    pre, post = _triplet_offsets(kind, float(dt1), float(dt2))
    return _repeat(pre, post, rho, n)


def generate_quadruplet(dt, T, rho=1.0, n=60):
    """Post-pre pair and pre-post pair whose midpoints are ``T`` apart.

    ``T > 0`` puts the post-pre pair (lag ``-dt``) first; ``T < 0`` puts the
    pre-post pair (lag ``+dt``) first.
    """
    dt = check_positive(dt, "dt")
    T = float(T)
    if abs(T) <= dt:
        raise InvalidProtocolError(f"|T|={abs(T):g} s must exceed dt={dt:g} s")
    if T > 0:
        # post1, pre1 | pre2, post2 ; midpoint of the first pair at dt / 2
        pre = [dt, T]
        post = [0.0, T + dt]
    else:
        # pre2, post2 | post1, pre1
        pre = [0.0, -T + dt]
        post = [dt, -T]
    return _repeat(pre, post, rho, n)


def _as_seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def generate_poisson(rho, duration, seed=None):
    """Homogeneous Poisson train on ``[0, duration)``.

    Spikes closer than the resolution floor to their predecessor are pushed
    forward to the floor so the order stays total.
    """
    rho = check_positive(rho, "rho", strict=False)
    duration = check_positive(duration, "duration")
    rng = np.random.default_rng(_as_seed_sequence(seed))
    count = rng.poisson(rho * duration) if rho > 0 else 0
    times = np.sort(rng.uniform(0.0, duration, size=count))
    if times.size > 1 and np.any(np.diff(times) < RESOLUTION):
        for i in range(1, times.size):
            times[i] = max(times[i], times[i - 1] + RESOLUTION)
    return SpikeTrain(times)


# ----------------------------------------------------------------- protocols


@dataclass(frozen=True)
class Pairing:
    dt: float
    rho: float = 1.0
    n_pairs: int = 60

    def generate(self):
        return generate_pairing(self.dt, self.rho, self.n_pairs)


@dataclass(frozen=True)
class TripletPattern:
    kind: Literal["pre-post-pre", "post-pre-post"]
    dt1: float
    dt2: float
    rho: float = 1.0
    n_triplets: int = 60

    def __post_init__(self):
        if self.kind not in TRIPLET_KINDS[:2]:
            raise InvalidProtocolError(
                f"triplet pattern kind must be pre-post-pre or post-pre-post, got {self.kind!r}"
            )

    def generate(self):
        return generate_triplet(self.kind, self.dt1, self.dt2, self.rho, self.n_triplets)


@dataclass(frozen=True)
class Quadruplet:
    dt: float
    T: float
    rho: float = 1.0
    n_quads: int = 60

    def generate(self):
        return generate_quadruplet(self.dt, self.T, self.rho, self.n_quads)


@dataclass(frozen=True)
class SixTriplet:
    kind: str
    dt1: float
    dt2: float
    rho: float = 0.2
    n_reps: int = 60

    def generate(self):
        return generate_triplet(self.kind, self.dt1, self.dt2, self.rho, self.n_reps)


@dataclass(frozen=True)
class Poisson:
    """Independent Poisson pre and post trains.

    With ``post_from_pre`` the post rate is taken equal to the pre rate and
    ``rho_post`` is ignored.
    """

    rho_pre: float
    rho_post: float
    duration: float = 100.0
    seed: int | None = None
    post_from_pre: bool = False

    def generate(self):
        pre_seed, post_seed = _as_seed_sequence(self.seed).spawn(2)
        rho_post = self.rho_pre if self.post_from_pre else self.rho_post
        return ProtocolTrains(
            generate_poisson(self.rho_pre, self.duration, pre_seed),
            generate_poisson(rho_post, self.duration, post_seed),
        )


Protocol = Union[Pairing, TripletPattern, Quadruplet, SixTriplet, Poisson]


def triplet_timings(kind, gap1, gap2):
    """Signed ``(dt1, dt2)`` for a triplet whose inter-spike gaps are ``gap1, gap2``."""
    g1, g2 = float(gap1), float(gap2)
    return {
        "pre-post-pre": (g1, -g2),
        "post-pre-post": (-g1, g2),
        "pre-pre-post": (g1 + g2, g2),
        "post-pre-pre": (-g1, -(g1 + g2)),
        "pre-post-post": (g1, g1 + g2),
        "post-post-pre": (-(g1 + g2), -g2),
    }[kind]


# -------------------------------------------------------------- interactions


@dataclass(frozen=True)
class Interactions:
    """Merged pre/post event stream under nearest-spike pairing.

    ``lag_opposite`` is the time since the most recent spike of the other
    train and ``lag_same`` the time since the previous spike of the same
    train; both are NaN when no such spike exists. A pre and a post spike at
    the same instant are ordered pre first, so the post sees a zero lag.
    """

    times: np.ndarray
    is_post: np.ndarray
    lag_opposite: np.ndarray
    lag_same: np.ndarray

    def __len__(self):
        return self.times.size

    @property
    def delta_t1(self):
        """Signed ``t_post - t_pre`` of each event's nearest pairing."""
        return np.where(self.is_post, self.lag_opposite, -self.lag_opposite)


def _lags(own, other, side):
    idx = np.searchsorted(other, own, side=side) - 1
    lag_opp = np.full(own.size, np.nan)
    ok = idx >= 0
    lag_opp[ok] = own[ok] - other[idx[ok]]
    lag_same = np.full(own.size, np.nan)
    lag_same[1:] = np.diff(own)
    return lag_opp, lag_same


def nearest_interactions(pre, post):
    pre_t = np.asarray(pre, dtype=float)
    post_t = np.asarray(post, dtype=float)
    # pre spikes see only strictly earlier posts; posts see pres at or before them
    pre_opp, pre_same = _lags(pre_t, post_t, "left")
    post_opp, post_same = _lags(post_t, pre_t, "right")
    times = np.concatenate([pre_t, post_t])
    is_post = np.concatenate([np.zeros(pre_t.size, bool), np.ones(post_t.size, bool)])
    order = np.lexsort((is_post, times))
    return Interactions(
        times=times[order],
        is_post=is_post[order],
        lag_opposite=np.concatenate([pre_opp, post_opp])[order],
        lag_same=np.concatenate([pre_same, post_same])[order],
    )
