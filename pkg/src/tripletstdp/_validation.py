"""Small input checks shared by the public entry points."""

from __future__ import annotations

import math

import numpy as np

#: Minimum separation between consecutive spikes of one train (seconds).
RESOLUTION = 1e-6


class InvalidProtocolError(ValueError):
    """A stimulation protocol cannot be realised with the requested timings."""


class SingularParametersError(ValueError):
    """Parameters make a closed-form expression undefined."""


def check_spike_times(times, name="times"):
    arr = np.asarray(times, dtype=float).reshape(-1)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: spike times must be finite")
    if arr.size and arr[0] < 0:
        raise ValueError(f"{name}: spike times must be >= 0")
    if arr.size > 1:
        gaps = np.diff(arr)
        # relative slack absorbs the rounding of k / rho + offset
        if np.any(gaps < RESOLUTION * (1 - 1e-6)):
            i = int(np.argmin(gaps))
            raise ValueError(
                f"{name}: spikes {i} and {i + 1} are {gaps[i]:.3g} s apart; "
                f"need strictly increasing times at least {RESOLUTION:g} s apart"
            )
    return arr


def check_positive(value, name, *, strict=True):
    value = float(value)
    if not math.isfinite(value) or value < 0 or (strict and value == 0):
        raise ValueError(f"{name} must be {'> 0' if strict else '>= 0'}, got {value!r}")
    return value


def check_count(value, name):
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
