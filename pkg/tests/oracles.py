"""Independent reference implementations used only by the tests.

Everything here is deliberately naive: plain Python loops over spike lists,
O(n^2) scans for nearest neighbours, ``math.exp`` instead of numpy.
"""

import math

import numpy as np


def _latest_before(times, t, inclusive):
    """Latest element of ``times`` strictly before ``t`` (or at ``t`` if inclusive)."""
    best = None
    for s in times:
        if s < t or (inclusive and s == t):
            if best is None or s > best:
                best = s
    return best


def _previous_same(times, t):
    return _latest_before(times, t, inclusive=False)


def brute_tstdp_terms(p, pre, post):
    """One term per spike of the nearest-spike triplet rule, by exhaustive scan.

    Pre and post spikes at the same instant are ordered pre first: the post
    pairs with the coincident pre at zero lag, which falls on the depression
    side of the kernel.
    """
    pre = [float(t) for t in pre]
    post = [float(t) for t in post]
    terms = []
    for t in post:
        partner = _latest_before(pre, t, inclusive=True)
        if partner is None:
            continue
        lag = t - partner
        if lag > 0:
            prev_post = _previous_same(post, t)
            y = 0.0 if prev_post is None else math.exp(-(t - prev_post) / p.tau_y)
            terms.append(math.exp(-lag / p.tau_plus) * (p.a2_plus + p.a3_plus * y))
        else:
            prev_pre = _previous_same(pre, partner)
            x = 0.0 if prev_pre is None else math.exp(-(partner - prev_pre) / p.tau_x)
            terms.append(-(p.a2_minus + p.a3_minus * x))
    for t in pre:
        partner = _latest_before(post, t, inclusive=False)
        if partner is None:
            continue
        prev_pre = _previous_same(pre, t)
        x = 0.0 if prev_pre is None else math.exp(-(t - prev_pre) / p.tau_x)
        terms.append(-math.exp(-(t - partner) / p.tau_minus) * (p.a2_minus + p.a3_minus * x))
    return terms


def brute_tstdp(p, pre, post):
    return math.fsum(brute_tstdp_terms(p, pre, post))


def brute_pstdp(k, pre, post):
    pre = [float(t) for t in pre]
    post = [float(t) for t in post]
    terms = []
    for t in post:
        partner = _latest_before(pre, t, inclusive=True)
        if partner is not None:
            lag = t - partner
            terms.append(k.a_plus * math.exp(-lag / k.tau_plus) if lag > 0 else -k.a_minus)
    for t in pre:
        partner = _latest_before(post, t, inclusive=False)
        if partner is not None:
            terms.append(-k.a_minus * math.exp(-(t - partner) / k.tau_minus))
    return math.fsum(terms)


def brute_suppressive(s, pre, post):
    k = s.pair
    pre = [float(t) for t in pre]
    post = [float(t) for t in post]

    def efficacy(times, t):
        prev = _previous_same(times, t)
        return 1.0 if prev is None else 1.0 - math.exp(-(t - prev) / s.tau_s)

    terms = []
    for t in post:
        partner = _latest_before(pre, t, inclusive=True)
        if partner is not None:
            lag = t - partner
            f = k.a_plus * math.exp(-lag / k.tau_plus) if lag > 0 else -k.a_minus
            terms.append(efficacy(post, t) * efficacy(pre, partner) * f)
    for t in pre:
        partner = _latest_before(post, t, inclusive=False)
        if partner is not None:
            f = -k.a_minus * math.exp(-(t - partner) / k.tau_minus)
            terms.append(efficacy(pre, t) * efficacy(post, partner) * f)
    return math.fsum(terms)


def random_train_pair(rng, max_spikes=50, span=0.5, grid=None):
    """Two sorted spike trains of up to ``max_spikes`` each.

    With ``grid`` the times are drawn from a lattice, so pre/post ties and
    short gaps occur often.
    """
    out = []
    for _ in range(2):
        n = int(rng.integers(0, max_spikes + 1))
        if grid:
            slots = int(span / grid)
            picks = rng.choice(slots, size=min(n, slots), replace=False)
            times = np.sort(picks) * grid
        else:
            times = np.sort(rng.uniform(0.0, span, size=n))
            times = times[np.concatenate([[True], np.diff(times) >= 1e-6])] if n else times
        out.append(times)
    return out[0], out[1]


def nearest_poisson_drift(p, rho_pre, rho_post):
    """Expected drift (1/s) of the nearest-spike triplet rule under independent Poisson trains.

    For a post spike the lag to the latest pre is Exp(rho_pre) and the gap to
    the previous post is Exp(rho_post), independent; symmetrically for pre
    spikes. E[exp(-L / tau)] for L ~ Exp(r) is r tau / (1 + r tau).
    """
    def m(rate, tau):
        return rate * tau / (1.0 + rate * tau)

    ltp = rho_post * m(rho_pre, p.tau_plus) * (p.a2_plus + p.a3_plus * m(rho_post, p.tau_y))
    ltd = rho_pre * m(rho_post, p.tau_minus) * (p.a2_minus + p.a3_minus * m(rho_pre, p.tau_x))
    return ltp - ltd
