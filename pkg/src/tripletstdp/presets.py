"""Illustrative parameter sets and the protocol layouts of the two reference datasets.

The parameter values are hand-picked to show the qualitative behaviour of the
two minimal rules; they are not fits to experimental data.
"""

from .rules import TripletParams
from .spikes import Pairing, Quadruplet, TripletPattern


def ms(value):
    return value / 1000.0


#: Minimal rule without pair potentiation (``a2_plus = a3_minus = 0``).
VISUAL_CORTEX_STYLE = TripletParams(
    a2_plus=0.0,
    a2_minus=7.0e-3,
    a3_plus=5.0e-2,
    a3_minus=0.0,
    tau_plus=ms(16.8),
    tau_minus=ms(33.7),
    tau_x=ms(101.0),
    tau_y=ms(30.0),
)

#: Minimal rule with pair potentiation (``a3_minus = 0``).
HIPPOCAMPAL_STYLE = TripletParams(
    a2_plus=4.6e-3,
    a2_minus=3.0e-3,
    a3_plus=9.1e-3,
    a3_minus=0.0,
    tau_plus=ms(16.8),
    tau_minus=ms(33.7),
    tau_x=ms(101.0),
    tau_y=ms(48.0),
)

PRESETS = {
    "visual-cortex-style": VISUAL_CORTEX_STYLE,
    "hippocampal-style": HIPPOCAMPAL_STYLE,
}


def visual_cortex_protocols():
    """Ten pairing points: dt = +/-10 ms at 0.1, 10, 20, 40 and 50 Hz."""
    return [Pairing(ms(dt), rho) for dt in (10, -10) for rho in (0.1, 10, 20, 40, 50)]


def hippocampal_protocols():
    """Thirteen points: two pairings, three quadruplets and eight triplets.

    The exact timings here are a plausible layout for synthetic tests; a
    digitised dataset file carries its own timings.
    """
    out = [Pairing(ms(10)), Pairing(-ms(10))]
    out += [Quadruplet(ms(5), ms(T)) for T in (-40, 15, 40)]
    out += [
        TripletPattern("pre-post-pre", ms(a), ms(b))
        for a, b in ((5, -5), (10, -10), (15, -5), (5, -15))
    ]
    out += [
        TripletPattern("post-pre-post", ms(a), ms(b))
        for a, b in ((-5, 5), (-10, 10), (-5, 15), (-15, 5))
    ]
    return out
