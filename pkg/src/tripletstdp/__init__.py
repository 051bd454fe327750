"""Event-driven pair and triplet STDP rules, protocol sweeps, fitting and mismatch analysis."""

__version__ = "0.1.0"

from .estimator import TripletSTDPRegressor, check_protocols
from .experiments import (
    SweepResult,
    bcm_curve,
    bcm_presynaptic_curve,
    frequency_sweep,
    quadruplet_sweep,
    six_triplet_matrix,
    six_triplet_sweep,
    stdp_window,
    triplet_grid,
    zero_crossings,
)
from .fitting import MASKS, DataPoint, Dataset, FitOptions, FitResult, fit, multi_start_fit, nmse
from .fitting import predict
from .presets import HIPPOCAMPAL_STYLE, PRESETS, VISUAL_CORTEX_STYLE
from .robustness import McReport, PerturbationSpec, monte_carlo, perturb, retune
from .rules import (
    BIAS_ALIASES,
    PARAM_NAMES,
    BcmSpec,
    PairParams,
    SuppressionParams,
    ThresholdSpec,
    TripletParams,
    averaged_drift,
    bcm_threshold,
    drift_root,
    evaluate,
    pstdp_total,
    suppressive_total,
    tstdp_total,
)
from .spikes import (
    Pairing,
    Poisson,
    ProtocolTrains,
    Quadruplet,
    SixTriplet,
    SpikeTrain,
    TripletPattern,
    generate_pairing,
    generate_poisson,
    generate_quadruplet,
    generate_triplet,
    nearest_interactions,
)
