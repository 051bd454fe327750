"""Acceptance gate: one test per release criterion.

Each test is marked with ``criterion`` and records a one-line detail; the
conftest prints a PASS/FAIL/WAIVED line per criterion in the summary.
"""

import csv
import math
import os
import time

import numpy as np
import pytest

from oracles import brute_tstdp, nearest_poisson_drift, random_train_pair
from tripletstdp.cli import main
from tripletstdp.experiments import (
    bcm_curve,
    bcm_presynaptic_curve,
    frequency_sweep,
    quadruplet_sweep,
    stdp_window,
    triplet_grid,
    zero_crossings,
)
from tripletstdp.files import read_dataset
from tripletstdp.fitting import MASKS, FitOptions, fit, multi_start_fit, nmse, predict
from tripletstdp.presets import HIPPOCAMPAL_STYLE, VISUAL_CORTEX_STYLE
from tripletstdp.robustness import PerturbationSpec, monte_carlo, retune
from tripletstdp.rules import (
    PARAM_NAMES,
    SuppressionParams,
    TripletParams,
    drift_root,
    pstdp_total,
    suppressive_total,
    tstdp_total,
)
from tripletstdp.spikes import ProtocolTrains

ms = 1e-3

# all four amplitudes non-zero so every branch of the rule is exercised
FULL = TripletParams(5e-3, 7e-3, 6.2e-3, 2.3e-4, 16.8 * ms, 33.7 * ms, 101 * ms, 125 * ms)


def note(request, text):
    request.node.user_properties.append(("detail", text))


def corpus(n=1000, seed=2024):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        pre, post = random_train_pair(rng, 50, grid=1 * ms if i % 2 else None)
        out.append(ProtocolTrains.from_times(pre, post))
    return out


def rel_err(a, b):
    if b == 0.0:
        return 0.0 if a == 0.0 else math.inf
    return abs(a - b) / abs(b)


@pytest.mark.criterion("oracle equivalence")
def test_oracle_equivalence(request):
    trains = corpus()
    start = time.perf_counter()
    worst = 0.0
    for tr in trains:
        got = tstdp_total(FULL, tr)
        want = brute_tstdp(FULL, tr.pre.times.tolist(), tr.post.times.tolist())
        worst = max(worst, rel_err(got, want))
    elapsed = time.perf_counter() - start
    note(request, f"{len(trains)} pairs, max rel err {worst:.2e}, {elapsed:.1f} s")
    assert worst < 1e-12
    assert elapsed < 60


@pytest.mark.criterion("reduction identity")
def test_reduction_identity(request):
    pair_only = FULL.replace(a3_plus=0.0, a3_minus=0.0)
    sup = SuppressionParams(FULL.pair(), 1e-12)
    worst = 0.0
    for tr in corpus():
        assert tstdp_total(pair_only, tr) == pstdp_total(pair_only.pair(), tr)
        worst = max(worst, rel_err(suppressive_total(sup, tr), pstdp_total(sup.pair, tr)))
    note(request, f"A3=0 exact on 1000 pairs; tau_s->0 max rel err {worst:.2e}")
    assert worst < 1e-9


@pytest.mark.criterion("window shape")
def test_window_shape(request, hippocampal_params):
    p = hippocampal_params
    dts = np.arange(5, 101, 5) * ms
    shifted = dts + p.tau_plus * math.log(2)
    near = stdp_window(p, dts, rho=1.0).mean
    far = stdp_window(p, shifted, rho=1.0).mean
    ratio = near / far
    dev = float(np.max(np.abs(ratio - 2.0)))
    flip = stdp_window(p, [-1 * ms, 1 * ms], rho=1.0).mean
    note(request, f"max |ratio-2| {dev:.1e} over dt 5..100 ms; dw(-1ms)={flip[0]:.3g}, "
                  f"dw(+1ms)={flip[1]:.3g}")
    assert dev <= 1e-6
    assert flip[0] < 0 < flip[1]


@pytest.mark.criterion("frequency dependence")
def test_frequency_dependence(request, visual_params):
    rates = [0.1, 10, 20, 30, 40, 50]
    dw = frequency_sweep(visual_params, (10 * ms,), rates).mean
    crossings = zero_crossings(rates, dw)
    note(request, f"dw(0.1 Hz)={dw[0]:.3g}, dw(50 Hz)={dw[-1]:.3g}, "
                  f"{len(crossings)} crossing(s)")
    assert dw[0] < 0
    assert np.all(np.diff(dw) > 0)
    assert len(crossings) == 1


@pytest.mark.criterion("triplet asymmetry")
def test_triplet_asymmetry(request, hippocampal_params):
    pop = triplet_grid(hippocampal_params, "post-pre-post", [(-5 * ms, 5 * ms)]).mean[0]
    ppp = triplet_grid(hippocampal_params, "pre-post-pre", [(5 * ms, -5 * ms)]).mean[0]
    note(request, f"post-pre-post {pop:.4g} vs pre-post-pre {ppp:.4g}")
    assert pop > ppp


@pytest.mark.criterion("quadruplet asymmetry")
def test_quadruplet_asymmetry(request, hippocampal_params):
    p = hippocampal_params
    dt, n = 5 * ms, 60
    res = quadruplet_sweep(p, dt, [-20 * ms, 20 * ms, -500 * ms, 500 * ms], rho=1.0, n=n)
    neg20, pos20, neg500, pos500 = res.mean
    asym = n * (p.a2_plus * math.exp(-dt / p.tau_plus) - p.a2_minus * math.exp(-dt / p.tau_minus))
    off = max(abs(neg500 / asym - 1), abs(pos500 / asym - 1))
    note(request, f"T=-20: {neg20:.4g}, T=+20: {pos20:.4g}; |T|=500 within {off:.2%} "
                  f"of {asym:.4g}")
    assert neg20 != pos20
    assert off < 0.01


@pytest.mark.criterion("BCM emergence")
def test_bcm_emergence(request, visual_params):
    start = time.perf_counter()
    crossings, roots = [], []
    for a3 in (0.02, 0.035, 0.05):
        p = visual_params.replace(a3_plus=a3)
        res = bcm_curve(p, 10.0, np.arange(0.0, 51.0, 2.0), duration=100.0, trials=10, seed=0)
        found = zero_crossings(np.arange(0.0, 51.0, 2.0), res.mean)
        assert len(found) >= 1, f"no crossing for a3_plus={a3}"
        crossings.append(float(found[0]))
        roots.append(drift_root(p))
    elapsed = time.perf_counter() - start
    offs = [c / r - 1 for c, r in zip(crossings, roots)]
    note(request, "crossings " + ", ".join(f"{c:.1f}" for c in crossings)
         + " Hz vs roots " + ", ".join(f"{r:.1f}" for r in roots)
         + f"; worst {max(map(abs, offs)):.1%}; {elapsed:.0f} s")
    assert all(abs(o) <= 0.20 for o in offs)
    assert crossings[0] > crossings[1] > crossings[2]
    assert elapsed < 300


@pytest.mark.criterion("presynaptic BCM")
def test_presynaptic_bcm(request, visual_params):
    grid = np.arange(0.0, 51.0, 2.0)
    drift = bcm_presynaptic_curve(visual_params, grid, duration=100.0, trials=10, seed=0).mean
    peak = float(np.max(np.abs(drift)))
    low = float(np.max(np.abs(drift[grid <= 2.0])))
    interior = drift[(grid > 2.0) & (grid < 50.0)]
    note(request, f"|drift| at <=2 Hz {low / peak:.2%} of peak; min {interior.min():.3g}/s; "
                  f"drift(50 Hz) {drift[-1]:.3g}/s")
    assert low <= 0.01 * peak
    assert interior.min() < 0
    assert drift[-1] > 0
    # the analytic mean-field curve agrees on the sign pattern
    assert nearest_poisson_drift(visual_params, 50.0, 50.0) > 0


@pytest.mark.criterion("fit recovery")
def test_fit_recovery(request, datasets_dir):
    data = read_dataset(datasets_dir / "synthetic_hippocampal.csv")
    truth = HIPPOCAMPAL_STYLE
    frozen = MASKS["hippocampal"]
    free = [n for n in PARAM_NAMES if n not in frozen]
    init = truth.replace(**{n: 2.0 * getattr(truth, n) for n in free})
    start = time.perf_counter()
    result = fit(data, init, frozen)
    elapsed = time.perf_counter() - start
    errs = {n: abs(getattr(result.params, n) / getattr(truth, n) - 1) for n in free}
    note(request, f"NMSE {result.nmse:.1e}, worst param err {max(errs.values()):.2%}, "
                  f"{elapsed:.1f} s")
    assert result.nmse < 1e-6
    assert all(e <= 0.05 for e in errs.values())
    assert elapsed < 120


_PAPER_SETS = [
    ("TRIPLETSTDP_VISUAL_CORTEX_DATA", "visual-cortex", VISUAL_CORTEX_STYLE, 1.0),
    ("TRIPLETSTDP_HIPPOCAMPAL_DATA", "hippocampal", HIPPOCAMPAL_STYLE, 2.5),
]


@pytest.mark.criterion("reference NMSE bands")
@pytest.mark.parametrize("env,mask,template,limit", _PAPER_SETS, ids=["visual", "hippocampal"])
def test_reference_nmse_bands(request, env, mask, template, limit):
    path = os.environ.get(env)
    if not path:
        pytest.skip(f"{env} not set; needs a digitised experimental dataset")
    data = read_dataset(path)
    result = multi_start_fit(data, template, MASKS[mask], n_starts=10, seed=0)
    note(request, f"{mask}: NMSE {result.nmse:.3g} (limit {limit})")
    assert result.nmse <= limit


@pytest.fixture(scope="module")
def noisy_optimum():
    data = read_dataset(os.path.join(os.path.dirname(__file__), os.pardir, "datasets",
                                     "synthetic_hippocampal_noisy.csv"))
    return data, fit(data, HIPPOCAMPAL_STYLE, MASKS["hippocampal"])


@pytest.mark.criterion("Monte Carlo pipeline")
def test_monte_carlo_pipeline(request, noisy_optimum):
    data, opt = noisy_optimum
    start = time.perf_counter()
    report = monte_carlo(data, opt.params, PerturbationSpec(sigma_v=0.030, n_runs=1000))
    elapsed = time.perf_counter() - start

    zero = monte_carlo(data, opt.params, PerturbationSpec(sigma_v=0.0, n_runs=20))
    assert np.all(zero.nmse == zero.baseline_nmse)

    tuned = retune(data, report.worst_perturbation, opt.params, MASKS["hippocampal"],
                   FitOptions())
    ratio = tuned.nmse / opt.nmse
    note(request, f"1000 runs in {elapsed:.1f} s, baseline {opt.nmse:.3g}, worst "
                  f"{report.worst_nmse:.3g}, retuned {tuned.nmse:.3g} ({ratio:.3f}x optimum)")
    assert report.nmse.size == 1000 and not report.failed.any()
    assert report.baseline_nmse == pytest.approx(opt.nmse, rel=1e-12)
    assert elapsed < 600
    assert ratio <= 1.5


def _csvs(path):
    return {p.name: p.read_bytes() for p in sorted(path.glob("*.csv"))}


@pytest.mark.criterion("determinism")
def test_determinism(request, tmp_path, datasets_dir):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("rule:\n  preset: hippocampal-style\nbcm:\n  duration_s: 10\n  trials: 3\n"
                   "mc:\n  n_runs: 50\n  retune: true\n")
    dataset = str(datasets_dir / "synthetic_hippocampal_noisy.csv")
    commands = {
        "window": [], "freq": [], "triplet": [], "quad": [], "six": [], "bcm": [],
        "fit": ["--dataset", dataset], "mc": ["--dataset", dataset],
    }
    compared = 0
    for name, extra in commands.items():
        outs = []
        for rep in ("a", "b"):
            out = tmp_path / f"{name}-{rep}"
            assert main([name, "--config", str(cfg), "--seed", "11", "--out", str(out),
                         *extra]) == 0
            outs.append(_csvs(out))
        assert outs[0] and outs[0] == outs[1], name
        compared += len(outs[0])
        for rows in outs[0].values():
            next(csv.reader(rows.decode().splitlines()))
    note(request, f"{len(commands)} commands, {compared} CSV files byte-identical")
