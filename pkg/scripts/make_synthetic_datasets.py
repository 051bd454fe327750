"""Regenerate the synthetic dataset files under datasets/.

The noise-free files are the rule's own predictions for the two reference
protocol layouts; the noisy file adds Gaussian noise at the stated SEM.
"""

import sys
from pathlib import Path

import numpy as np

from tripletstdp.fitting import DataPoint, Dataset, predict_protocols
from tripletstdp.files import write_dataset
from tripletstdp.presets import (
    HIPPOCAMPAL_STYLE,
    VISUAL_CORTEX_STYLE,
    hippocampal_protocols,
    visual_cortex_protocols,
)

SEM = 0.05


def build(name, params, protocols, noise_seed=None):
    dw = predict_protocols(params, protocols)
    if noise_seed is not None:
        dw = dw + np.random.default_rng(noise_seed).normal(0.0, SEM, size=dw.size)
    return Dataset(name, [DataPoint(p, float(v), SEM) for p, v in zip(protocols, dw)])


def main(out_dir):
    out = Path(out_dir)
    write_dataset(out / "synthetic_visual_cortex.csv",
                  build("visual-cortex", VISUAL_CORTEX_STYLE, visual_cortex_protocols()),
                  comment="synthetic: visual-cortex-style preset, noise-free")
    write_dataset(out / "synthetic_hippocampal.csv",
                  build("hippocampal", HIPPOCAMPAL_STYLE, hippocampal_protocols()),
                  comment="synthetic: hippocampal-style preset, noise-free")
    write_dataset(out / "synthetic_hippocampal_noisy.csv",
                  build("hippocampal", HIPPOCAMPAL_STYLE, hippocampal_protocols(), noise_seed=7),
                  comment=f"synthetic: hippocampal-style preset plus N(0, {SEM}) noise, seed 7")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "datasets")
