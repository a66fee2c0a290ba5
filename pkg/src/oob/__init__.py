"""Optimistic optimization of a lazily sampled Brownian motion on [0, 1].

The package has four layers: deterministic random streams (:mod:`oob.rng`),
exact lazy Brownian sampling and bridge-maximum laws (:mod:`oob.brownian`),
the interval-splitting optimizer (:mod:`oob.optimizer`), and Monte Carlo
verification harnesses with a CLI (:mod:`oob.analysis`, :mod:`oob.cli`).
"""

from .analysis import (
    NearOptimalCount,
    VerificationReport,
    Z95,
    baseline_separation,
    complexity_fit,
    conditional_max_sample,
    conditional_max_samples,
    event_c_check,
    lemma3_mc,
    near_optimal_count,
    pac_estimate,
    uniform_grid_baseline,
    wilson_ci,
)
from .brownian import (
    BrownianPath,
    bridge_max_exceed_prob,
    bridge_max_from_uniform,
    bridge_max_from_uniforms,
    bridge_max_sample,
    new_path,
)
from .optimizer import (
    MAX_DEPTH,
    DyadicInterval,
    RunResult,
    compute_h_max,
    eta,
    run_oob,
    run_oob_on_path,
    ucb,
)
from .rng import MASK64, RandomSource, derive_seed, splitmix64

__version__ = "0.1.0"

__all__ = [
    "BrownianPath",
    "DyadicInterval",
    "MASK64",
    "MAX_DEPTH",
    "NearOptimalCount",
    "RandomSource",
    "RunResult",
    "VerificationReport",
    "Z95",
    "__version__",
    "baseline_separation",
    "bridge_max_exceed_prob",
    "bridge_max_from_uniform",
    "bridge_max_from_uniforms",
    "bridge_max_sample",
    "complexity_fit",
    "compute_h_max",
    "conditional_max_sample",
    "conditional_max_samples",
    "derive_seed",
    "eta",
    "event_c_check",
    "lemma3_mc",
    "near_optimal_count",
    "new_path",
    "pac_estimate",
    "run_oob",
    "run_oob_on_path",
    "splitmix64",
    "ucb",
    "uniform_grid_baseline",
    "wilson_ci",
]
