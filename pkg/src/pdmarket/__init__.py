"""Two-parameter Poisson-Dirichlet toolkit for capital distribution curves.

Exact partition-structure laws, four sampling constructions, a down-up
Markov chain, Wright-Fisher stick diffusions with market value and prices,
and least-squares curve fitting, with a CLI front end.
"""

from .diffusion import (
    DiffusionConfig,
    PricePaths,
    simulate,
    stationary_moments,
)
from .duchain import ChainConfig, Trajectory, down_step, run_chain, up_step
from .errors import (
    ConfigError,
    DataError,
    DomainError,
    PDMarketError,
    StateError,
)
from .exact import consistency_check, esf_log_prob, psf_log_prob
from .fitting import (
    FitResult,
    SearchConfig,
    WeightCurve,
    average_pd_curve,
    fit_params,
    ingest_caps,
    loglog_loss,
)
from .params import PDParams
from .partitions import (
    FrequencyVector,
    PartitionClass,
    class_to_freq,
    down_neighbors,
    enumerate_classes,
    freq_to_class,
    multiplicity,
    up_neighbors,
)
from .samplers import (
    RankedWeights,
    TruncationRule,
    broken_stick_expected,
    derive_seed,
    rank_normalize,
    sample_crp,
    sample_sticks_size_biased,
    sample_subordinator,
    sample_symmetric_dirichlet,
)

__version__ = "0.1.0"

__all__ = [
    "PDParams",
    "PDMarketError",
    "DomainError",
    "DataError",
    "ConfigError",
    "StateError",
    "FrequencyVector",
    "PartitionClass",
    "freq_to_class",
    "class_to_freq",
    "multiplicity",
    "enumerate_classes",
    "down_neighbors",
    "up_neighbors",
    "esf_log_prob",
    "psf_log_prob",
    "consistency_check",
    "RankedWeights",
    "TruncationRule",
    "derive_seed",
    "sample_symmetric_dirichlet",
    "sample_sticks_size_biased",
    "sample_crp",
    "sample_subordinator",
    "broken_stick_expected",
    "rank_normalize",
    "ChainConfig",
    "Trajectory",
    "down_step",
    "up_step",
    "run_chain",
    "DiffusionConfig",
    "PricePaths",
    "simulate",
    "stationary_moments",
    "WeightCurve",
    "SearchConfig",
    "FitResult",
    "average_pd_curve",
    "loglog_loss",
    "fit_params",
    "ingest_caps",
    "__version__",
]
