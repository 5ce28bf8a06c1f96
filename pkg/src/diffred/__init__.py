"""DiffRed: principal components plus a Monte-Carlo-selected Gaussian map on
the residual, with M1 / Stress distortion metrics and stable-rank tools."""

from .data import DataMatrix, load_matrix, preprocess, save_matrix
from .embed import (
    DiffRedConfig,
    EmbeddingMatrix,
    HyperparameterChoice,
    RMapResult,
    auto_config,
    diffred_embed,
    energy_match,
    pca_embed,
    rmap_embed,
    select_hyperparameters,
    stress_bound,
)
from .errors import ConfigError, DataIOError, DiffRedError, NumericError, ParseError, ZeroRowError
from .metrics import (
    MetricReport,
    beta_sensitivity,
    m1,
    m1_signed,
    pairwise_energy_identity_check,
    stress_exact,
    stress_sampled,
    triangle_bound_check,
)
from .projection import GaussianMap, MonteCarloResult, monte_carlo_best, project, sample_map
from .rng import Purpose, RandomStream, gaussian_draw
from .spectral import (
    ResidualPair,
    SpectralSummary,
    explained_variance,
    residual,
    residual_stable_rank_curve,
    stable_rank,
    truncated_svd,
)
from .synth import SpectrumProfile, synth_spiked

__version__ = "0.1.0"
