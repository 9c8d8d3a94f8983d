"""Find the most human-interpretable model among accurate candidates.

The pipeline: build a zoo of accuracy-filtered candidate models, estimate an
interpretability prior for a few of them from (real or simulated) response-
time studies, and let a Gaussian process decide which model to study next.
"""

from .data import (
    Column,
    DataError,
    Dataset,
    PointSet,
    RawTable,
    Schema,
    generate_synthetic,
    load_csv,
    load_dataset,
    prepare_dataset,
    preprocess,
    sample_points,
    save_dataset,
    split,
)
from .explain import LocalExplanation, LocalRegionConfig, boundary_scan, fit_local_proxy
from .mlp import MlpHyperparams, MlpModel, fit_mlp, gradient_importances, predict_mlp
from .oracle import (
    OracleResult,
    ScoreConfig,
    SimulatedOracle,
    SimulatedOracleSpec,
    aggregate_quiz,
    estimate_prior_global,
    estimate_prior_local,
    interpretability_score,
)
from .bayesopt import GPState, KernelParams, PipelineTrace, acquire, gp_fit, gp_predict, rbf_kernel, run_pipeline
from .trees import ProxyScores, TreeHyperparams, TreeModel, feature_importances, fit_tree, predict, prune
from .zoo import ModelRecord, ModelZoo, SilfParams, generate_zoo, likelihood, load_zoo, save_zoo, soft_insensitive_loss

__version__ = "0.1.0"
