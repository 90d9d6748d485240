"""Collaborative filtering with variational latent sampling.

Four rating-prediction architectures built from scratch on numpy:
matrix factorization (DeepMF), its MLP variant (NCF), and both with a
stochastic latent stage (VDeepMF, VNCF) trained end to end through the
reparameterized sampler.  Includes the full evaluation protocol
(MAE/MSE/R2, precision/recall/nDCG top-N curves) and a reproducible
experiment pipeline.
"""

from .data import (
    RatingsDataset,
    SplitPair,
    TrainingBatch,
    batches,
    load_ratings,
    registry,
    split,
    synthetic_ratings,
)
from .experiment import ExperimentSpec, emit_report, load_report, run_experiment
from .metrics import (
    PredictionPairs,
    mae,
    mse,
    ndcg_at_n,
    precision_recall_at_n,
    r2,
    ranking_sweep,
)
from .models import (
    ARCHITECTURES,
    FitResult,
    ModelConfig,
    ModelParams,
    build_model,
    forward,
    load_checkpoint,
    loss_and_grads,
    predict,
    save_checkpoint,
    train_model,
)
from .rng import RngState, derive_seed, sample_standard_normal

__version__ = "0.1.0"

__all__ = [
    "ARCHITECTURES",
    "ExperimentSpec",
    "FitResult",
    "ModelConfig",
    "ModelParams",
    "PredictionPairs",
    "RatingsDataset",
    "RngState",
    "SplitPair",
    "TrainingBatch",
    "batches",
    "build_model",
    "derive_seed",
    "emit_report",
    "forward",
    "load_checkpoint",
    "load_ratings",
    "load_report",
    "loss_and_grads",
    "mae",
    "mse",
    "ndcg_at_n",
    "precision_recall_at_n",
    "predict",
    "r2",
    "ranking_sweep",
    "registry",
    "run_experiment",
    "sample_standard_normal",
    "save_checkpoint",
    "split",
    "synthetic_ratings",
    "train_model",
]
