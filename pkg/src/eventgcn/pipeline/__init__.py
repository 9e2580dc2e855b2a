"""Training, evaluation and experiment orchestration."""

from .metrics import PRF, MetricsReport, compute_prf, evaluate, score_events
from .synthetic import generate_corpus
from .training import TrainConfig, TrainingDiverged, prepare_examples, train
from .experiment import ExperimentError, load_experiment_config, run_experiment

__all__ = [
    "PRF",
    "MetricsReport",
    "compute_prf",
    "evaluate",
    "score_events",
    "generate_corpus",
    "TrainConfig",
    "TrainingDiverged",
    "prepare_examples",
    "train",
    "ExperimentError",
    "load_experiment_config",
    "run_experiment",
]
