"""Robust classifier training under label noise.

Mini-batch training that drops confusing high-loss samples and salvages
confidently predicted ones by relabeling them from the model's own recent
prediction history, plus a synthetic noisy-dataset generator and
diagnostics for measuring selection quality against known provenance.
"""

from .datasets import NoiseConfig, Provenance, ProvenancedSample, generate
from .estimator import SelectiveRelabelClassifier
from .history import PredictionHistory
from .metrics import EpochDiagnostics, epoch_diagnostics
from .network import GradientSet, ModelState, init_model
from .selection import BatchPartition
from .training import EpochLog, TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "BatchPartition",
    "EpochDiagnostics",
    "EpochLog",
    "GradientSet",
    "ModelState",
    "NoiseConfig",
    "PredictionHistory",
    "Provenance",
    "ProvenancedSample",
    "SelectiveRelabelClassifier",
    "TrainConfig",
    "epoch_diagnostics",
    "generate",
    "init_model",
    "train",
]
