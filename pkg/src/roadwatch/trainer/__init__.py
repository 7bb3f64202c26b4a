"""Classifier training: class-frequency loss weighting, RMSprop without
momentum, a compact residual network, and the epoch loop with the published
hyperparameter regime."""

from .weights import ClassFrequencyTable, ClassWeights, class_weights, weighted_loss
from .rmsprop import RMSPropNoMomentum, rmsprop_step
from .model import IncidentNet, ModelArchitecture, ResidualBlock
from .train import Checkpoint, PredictResult, TrainConfig, lr_at_epoch, predict, train

__all__ = [
    "Checkpoint",
    "ClassFrequencyTable",
    "ClassWeights",
    "IncidentNet",
    "ModelArchitecture",
    "PredictResult",
    "RMSPropNoMomentum",
    "ResidualBlock",
    "TrainConfig",
    "class_weights",
    "lr_at_epoch",
    "predict",
    "rmsprop_step",
    "train",
    "weighted_loss",
]
