"""Trainer for the residual enhancement networks."""

from .config import TrainConfig
from .data import TripletDataset, load_scene
from .export import export_weights, numpy_forward, read_weights
from .losses import color_loss, noise_weight, restoration_loss, total_loss
from .model import ResidualNet
from .train import NonFiniteLossError, train

__version__ = "0.1.0"

__all__ = [
    "TrainConfig",
    "TripletDataset",
    "load_scene",
    "export_weights",
    "numpy_forward",
    "read_weights",
    "color_loss",
    "noise_weight",
    "restoration_loss",
    "total_loss",
    "ResidualNet",
    "NonFiniteLossError",
    "train",
]
