"""Toy-scale 3D-CNN pulse regressor: trains on exported video clips with
surrogate pulse labels and writes predictions in the same CSV contract."""

from .data import (Clip, batch_tensors, list_clips, load_clip, load_clips,
                   load_split, normalize_batch)
from .errors import DataError, FormatError
from .loss import neg_pearson_loss
from .model import ToyPhysNet, build_model
from .predict import load_model, predict
from .train import TrainConfig, load_checkpoint, train

__version__ = "0.1.0"

__all__ = [
    "Clip", "DataError", "FormatError", "ToyPhysNet", "TrainConfig",
    "batch_tensors", "build_model", "list_clips", "load_checkpoint",
    "load_clip", "load_clips", "load_model", "load_split",
    "neg_pearson_loss", "normalize_batch", "predict", "train",
    "__version__",
]
