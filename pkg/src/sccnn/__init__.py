"""Convolutional tweet sentiment classification and classify-and-count quantification."""

from .corpus import DataError, Dataset, Scale, Tweet
from .model import Model, load_checkpoint, save_checkpoint
from .train import TrainConfig, fit

__all__ = ["DataError", "Dataset", "Model", "Scale", "TrainConfig", "Tweet", "fit",
           "load_checkpoint", "save_checkpoint"]
__version__ = "0.1.0"
