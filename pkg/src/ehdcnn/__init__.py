"""Expansive hyperbolic deep convolutional networks on the Poincaré ball."""

from . import autodiff, data, diffgeo, geometry, metrics, nn, train
from .data import Dataset, SplitSpec, gen_synthetic, load_csv, split, synthetic_task
from .metrics import DeltaEstimate, accuracy, gromov_delta, rmse
from .nn import ModelParams, forward, init_params
from .train import RunHistory, TrainConfig, curvature_sweep, fit

__version__ = "0.1.0"

__all__ = [
    "autodiff", "data", "diffgeo", "geometry", "metrics", "nn", "train",
    "Dataset", "SplitSpec", "gen_synthetic", "load_csv", "split", "synthetic_task",
    "DeltaEstimate", "accuracy", "gromov_delta", "rmse",
    "ModelParams", "forward", "init_params",
    "RunHistory", "TrainConfig", "curvature_sweep", "fit",
]
