"""Serve torch checkpoints behind the certifier's wire protocol."""

from .checkpoint import CheckpointError, LoadedModel, build_module, load_checkpoint
from .server import BridgeConfig, predict_labels, serve

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig",
    "CheckpointError",
    "LoadedModel",
    "build_module",
    "load_checkpoint",
    "predict_labels",
    "serve",
]
