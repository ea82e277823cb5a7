"""Numpy neural-network core: layers, containers, Adam and the trainer."""

from .kernels import BACKEND, available_backends
from .layers import GRU, Dense, xavier_uniform
from .network import Branched, Network, Sequential, network_from_config, param_count
from .optim import AdamState, adam_step
from .train import ArrayDataset, EarlyStopping, TrainConfig, TrainHistory, WindowSet, train

__all__ = [
    "BACKEND", "available_backends", "GRU", "Dense", "xavier_uniform", "Branched", "Network",
    "Sequential", "network_from_config", "param_count", "AdamState", "adam_step", "ArrayDataset",
    "EarlyStopping", "TrainConfig", "TrainHistory", "WindowSet", "train",
]
