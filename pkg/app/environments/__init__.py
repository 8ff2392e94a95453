from .base import AccessMode, GenerativeModel, NoiseKind, NoiseModel, path_states, path_value
from .synthetic import (
    SINK,
    SyntheticTree,
    build_synthetic_tree,
    load_synthetic_tree,
    save_synthetic_tree,
)
from .toy import ToyMDP, ToyMDPState, toy_step

__all__ = [
    "AccessMode",
    "GenerativeModel",
    "NoiseKind",
    "NoiseModel",
    "SINK",
    "SyntheticTree",
    "ToyMDP",
    "ToyMDPState",
    "build_synthetic_tree",
    "load_synthetic_tree",
    "path_states",
    "path_value",
    "save_synthetic_tree",
    "toy_step",
]
