from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .network import (
    DEFAULT_WIDTHS,
    Network,
    backward,
    batch_loss,
    encode,
    forward,
    init_network,
    smooth_l1,
    update_running_stats,
)
from .optim import AdamState, adam_step
from .training import TrainConfig, TrainingError, split_sessions, train

__all__ = [
    "DEFAULT_WIDTHS",
    "AdamState",
    "Checkpoint",
    "CheckpointError",
    "Network",
    "TrainConfig",
    "TrainingError",
    "adam_step",
    "backward",
    "batch_loss",
    "encode",
    "forward",
    "init_network",
    "load_checkpoint",
    "save_checkpoint",
    "smooth_l1",
    "split_sessions",
    "train",
    "update_running_stats",
]
