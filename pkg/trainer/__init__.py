from trainer.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from trainer.initialization import data_order_rng, init_weights
from trainer.schedules import learning_rate
from trainer.trainer import (
    StepResult,
    Trainer,
    TrainResult,
    apply_updates,
    compute_step,
    evaluate,
    layer_stats,
    train,
    train_step,
)

__all__ = [
    "init_weights",
    "data_order_rng",
    "learning_rate",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "StepResult",
    "TrainResult",
    "Trainer",
    "compute_step",
    "apply_updates",
    "train_step",
    "evaluate",
    "layer_stats",
    "train",
]
