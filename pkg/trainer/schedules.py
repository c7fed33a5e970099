import math

from models.schemas import LRSchedule, LRScheduleKind


def learning_rate(schedule: LRSchedule, eta: float, epoch: int, total_epochs: int) -> float:
    """η in effect during `epoch` (0-based)."""
    if schedule.kind == LRScheduleKind.STEP:
        return eta * schedule.gamma ** (epoch // schedule.every_n_epochs)
    if schedule.kind == LRScheduleKind.COSINE:
        return 0.5 * eta * (1.0 + math.cos(math.pi * epoch / max(total_epochs, 1)))
    return eta
