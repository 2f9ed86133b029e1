"""Cyclical learning-rate schedules."""

import math

from rdmnet.schemas.inputs import ConstantSchedule, CyclicSchedule


def _cycle_position(step_size: int, iteration: int) -> tuple[int, float]:
    """Cycle index and the 0..1..0 triangle height at ``iteration``."""
    cycle, position = divmod(iteration, 2 * step_size)
    return cycle, 1.0 - abs(position - step_size) / step_size


def triangular_lr(base_lr: float, max_lr: float, step_size: int, iteration: int) -> float:
    """
    Linear ramp ``base_lr -> max_lr`` over ``step_size`` iterations, back down
    over the next ``step_size``, repeating with period ``2 * step_size``.
    """
    _, height = _cycle_position(step_size, iteration)
    return base_lr + (max_lr - base_lr) * height


def cyclic_lr(schedule: ConstantSchedule | CyclicSchedule, lr: float, iteration: int) -> float:
    """
    Learning rate for ``iteration`` (counted across all epochs and stages).

    ``constant`` returns ``lr``; ``triangular2`` halves the amplitude every
    cycle; ``exp_range`` scales it by ``gamma ** iteration``.
    """
    if isinstance(schedule, ConstantSchedule):
        return lr
    cycle, height = _cycle_position(schedule.step_size, iteration)
    amplitude = schedule.max_lr - schedule.base_lr
    if schedule.kind == "triangular2":
        amplitude /= math.pow(2.0, cycle)
    elif schedule.kind == "exp_range":
        amplitude *= math.pow(schedule.gamma, iteration)
    return schedule.base_lr + amplitude * height
