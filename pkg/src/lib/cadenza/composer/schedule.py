"""
KL weight schedule: linear warm-up envelope times a cosine cycle.
"""

import math


def beta_schedule(step: int, beta_max: float, warmup_steps: int = 25000,
                  ramp_steps: int = 25000, cycle_steps: int = 10000) -> float:
    """
    KL weight at a training step.

    envelope is 0 before `warmup_steps`, rises linearly to beta_max over
    `ramp_steps` and stays there. cycle is 0.5 * (1 - cos(2*pi*phase)) with
    phase = (step mod cycle_steps) / cycle_steps, or 1 when cycling is off.

    Args:
        step: Training step
        beta_max: Final envelope value
        warmup_steps: Steps held at zero
        ramp_steps: Length of the linear rise
        cycle_steps: Cosine cycle period; 0 disables cycling

    Returns:
        envelope * cycle
    """
    if step < warmup_steps:
        return 0.0
    if ramp_steps == 0 or step >= warmup_steps + ramp_steps:
        envelope = beta_max
    else:
        envelope = beta_max * (step - warmup_steps) / ramp_steps
    if cycle_steps == 0:
        return envelope
    phase = (step % cycle_steps) / cycle_steps
    return envelope * 0.5 * (1.0 - math.cos(2.0 * math.pi * phase))
