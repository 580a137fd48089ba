"""Epoch-driven probabilities for the adaptive-vs-fixed augmentation gate.

The fraction of training completed, epoch / total_epochs, is shaped by the
regularized incomplete beta and then mapped affinely onto per-channel
probability ranges.  Both channels (masking, substitution) are
nondecreasing in the epoch by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .betainc import DEFAULT_IBF, IbfParams, regularized_ibf


@dataclass(frozen=True)
class ScheduleConfig:
    """Schedule shape and per-channel endpoints.

    With the default identity shaping and endpoints (0, 1), epoch 0
    reproduces plain fixed augmentation exactly and the final epoch gates
    adaptively with probability 1.
    """

    total_epochs: int
    ibf: IbfParams = DEFAULT_IBF
    mask_p_start: float = 0.0
    mask_p_end: float = 1.0
    sub_p_start: float = 0.0
    sub_p_end: float = 1.0

    def __post_init__(self):
        if not isinstance(self.total_epochs, int) or self.total_epochs < 1:
            raise ValueError(f"total_epochs must be an integer >= 1, got {self.total_epochs!r}")
        for channel in ("mask", "sub"):
            lo = getattr(self, f"{channel}_p_start")
            hi = getattr(self, f"{channel}_p_end")
            if not (0.0 <= lo <= hi <= 1.0):
                raise ValueError(
                    f"{channel} channel needs 0 <= p_start <= p_end <= 1, "
                    f"got ({lo}, {hi})"
                )


@dataclass(frozen=True)
class ScheduleState:
    epoch: int
    epoch_policy: float
    p_mask: float
    p_sub: float


def schedule_at(epoch: int, config: ScheduleConfig) -> ScheduleState:
    """Resolve gate probabilities for one epoch (0-based, inclusive of total).

    epoch_policy = I_{epoch/total}; each channel's p interpolates its
    endpoints by epoch_policy.  An epoch beyond total_epochs signals a
    mis-wired training loop and is rejected.
    """
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    if epoch > config.total_epochs:
        raise ValueError(
            f"epoch {epoch} exceeds total_epochs {config.total_epochs}"
        )
    policy = regularized_ibf(epoch / config.total_epochs, config.ibf)
    p_mask = config.mask_p_start + (config.mask_p_end - config.mask_p_start) * policy
    p_sub = config.sub_p_start + (config.sub_p_end - config.sub_p_start) * policy
    # Already in range mathematically; clamp only against float round-off.
    p_mask = min(max(p_mask, 0.0), 1.0)
    p_sub = min(max(p_sub, 0.0), 1.0)
    return ScheduleState(epoch, policy, p_mask, p_sub)
