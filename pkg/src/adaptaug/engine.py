"""One training step's augmentation, end to end.

Given a batch of feature matrices with their pre-augmentation losses and
the current epoch, the engine resolves the gate probabilities from the
schedule, computes per-sample lambda under the configured policy, flips a
per-sample coin for each channel (one for both mask types, one for
substitution), maps the outcome to operation counts, plans and applies the
events, and returns the augmented features together with a replayable
report.

Determinism contract: each sample owns the stream derived from
(master_seed, epoch, batch_index, sample_index) and consumes it in a fixed
order -- mask-gate coin, sub-gate coin, time-mask events, freq-mask
events, substitution events.  The two coins are drawn in every stage and
gate configuration, so event randomness never shifts when only the stage
or the probabilities change; the pretraining stage simply ignores the coin
values and always takes the fixed counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .augment import AugLimits, Plan, apply_plan, plan_freq_masks, plan_time_masks, plan_time_subs
from .betainc import DEFAULT_IBF, IbfParams
from .policy import (
    AugCounts,
    FIXED_COUNTS,
    LossPipelineTrace,
    counts_from_lambda,
    hybrid_normalize,
    rank_policy,
)
from .rng import derive_sample_stream
from .schedule import ScheduleConfig, ScheduleState, schedule_at

POLICY_KINDS = ("hybrid", "rank", "fixed")
STAGES = ("pretrain", "adaptive")

GATE_ADAPTIVE = "adaptive"
GATE_FIXED = "fixed"


@dataclass(frozen=True)
class EngineConfig:
    policy_kind: str = "hybrid"
    limits: AugLimits = field(default_factory=AugLimits)
    schedule: ScheduleConfig = field(default_factory=lambda: ScheduleConfig(total_epochs=100))
    ibf: IbfParams = DEFAULT_IBF
    master_seed: int = 0
    stage: str = "adaptive"
    epoch_offset: int = 0
    clip_with_std: bool = False
    sub_arbitrary_source: bool = False
    time_mask_mult: float = 4.0
    freq_mask_mult: float = 4.0
    time_sub_mult: float = 2.0

    def __post_init__(self):
        if self.policy_kind not in POLICY_KINDS:
            raise ValueError(f"policy_kind must be one of {POLICY_KINDS}, got {self.policy_kind!r}")
        if self.stage not in STAGES:
            raise ValueError(f"stage must be one of {STAGES}, got {self.stage!r}")
        if not isinstance(self.epoch_offset, int) or self.epoch_offset < 0:
            raise ValueError(f"epoch_offset must be a non-negative integer, got {self.epoch_offset!r}")
        if not isinstance(self.master_seed, int) or not (0 <= self.master_seed < 2**64):
            raise ValueError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed!r}")


@dataclass(frozen=True)
class SampleAugRecord:
    """Everything that happened to one sample, enough to replay it."""

    sample_id: str
    lam: Optional[float]
    gate_mask: str
    gate_sub: str
    counts: AugCounts
    plan: Plan


@dataclass(frozen=True)
class BatchAugReport:
    """Audit record for one augmented batch."""

    epoch: int
    batch_index: int
    stage: str
    policy_kind: str
    master_seed: int
    schedule: Optional[ScheduleState]
    trace: Optional[LossPipelineTrace]
    samples: List[SampleAugRecord]


def _check_features(features: Sequence[np.ndarray]) -> None:
    for i, f in enumerate(features):
        if not isinstance(f, np.ndarray) or f.ndim != 2:
            raise ValueError(f"feature {i} must be a 2-D array")
        if f.shape[0] < 1 or f.shape[1] < 1:
            raise ValueError(f"feature {i} has empty shape {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError(f"feature {i} contains non-finite values")


def augment_batch(
    features: Sequence[np.ndarray],
    losses: Sequence[float],
    epoch: int,
    config: EngineConfig,
    *,
    batch_index: int = 0,
    sample_ids: Optional[Sequence[str]] = None,
) -> Tuple[List[np.ndarray], BatchAugReport]:
    """Augment one batch and report every decision.

    ``epoch`` keys the random streams as given; the schedule is consulted
    at ``epoch + config.epoch_offset``.  ``sample_ids`` default to the
    in-batch indices.  In the pretraining stage neither the schedule nor
    the policy is consulted and every sample gets the fixed counts.
    """
    if len(features) != len(losses):
        raise ValueError(
            f"features ({len(features)}) and losses ({len(losses)}) must have equal length"
        )
    if len(features) == 0:
        raise ValueError("batch must contain at least one sample")
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    _check_features(features)
    if sample_ids is None:
        ids = [str(i) for i in range(len(features))]
    else:
        if len(sample_ids) != len(features):
            raise ValueError("sample_ids length must match the batch")
        ids = [str(s) for s in sample_ids]

    pretrain = config.stage == "pretrain"
    state: Optional[ScheduleState] = None
    trace: Optional[LossPipelineTrace] = None
    lambdas: Optional[List[float]] = None
    if not pretrain:
        state = schedule_at(epoch + config.epoch_offset, config.schedule)
        if config.policy_kind == "hybrid":
            trace = hybrid_normalize(losses, config.ibf, clip_with_std=config.clip_with_std)
            lambdas = trace.lam
        elif config.policy_kind == "rank":
            lambdas = rank_policy(losses, config.ibf)

    augmented: List[np.ndarray] = []
    records: List[SampleAugRecord] = []
    for i, feat in enumerate(features):
        stream = derive_sample_stream(config.master_seed, epoch, batch_index, i)
        coin_mask = stream.next_float()
        coin_sub = stream.next_float()
        lam = lambdas[i] if lambdas is not None else None
        if pretrain:
            gate_mask = gate_sub = GATE_FIXED
            lam = None
        else:
            gate_mask = GATE_ADAPTIVE if coin_mask < state.p_mask else GATE_FIXED
            gate_sub = GATE_ADAPTIVE if coin_sub < state.p_sub else GATE_FIXED

        # With the fixed policy there is no lambda; both gates then fall
        # back to the fixed row even when the coin chose adaptive.
        adaptive = None
        if lam is not None:
            adaptive = counts_from_lambda(
                lam,
                time_mult=config.time_mask_mult,
                freq_mult=config.freq_mask_mult,
                sub_mult=config.time_sub_mult,
            )
        if gate_mask == GATE_ADAPTIVE and adaptive is not None:
            n_t, n_f = adaptive.n_time_mask, adaptive.n_freq_mask
        else:
            n_t, n_f = FIXED_COUNTS[0], FIXED_COUNTS[1]
        if gate_sub == GATE_ADAPTIVE and adaptive is not None:
            n_s = adaptive.n_time_sub
        else:
            n_s = FIXED_COUNTS[2]
        counts = AugCounts(n_t, n_f, n_s)

        plan: Plan = []
        plan.extend(plan_time_masks(counts.n_time_mask, feat.shape, config.limits, stream))
        plan.extend(plan_freq_masks(counts.n_freq_mask, feat.shape, config.limits, stream))
        plan.extend(
            plan_time_subs(
                counts.n_time_sub, feat.shape, config.limits, stream,
                arbitrary_source=config.sub_arbitrary_source,
            )
        )
        augmented.append(apply_plan(feat, plan))
        records.append(SampleAugRecord(ids[i], lam, gate_mask, gate_sub, counts, plan))

    report = BatchAugReport(
        epoch=epoch,
        batch_index=batch_index,
        stage=config.stage,
        policy_kind=config.policy_kind,
        master_seed=config.master_seed,
        schedule=state,
        trace=trace,
        samples=records,
    )
    return augmented, report
