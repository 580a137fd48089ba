"""Loss-adaptive augmentation policy.

Maps a batch of per-sample training losses (measured before any
augmentation) to per-sample strength values lambda in [0, 1], where low
loss means easy sample means strong augmentation.  Two policies are
provided: the hybrid normalization pipeline (clip -> ratio-normalize ->
min-max -> 1 - I_x) that reacts to the actual loss values, and the older
rank-based policy that only sees loss ordering.  A third mapping turns
lambda into integer operation counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

from .betainc import DEFAULT_IBF, IbfParams, regularized_ibf

FIXED_COUNTS = (2, 2, 1)


@dataclass(frozen=True)
class AugCounts:
    """How many of each operation one sample receives."""

    n_time_mask: int
    n_freq_mask: int
    n_time_sub: int

    def as_tuple(self):
        return (self.n_time_mask, self.n_freq_mask, self.n_time_sub)


@dataclass(frozen=True)
class LossPipelineTrace:
    """Every intermediate of the hybrid normalization, for auditing.

    Parallel lists over the batch: raw losses, clipped losses, the
    ratio-normalized values, the min-max scaled values, and the final
    lambdas.  l_mean / l_var are the raw-loss batch mean and population
    variance that define the clip window.
    """

    l_raw: List[float]
    l_clipped: List[float]
    l_meannorm: List[float]
    l_minmax: List[float]
    lam: List[float]
    l_mean: float
    l_var: float


def _check_losses(losses: Sequence[float]) -> List[float]:
    vals = [float(x) for x in losses]
    if len(vals) == 0:
        raise ValueError("loss batch must contain at least one sample")
    for i, v in enumerate(vals):
        if not math.isfinite(v):
            raise ValueError(f"loss at index {i} is not finite: {v}")
    return vals


def hybrid_normalize(losses: Sequence[float], ibf: IbfParams = DEFAULT_IBF,
                     *, clip_with_std: bool = False) -> LossPipelineTrace:
    """Run the four-step hybrid normalization over one batch.

    Steps: (1) clip each loss to mean +/- 2*var of the raw batch (population
    variance; ``clip_with_std`` substitutes the standard deviation), (2)
    ratio-normalize x -> x / (x + mean(clipped)), (3) min-max scale to
    [0, 1], (4) lambda = 1 - I_x under ``ibf``.  When min-max degenerates
    (all equal, e.g. a constant batch or B == 1) every scaled value is
    defined as 0.5, a neutral mid-strength policy.
    """
    raw = _check_losses(losses)
    b = len(raw)
    mean = sum(raw) / b
    var = sum((x - mean) ** 2 for x in raw) / b
    spread = math.sqrt(var) if clip_with_std else var
    lo = mean - 2.0 * spread
    hi = mean + 2.0 * spread
    clipped = [min(max(x, lo), hi) for x in raw]
    cmean = sum(clipped) / b
    meannorm = []
    for x in clipped:
        denom = x + cmean
        # Only reachable when every clipped loss is zero; any constant works
        # here because min-max degenerates next, so pick the neutral one.
        meannorm.append(x / denom if denom != 0.0 else 0.5)
    mmin = min(meannorm)
    mmax = max(meannorm)
    if mmax == mmin:
        minmax = [0.5] * b
    else:
        scale = mmax - mmin
        minmax = [(x - mmin) / scale for x in meannorm]
    lam = [1.0 - regularized_ibf(x, ibf) for x in minmax]
    return LossPipelineTrace(raw, clipped, meannorm, minmax, lam, mean, var)


def rank_policy(losses: Sequence[float], ibf: IbfParams = DEFAULT_IBF) -> List[float]:
    """Rank-based policy: lambda_i = 1 - I_{rank_i / B}.

    rank_i is the 1-based ascending rank of the i-th loss; ties break by
    input index (stable sort), so equal losses get consecutive ranks.
    """
    raw = _check_losses(losses)
    b = len(raw)
    order = sorted(range(b), key=raw.__getitem__)
    lam = [0.0] * b
    for rank0, idx in enumerate(order):
        lam[idx] = 1.0 - regularized_ibf((rank0 + 1) / b, ibf)
    return lam


def counts_from_lambda(lam: float, path: str = "adaptive", *,
                       time_mult: float = 4.0, freq_mult: float = 4.0,
                       sub_mult: float = 2.0) -> AugCounts:
    """Map one lambda to operation counts.

    Adaptive path: (ceil(4*lam), ceil(4*lam), ceil(2*lam)) with the
    multipliers configurable per operator.  Fixed path: (2, 2, 1)
    regardless of lambda.
    """
    if not (0.0 <= lam <= 1.0):
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if path == "fixed":
        return AugCounts(*FIXED_COUNTS)
    if path != "adaptive":
        raise ValueError(f"path must be 'adaptive' or 'fixed', got {path!r}")
    return AugCounts(
        math.ceil(time_mult * lam),
        math.ceil(freq_mult * lam),
        math.ceil(sub_mult * lam),
    )
