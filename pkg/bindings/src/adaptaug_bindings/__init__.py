"""Host-loop bindings for the adaptaug engine.

Three functions mirror the engine's operations for training loops that
hold their own tensors and configs: :func:`bound_augment_batch`,
:func:`bound_hybrid_normalize`, and :func:`bound_schedule_at`.  Configs
cross the boundary as plain mappings in the same grammar the CLI's
``--config`` file uses, and results come back as JSON-able mappings, so a
host loop never needs the engine's own dataclasses.

Everything is copy-in/copy-out: input arrays are copied before the engine
sees them and outputs are freshly owned by the caller, so no engine code
ever aliases host memory.  Errors surface as the engine's own exceptions
(``ValueError`` and friends) with their messages intact.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from adaptaug import (
    IbfParams,
    augment_batch,
    engine_config_from_mapping,
    hybrid_normalize,
    report_to_mappings,
    schedule_at,
    schedule_state_to_mapping,
    trace_to_mapping,
)

__version__ = "0.1.0"

__all__ = [
    "BoundBatch",
    "bound_augment_batch",
    "bound_hybrid_normalize",
    "bound_schedule_at",
    "__version__",
]


@dataclass(frozen=True)
class BoundBatch:
    """One batch as the host loop holds it.

    ``features`` is any sequence of (T, F) numeric arrays, ``losses`` the
    matching per-sample loss values, ``epoch`` the 0-based training epoch,
    and ``config`` an engine-config mapping (missing keys fall back to the
    engine defaults).  ``sample_ids`` and ``batch_index`` feed the report
    and the per-sample random streams exactly as the CLI's augment
    subcommand does.
    """

    features: Sequence[Any]
    losses: Sequence[float]
    epoch: int
    config: Optional[Mapping[str, Any]] = None
    sample_ids: Optional[Sequence[str]] = None
    batch_index: int = 0


def _copy_in(features: Sequence[Any]) -> List[np.ndarray]:
    copied = []
    for i, f in enumerate(features):
        arr = np.array(f, dtype=np.float32, order="C", copy=True)
        if arr.ndim != 2:
            raise ValueError(
                f"feature {i} must be a 2-D (frames x bins) array, "
                f"got shape {arr.shape}"
            )
        copied.append(arr)
    return copied


def bound_augment_batch(batch: BoundBatch) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    """Run the engine on a host batch.

    Returns ``(augmented, report)`` where ``augmented`` is a list of fresh
    float32 arrays and ``report`` is a mapping with the batch header under
    ``"batch"`` and the per-sample records under ``"samples"`` — the same
    records, key for key, that the CLI writes to ``report.jsonl``.
    """
    if not isinstance(batch, BoundBatch):
        raise TypeError(f"expected a BoundBatch, got {type(batch).__name__}")
    config = engine_config_from_mapping(dict(batch.config or {}))
    features = _copy_in(batch.features)
    losses = [float(v) for v in batch.losses]
    augmented, report = augment_batch(
        features,
        losses,
        int(batch.epoch),
        config,
        batch_index=int(batch.batch_index),
        sample_ids=batch.sample_ids,
    )
    records = report_to_mappings(report)
    out = [np.array(a, dtype=np.float32, copy=True) for a in augmented]
    return out, {"batch": records[0], "samples": records[1:]}


def bound_hybrid_normalize(
    losses: Sequence[float],
    ibf: Optional[Mapping[str, float]] = None,
    *,
    clip_with_std: bool = False,
) -> Dict[str, Any]:
    """Normalize one loss batch; every pipeline stage comes back as a list.

    ``ibf`` is an optional ``{"s": ..., "a": ...}`` mapping; the result
    carries ``l_raw`` through ``lambda`` plus the clip-window statistics,
    keyed exactly as in engine reports.
    """
    params = IbfParams(**dict(ibf)) if ibf else IbfParams()
    trace = hybrid_normalize([float(v) for v in losses], params,
                             clip_with_std=clip_with_std)
    return trace_to_mapping(trace)


def bound_schedule_at(
    epoch: int,
    schedule: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    """Resolve the gate probabilities for one epoch.

    ``schedule`` uses the config-file grammar (``total_epochs``, ``ibf``,
    ``mask``/``sub`` with ``p_start``/``p_end``); the result maps
    ``epoch``, ``epoch_policy``, ``p_mask``, and ``p_sub``.
    """
    config = engine_config_from_mapping(
        {"schedule": dict(schedule)} if schedule else {}
    ).schedule
    return schedule_state_to_mapping(schedule_at(int(epoch), config))
