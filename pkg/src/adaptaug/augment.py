"""Spectral augmentation operators: time masks, frequency masks, time substitution.

Features are T x F numpy arrays (frames by bins).  Randomness never comes
from a global source: planners take an explicit stream and record every
choice as an event, so a plan can be serialized, audited, and re-applied
bit-exactly.  Draw order per event is width first, then position(s); see
docs/FORMATS.md.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from .rng import Stream


@dataclass(frozen=True)
class AugLimits:
    """Maximum extents for the three operators (inclusive-width bounds)."""

    max_t_width: int = 50
    max_f_width: int = 10
    max_sub_width: int = 30

    def __post_init__(self):
        for name in ("max_t_width", "max_f_width", "max_sub_width"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v!r}")


@dataclass(frozen=True)
class TimeMask:
    """Zero frames t1..t2 inclusive, all bins."""

    t1: int
    t2: int


@dataclass(frozen=True)
class FreqMask:
    """Zero bins f1..f2 inclusive, all frames."""

    f1: int
    f2: int


@dataclass(frozen=True)
class TimeSub:
    """Overwrite frames [dest, dest+width) with frames [src, src+width)."""

    dest: int
    src: int
    width: int


Event = Union[TimeMask, FreqMask, TimeSub]
Plan = List[Event]


def _check_shape(shape: Sequence[int]) -> Tuple[int, int]:
    frames, bins = int(shape[0]), int(shape[1])
    if frames < 1 or bins < 1:
        raise ValueError(f"feature shape must be at least 1x1, got {frames}x{bins}")
    return frames, bins


def plan_time_masks(n: int, shape: Sequence[int], limits: AugLimits,
                    stream: Stream) -> List[TimeMask]:
    """Plan ``n`` time-mask events for a matrix of the given shape.

    Width (t2 - t1) is uniform over [0, min(max_t_width, T-1)], then the
    start is uniform over the positions keeping the mask inside the matrix.
    Masks may overlap.
    """
    if n < 0:
        raise ValueError(f"mask count must be >= 0, got {n}")
    frames, _ = _check_shape(shape)
    wmax = min(limits.max_t_width, frames - 1)
    events = []
    for _ in range(n):
        width = stream.randint_below(wmax + 1)
        start = stream.randint_below(frames - width)
        events.append(TimeMask(start, start + width))
    return events


def plan_freq_masks(n: int, shape: Sequence[int], limits: AugLimits,
                    stream: Stream) -> List[FreqMask]:
    """Mirror of plan_time_masks over the frequency axis."""
    if n < 0:
        raise ValueError(f"mask count must be >= 0, got {n}")
    _, bins = _check_shape(shape)
    wmax = min(limits.max_f_width, bins - 1)
    events = []
    for _ in range(n):
        width = stream.randint_below(wmax + 1)
        start = stream.randint_below(bins - width)
        events.append(FreqMask(start, start + width))
    return events


def plan_time_subs(n: int, shape: Sequence[int], limits: AugLimits,
                   stream: Stream, *, arbitrary_source: bool = False) -> List[TimeSub]:
    """Plan ``n`` time-substitution events.

    Chunk width is uniform over [1, min(max_sub_width, T)], the destination
    start uniform over [0, T - width], and the source start uniform over
    [0, dest] so the copied chunk comes from at or before the destination.
    src == dest is a permitted identity substitution (the only possibility
    when T == 1).  With ``arbitrary_source`` the source start instead
    ranges over the full [0, T - width].
    """
    if n < 0:
        raise ValueError(f"substitution count must be >= 0, got {n}")
    frames, _ = _check_shape(shape)
    wmax = min(limits.max_sub_width, frames)
    events = []
    for _ in range(n):
        width = 1 + stream.randint_below(wmax)
        dest = stream.randint_below(frames - width + 1)
        if arbitrary_source:
            src = stream.randint_below(frames - width + 1)
        else:
            src = stream.randint_below(dest + 1)
        events.append(TimeSub(dest, src, width))
    return events


def _check_event(event: Event, frames: int, bins: int) -> None:
    if isinstance(event, TimeMask):
        if not (0 <= event.t1 <= event.t2 < frames):
            raise ValueError(f"{event} out of bounds for {frames} frames")
    elif isinstance(event, FreqMask):
        if not (0 <= event.f1 <= event.f2 < bins):
            raise ValueError(f"{event} out of bounds for {bins} bins")
    elif isinstance(event, TimeSub):
        if event.width < 1 or event.dest < 0 or event.src < 0:
            raise ValueError(f"{event} has invalid indices")
        if event.dest + event.width > frames or event.src + event.width > frames:
            raise ValueError(f"{event} out of bounds for {frames} frames")
    else:
        raise ValueError(f"unknown event type {event!r}")


def apply_plan(features: np.ndarray, plan: Sequence[Event]) -> np.ndarray:
    """Apply events in plan order to a copy of ``features``.

    Masks write exact zeros.  A substitution reads the source chunk as the
    previous events left it, snapshotting before the write so overlapping
    source/destination ranges within one event stay consistent.  The input
    array is never modified.
    """
    if features.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {features.shape}")
    frames, bins = _check_shape(features.shape)
    for event in plan:
        _check_event(event, frames, bins)
    out = features.copy()
    for event in plan:
        if isinstance(event, TimeMask):
            out[event.t1:event.t2 + 1, :] = 0
        elif isinstance(event, FreqMask):
            out[:, event.f1:event.f2 + 1] = 0
        else:
            chunk = out[event.src:event.src + event.width, :].copy()
            out[event.dest:event.dest + event.width, :] = chunk
    return out
