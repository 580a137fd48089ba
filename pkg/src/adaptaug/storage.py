"""On-disk formats: SPGM feature files, loss manifests, reports, configs.

SPGM is a fixed little-endian binary layout (14-byte header + float32
payload) so feature matrices round-trip bit-exactly; manifests and batch
reports are UTF-8 JSON Lines; engine configs are a single JSON object.
Byte-level layouts and JSON schemas live in docs/FORMATS.md.  Writes go
through a temp file plus rename, so readers never observe partial files.
"""

from __future__ import annotations

import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from typing import Any, Dict, IO, List, Mapping, Optional, Sequence

import numpy as np

from .augment import AugLimits, FreqMask, Plan, TimeMask, TimeSub
from .betainc import IbfParams
from .engine import BatchAugReport, EngineConfig, SampleAugRecord
from .policy import AugCounts, LossPipelineTrace
from .schedule import ScheduleConfig, ScheduleState

MAGIC = b"SPGM"
VERSION = 1
_HEADER = struct.Struct("<4sHII")  # magic, version, frames, bins


class FormatError(ValueError):
    """A file does not conform to its documented layout."""

    def __init__(self, message: str, *, offset: Optional[int] = None,
                 line: Optional[int] = None):
        loc = ""
        if offset is not None:
            loc = f" (byte offset {offset})"
        elif line is not None:
            loc = f" (line {line})"
        super().__init__(message + loc)
        self.offset = offset
        self.line = line


def _atomic_write(path: str, write_body) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            write_body(fh)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# --- SPGM feature files ---------------------------------------------------

def write_features(features: np.ndarray, path: str) -> None:
    """Write a T x F matrix as an SPGM file (float32 LE, row-major)."""
    arr = np.asarray(features)
    if arr.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {arr.shape}")
    frames, bins = arr.shape
    if frames < 1 or bins < 1:
        raise ValueError(f"features must be at least 1x1, got {frames}x{bins}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("features contain non-finite values")
    payload = np.ascontiguousarray(arr, dtype="<f4")

    def body(fh: IO[bytes]) -> None:
        fh.write(_HEADER.pack(MAGIC, VERSION, frames, bins))
        fh.write(payload.tobytes())

    try:
        _atomic_write(path, body)
    except OSError as exc:
        raise OSError(f"cannot write feature file {path!r}: {exc}") from exc


def read_features(path: str) -> np.ndarray:
    """Read an SPGM file back into a float32 matrix, validating strictly."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise FormatError(f"{path!r}: truncated header", offset=len(header))
        magic, version, frames, bins = _HEADER.unpack(header)
        if magic != MAGIC:
            raise FormatError(f"{path!r}: bad magic {magic!r}", offset=0)
        if version != VERSION:
            raise FormatError(f"{path!r}: unsupported version {version}", offset=4)
        if frames < 1 or bins < 1:
            raise FormatError(f"{path!r}: empty dimensions {frames}x{bins}", offset=6)
        expected = 4 * frames * bins
        payload = fh.read(expected + 1)
        if len(payload) < expected:
            raise FormatError(
                f"{path!r}: payload truncated, expected {expected} bytes",
                offset=_HEADER.size + len(payload),
            )
        if len(payload) > expected:
            raise FormatError(f"{path!r}: trailing bytes after payload",
                              offset=_HEADER.size + expected)
    arr = np.frombuffer(payload, dtype="<f4").reshape(frames, bins)
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise FormatError(
            f"{path!r}: non-finite value at element {bad[0]}",
            offset=_HEADER.size + 4 * int(bad[0]),
        )
    return arr.copy()


# --- loss manifests -------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    sample_id: str
    feature_path: str
    loss: float


def _check_sample_id(sample_id: str) -> str:
    if not sample_id or "/" in sample_id or "\\" in sample_id or "\x00" in sample_id:
        raise ValueError(f"sample_id {sample_id!r} is empty or not filename-safe")
    return sample_id


def read_manifest(path: str) -> List[ManifestEntry]:
    """Parse a JSONL manifest; errors name the offending line."""
    entries: List[ManifestEntry] = []
    seen: Dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, text in enumerate(fh, start=1):
            text = text.strip()
            if not text:
                continue
            try:
                obj = json.loads(text)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path!r}: invalid JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(obj, dict):
                raise FormatError(f"{path!r}: manifest record must be an object", line=lineno)
            try:
                sid = _check_sample_id(str(obj["sample_id"]))
                feature_path = str(obj["feature_path"])
                loss = float(obj["loss"])
            except KeyError as exc:
                raise FormatError(f"{path!r}: missing field {exc.args[0]!r}", line=lineno) from exc
            except ValueError as exc:
                raise FormatError(f"{path!r}: {exc}", line=lineno) from exc
            if not math.isfinite(loss) or loss < 0.0:
                raise FormatError(
                    f"{path!r}: loss must be finite and >= 0, got {obj['loss']!r}",
                    line=lineno,
                )
            if sid in seen:
                raise FormatError(
                    f"{path!r}: duplicate sample_id {sid!r} (first seen on line {seen[sid]})",
                    line=lineno,
                )
            seen[sid] = lineno
            entries.append(ManifestEntry(sid, feature_path, loss))
    if not entries:
        raise FormatError(f"{path!r}: manifest is empty", line=1)
    return entries


def write_manifest(entries: Sequence[ManifestEntry], path: str) -> None:
    seen = set()
    for e in entries:
        _check_sample_id(e.sample_id)
        if e.sample_id in seen:
            raise ValueError(f"duplicate sample_id {e.sample_id!r}")
        seen.add(e.sample_id)
        if not math.isfinite(e.loss) or e.loss < 0.0:
            raise ValueError(f"loss for {e.sample_id!r} must be finite and >= 0")

    def body(fh: IO[bytes]) -> None:
        for e in entries:
            rec = {"sample_id": e.sample_id, "feature_path": e.feature_path, "loss": e.loss}
            fh.write((json.dumps(rec) + "\n").encode("utf-8"))

    _atomic_write(path, body)


# --- batch reports --------------------------------------------------------

def _event_to_mapping(event) -> Dict[str, Any]:
    if isinstance(event, TimeMask):
        return {"kind": "time_mask", "t1": event.t1, "t2": event.t2}
    if isinstance(event, FreqMask):
        return {"kind": "freq_mask", "f1": event.f1, "f2": event.f2}
    if isinstance(event, TimeSub):
        return {"kind": "time_sub", "dest": event.dest, "src": event.src, "width": event.width}
    raise ValueError(f"unknown event {event!r}")


def _event_from_mapping(obj: Mapping[str, Any]):
    kind = obj.get("kind")
    if kind == "time_mask":
        return TimeMask(int(obj["t1"]), int(obj["t2"]))
    if kind == "freq_mask":
        return FreqMask(int(obj["f1"]), int(obj["f2"]))
    if kind == "time_sub":
        return TimeSub(int(obj["dest"]), int(obj["src"]), int(obj["width"]))
    raise ValueError(f"unknown event kind {kind!r}")


def trace_to_mapping(trace: LossPipelineTrace) -> Dict[str, Any]:
    return {
        "l_raw": trace.l_raw,
        "l_clipped": trace.l_clipped,
        "l_meannorm": trace.l_meannorm,
        "l_minmax": trace.l_minmax,
        "lambda": trace.lam,
        "l_mean": trace.l_mean,
        "l_var": trace.l_var,
    }


def schedule_state_to_mapping(state: ScheduleState) -> Dict[str, Any]:
    return {
        "epoch": state.epoch,
        "epoch_policy": state.epoch_policy,
        "p_mask": state.p_mask,
        "p_sub": state.p_sub,
    }


def report_to_mappings(report: BatchAugReport) -> List[Dict[str, Any]]:
    """The report as JSON-able records: one batch header, then one per sample."""
    header = {
        "record": "batch",
        "epoch": report.epoch,
        "batch_index": report.batch_index,
        "stage": report.stage,
        "policy": report.policy_kind,
        "master_seed": report.master_seed,
        "schedule": schedule_state_to_mapping(report.schedule) if report.schedule else None,
        "trace": trace_to_mapping(report.trace) if report.trace else None,
    }
    lines = [header]
    for s in report.samples:
        lines.append({
            "record": "sample",
            "sample_id": s.sample_id,
            "lambda": s.lam,
            "gate_mask": s.gate_mask,
            "gate_sub": s.gate_sub,
            "counts": {
                "time_mask": s.counts.n_time_mask,
                "freq_mask": s.counts.n_freq_mask,
                "time_sub": s.counts.n_time_sub,
            },
            "plan": [_event_to_mapping(e) for e in s.plan],
        })
    return lines


def write_report(report: BatchAugReport, path: str) -> None:
    mappings = report_to_mappings(report)

    def body(fh: IO[bytes]) -> None:
        for obj in mappings:
            fh.write((json.dumps(obj) + "\n").encode("utf-8"))

    _atomic_write(path, body)


def read_report(path: str) -> List[Dict[str, Any]]:
    """Parse a report back into its record mappings (plans stay mappings)."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, text in enumerate(fh, start=1):
            text = text.strip()
            if not text:
                continue
            try:
                records.append(json.loads(text))
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path!r}: invalid JSON: {exc.msg}", line=lineno) from exc
    return records


def plan_from_mappings(events: Sequence[Mapping[str, Any]]) -> Plan:
    return [_event_from_mapping(e) for e in events]


# --- engine configuration -------------------------------------------------

def engine_config_to_mapping(config: EngineConfig) -> Dict[str, Any]:
    return {
        "policy": config.policy_kind,
        "stage": config.stage,
        "master_seed": config.master_seed,
        "epoch_offset": config.epoch_offset,
        "ibf": {"s": config.ibf.s, "a": config.ibf.a},
        "limits": {
            "max_t_width": config.limits.max_t_width,
            "max_f_width": config.limits.max_f_width,
            "max_sub_width": config.limits.max_sub_width,
        },
        "schedule": {
            "total_epochs": config.schedule.total_epochs,
            "ibf": {"s": config.schedule.ibf.s, "a": config.schedule.ibf.a},
            "mask": {"p_start": config.schedule.mask_p_start, "p_end": config.schedule.mask_p_end},
            "sub": {"p_start": config.schedule.sub_p_start, "p_end": config.schedule.sub_p_end},
        },
        "clip_with_std": config.clip_with_std,
        "sub_arbitrary_source": config.sub_arbitrary_source,
        "multipliers": {
            "time_mask": config.time_mask_mult,
            "freq_mask": config.freq_mask_mult,
            "time_sub": config.time_sub_mult,
        },
    }


def _ibf_from_mapping(obj: Optional[Mapping[str, Any]], fallback: IbfParams) -> IbfParams:
    if obj is None:
        return fallback
    return IbfParams(s=float(obj.get("s", fallback.s)), a=float(obj.get("a", fallback.a)))


def engine_config_from_mapping(obj: Mapping[str, Any]) -> EngineConfig:
    """Build an EngineConfig from a (possibly partial) mapping.

    Unknown keys are rejected so config typos fail loudly.
    """
    default = EngineConfig()
    known = {
        "policy", "stage", "master_seed", "epoch_offset", "ibf", "limits",
        "schedule", "clip_with_std", "sub_arbitrary_source", "multipliers",
    }
    unknown = set(obj) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    limits_obj = obj.get("limits", {}) or {}
    limits = AugLimits(
        max_t_width=int(limits_obj.get("max_t_width", default.limits.max_t_width)),
        max_f_width=int(limits_obj.get("max_f_width", default.limits.max_f_width)),
        max_sub_width=int(limits_obj.get("max_sub_width", default.limits.max_sub_width)),
    )
    sched_obj = obj.get("schedule", {}) or {}
    mask_obj = sched_obj.get("mask", {}) or {}
    sub_obj = sched_obj.get("sub", {}) or {}
    schedule = ScheduleConfig(
        total_epochs=int(sched_obj.get("total_epochs", default.schedule.total_epochs)),
        ibf=_ibf_from_mapping(sched_obj.get("ibf"), default.schedule.ibf),
        mask_p_start=float(mask_obj.get("p_start", default.schedule.mask_p_start)),
        mask_p_end=float(mask_obj.get("p_end", default.schedule.mask_p_end)),
        sub_p_start=float(sub_obj.get("p_start", default.schedule.sub_p_start)),
        sub_p_end=float(sub_obj.get("p_end", default.schedule.sub_p_end)),
    )
    mult_obj = obj.get("multipliers", {}) or {}
    return EngineConfig(
        policy_kind=str(obj.get("policy", default.policy_kind)),
        limits=limits,
        schedule=schedule,
        ibf=_ibf_from_mapping(obj.get("ibf"), default.ibf),
        master_seed=int(obj.get("master_seed", default.master_seed)),
        stage=str(obj.get("stage", default.stage)),
        epoch_offset=int(obj.get("epoch_offset", default.epoch_offset)),
        clip_with_std=bool(obj.get("clip_with_std", default.clip_with_std)),
        sub_arbitrary_source=bool(obj.get("sub_arbitrary_source", default.sub_arbitrary_source)),
        time_mask_mult=float(mult_obj.get("time_mask", default.time_mask_mult)),
        freq_mask_mult=float(mult_obj.get("freq_mask", default.freq_mask_mult)),
        time_sub_mult=float(mult_obj.get("time_sub", default.time_sub_mult)),
    )


def load_engine_config(path: str) -> EngineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path!r}: invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(obj, dict):
        raise FormatError(f"{path!r}: config must be a JSON object", line=1)
    return engine_config_from_mapping(obj)
