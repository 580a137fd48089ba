"""Desk-scale closed-loop harness: loss -> policy -> augmentation -> training.

A small linear softmax classifier learns synthetic spectrogram-like data
while the augmentation engine adapts to its per-sample losses, exercising
the full fixed / adaptive / two-stage workflow in seconds.  The model is
deliberately minimal: the simulator validates the augmentation contract
(counts follow losses, gates follow the schedule, training still learns),
not recognition quality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from .engine import BatchAugReport, EngineConfig, GATE_ADAPTIVE, augment_batch
from .schedule import ScheduleConfig

REGIMES = ("fixed", "adaptive", "two_stage")


@dataclass(frozen=True)
class SyntheticTask:
    """Deterministic class-templated data: template[k] + gaussian noise."""

    num_classes: int = 4
    train_per_class: int = 200
    eval_per_class: int = 50
    frames: int = 64
    bins: int = 16
    noise: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.train_per_class < 1 or self.eval_per_class < 1:
            raise ValueError("need at least one sample per class per split")
        if self.frames < 1 or self.bins < 1:
            raise ValueError("frames and bins must be >= 1")

    def class_template(self, k: int) -> np.ndarray:
        """Stripe pattern with class-specific period plus a class band."""
        t = np.arange(self.frames)[:, None]
        period = 2 + (k % 7)
        template = ((t // period) % 2 == 0).astype(np.float32)
        template = np.repeat(template, self.bins, axis=1)
        lo = k * self.bins // self.num_classes
        hi = max(lo + 1, (k + 1) * self.bins // self.num_classes)
        template[:, lo:hi] += 1.0
        return template

    def generate(self):
        """(train_x, train_y, eval_x, eval_y); identical for identical seeds."""
        rng = np.random.default_rng(self.seed)
        templates = [self.class_template(k) for k in range(self.num_classes)]

        def draw(per_class: int):
            xs, ys = [], []
            for k in range(self.num_classes):
                noise = rng.standard_normal(
                    (per_class, self.frames, self.bins)).astype(np.float32)
                xs.append(templates[k][None, :, :] + self.noise * noise)
                ys.append(np.full(per_class, k, dtype=np.int64))
            return np.concatenate(xs), np.concatenate(ys)

        train_x, train_y = draw(self.train_per_class)
        eval_x, eval_y = draw(self.eval_per_class)
        return train_x, train_y, eval_x, eval_y


@dataclass(frozen=True)
class SimConfig:
    regime: str = "two_stage"
    stage1_epochs: int = 5
    stage2_epochs: int = 25
    learning_rate: float = 0.1
    batch_size: int = 32
    engine: EngineConfig = field(default_factory=EngineConfig)
    seed: int = 0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.stage1_epochs < 1 or self.stage2_epochs < 1:
            raise ValueError("both stage lengths must be >= 1")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2 for non-degenerate policy behavior")
        if not (self.learning_rate > 0.0):
            raise ValueError("learning_rate must be positive")

    @property
    def total_epochs(self) -> int:
        """Epochs actually run: fixed uses stage 1, adaptive stage 2, two_stage both."""
        if self.regime == "fixed":
            return self.stage1_epochs
        if self.regime == "adaptive":
            return self.stage2_epochs
        return self.stage1_epochs + self.stage2_epochs


@dataclass(frozen=True)
class EpochRow:
    epoch: int
    stage: str
    mean_train_loss: float
    eval_accuracy: float
    mean_lambda: Optional[float]
    adaptive_gate_rate: float
    mean_n_t: float
    mean_n_f: float
    mean_n_s: float


@dataclass(frozen=True)
class SimMetrics:
    rows: List[EpochRow]

    def to_csv(self) -> str:
        lines = ["epoch,stage,mean_train_loss,eval_accuracy,mean_lambda,"
                 "adaptive_gate_rate,mean_n_t,mean_n_f,mean_n_s"]
        for r in self.rows:
            lam = "" if r.mean_lambda is None else repr(r.mean_lambda)
            lines.append(
                f"{r.epoch},{r.stage},{r.mean_train_loss!r},{r.eval_accuracy!r},"
                f"{lam},{r.adaptive_gate_rate!r},{r.mean_n_t!r},{r.mean_n_f!r},{r.mean_n_s!r}"
            )
        return "\n".join(lines) + "\n"


class _LinearModel:
    """Softmax regression over flattened features, plain gradient descent."""

    def __init__(self, dim: int, classes: int):
        self.w = np.zeros((dim, classes), dtype=np.float64)
        self.b = np.zeros(classes, dtype=np.float64)

    def logits(self, x: np.ndarray) -> np.ndarray:
        return x @ self.w + self.b

    def losses(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        z = self.logits(x)
        z = z - z.max(axis=1, keepdims=True)
        logsumexp = np.log(np.exp(z).sum(axis=1))
        return logsumexp - z[np.arange(len(y)), y]

    def step(self, x: np.ndarray, y: np.ndarray, lr: float) -> None:
        z = self.logits(x)
        z = z - z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        p[np.arange(len(y)), y] -= 1.0
        p /= len(y)
        self.w -= lr * (x.T @ p)
        self.b -= lr * p.sum(axis=0)

    def accuracy(self, x: np.ndarray, y: np.ndarray) -> float:
        return float((self.logits(x).argmax(axis=1) == y).mean())


def _stage_plan(config: SimConfig):
    """(stage label, engine config, local epoch) for each global epoch."""
    base = config.engine
    if config.regime == "fixed":
        cfg = replace(base, stage="pretrain")
        return [("fixed", cfg, e) for e in range(config.stage1_epochs)]
    if config.regime == "adaptive":
        sched = _resized_schedule(base.schedule, config.stage2_epochs)
        cfg = replace(base, stage="adaptive", schedule=sched)
        return [("adaptive", cfg, e) for e in range(config.stage2_epochs)]
    pre = replace(base, stage="pretrain")
    sched = _resized_schedule(base.schedule, config.stage2_epochs)
    ada = replace(base, stage="adaptive", schedule=sched)
    plan = [("pretrain", pre, e) for e in range(config.stage1_epochs)]
    plan += [("adaptive", ada, e) for e in range(config.stage2_epochs)]
    return plan


def _resized_schedule(schedule: ScheduleConfig, total_epochs: int) -> ScheduleConfig:
    return replace(schedule, total_epochs=total_epochs)


def run_simulation(
    task: SyntheticTask,
    config: SimConfig,
    report_sink: Optional[Callable[[BatchAugReport], None]] = None,
) -> SimMetrics:
    """Train under the configured regime and collect per-epoch metrics.

    Per-sample losses always come from the un-augmented features of the
    current model state, computed just before each augmentation call.  In
    two_stage, the model carries over from the pretraining stage and the
    adaptive stage restarts its schedule at local epoch 0.  ``report_sink``
    receives every BatchAugReport as it is produced.
    """
    train_x, train_y, eval_x, eval_y = task.generate()
    n = len(train_x)
    dim = task.frames * task.bins
    model = _LinearModel(dim, task.num_classes)
    shuffle_rng = np.random.default_rng(config.seed)

    rows: List[EpochRow] = []
    for global_epoch, (stage_label, engine_cfg, local_epoch) in enumerate(_stage_plan(config)):
        perm = shuffle_rng.permutation(n)
        epoch_losses: List[float] = []
        lambdas: List[float] = []
        gate_draws = 0
        gate_adaptive = 0
        count_sums = np.zeros(3, dtype=np.float64)
        count_n = 0
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            idx = perm[start:start + config.batch_size]
            feats = [train_x[i] for i in idx]
            flat_clean = train_x[idx].reshape(len(idx), dim).astype(np.float64)
            losses = model.losses(flat_clean, train_y[idx])
            if not np.isfinite(losses).all():
                raise RuntimeError(
                    f"training diverged at epoch {global_epoch} "
                    "(non-finite sample loss); lower the learning rate"
                )
            epoch_losses.extend(float(v) for v in losses)
            augmented, report = augment_batch(
                feats, [float(v) for v in losses], local_epoch, engine_cfg,
                batch_index=batch_index,
            )
            if report_sink is not None:
                report_sink(report)
            for s in report.samples:
                if s.lam is not None:
                    lambdas.append(s.lam)
                gate_draws += 2
                gate_adaptive += (s.gate_mask == GATE_ADAPTIVE) + (s.gate_sub == GATE_ADAPTIVE)
                count_sums += s.counts.as_tuple()
                count_n += 1
            flat_aug = np.stack([a.reshape(dim) for a in augmented]).astype(np.float64)
            model.step(flat_aug, train_y[idx], config.learning_rate)

        mean_loss = float(np.mean(epoch_losses))
        if not math.isfinite(mean_loss):
            raise RuntimeError(
                f"training diverged at epoch {global_epoch} "
                f"(mean loss {mean_loss}); lower the learning rate"
            )
        rows.append(EpochRow(
            epoch=global_epoch,
            stage=stage_label,
            mean_train_loss=mean_loss,
            eval_accuracy=model.accuracy(
                eval_x.reshape(len(eval_x), dim).astype(np.float64), eval_y),
            mean_lambda=float(np.mean(lambdas)) if lambdas else None,
            adaptive_gate_rate=gate_adaptive / gate_draws,
            mean_n_t=float(count_sums[0] / count_n),
            mean_n_f=float(count_sums[1] / count_n),
            mean_n_s=float(count_sums[2] / count_n),
        ))
    return SimMetrics(rows)
