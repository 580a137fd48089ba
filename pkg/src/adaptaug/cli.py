"""Command-line surface: augment / policy / schedule / ibf / simulate.

Exit codes: 0 success, 1 validation error (bad flags or values), 2 I/O
error (unreadable, missing, or malformed files).  Results go to stdout in
machine-parseable form (CSV or tab-separated lines); diagnostics go to
stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from typing import List, Optional

from .betainc import IbfParams, regularized_ibf
from .engine import EngineConfig, augment_batch
from .policy import hybrid_normalize, rank_policy
from .schedule import schedule_at
from .simulate import REGIMES, SimConfig, SyntheticTask, run_simulation
from .storage import (
    FormatError,
    engine_config_to_mapping,
    load_engine_config,
    read_features,
    read_manifest,
    report_to_mappings,
    write_features,
    write_report,
)

_MAX_SEED = 2 ** 64 - 1


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed_value(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid unsigned integer: {text!r}")
    if not (0 <= value <= _MAX_SEED):
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2**64), got {text}")
    return value


def _loss_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid loss list: {text!r}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="adaptaug",
                     description="Loss-adaptive spectrogram augmentation toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed_value, default=None,
                        help="master seed (unsigned 64-bit, default 0); "
                             "overrides the config file")
    common.add_argument("--config", default=None, metavar="PATH",
                        help="engine config file (JSON)")
    common.add_argument("--print-config", action="store_true",
                        help="print the effective engine config as JSON and exit")

    p = sub.add_parser("augment", parents=[common],
                       help="augment every sample in a manifest")
    p.add_argument("--manifest", required=True, metavar="PATH",
                   help="JSON-lines manifest of sample_id / feature_path / loss")
    p.add_argument("--epoch", required=True, type=int)
    p.add_argument("--out", required=True, metavar="DIR",
                   help="output directory for augmented features and report")
    p.add_argument("--batch-index", type=int, default=0)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("policy", parents=[common],
                       help="print the loss -> lambda pipeline as CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--losses", type=_loss_list, metavar="L1,L2,...",
                     help="inline comma-separated loss batch")
    src.add_argument("--manifest", metavar="PATH",
                     help="take the loss column from a manifest")
    p.add_argument("--policy", choices=("hybrid", "rank"), default="hybrid")
    p.set_defaults(func=_cmd_policy)

    p = sub.add_parser("schedule", parents=[common],
                       help="print the progressive schedule as CSV")
    p.add_argument("--total", type=int, default=None,
                   help="total epochs (default: config value)")
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("ibf", parents=[common],
                       help="evaluate the regularized incomplete beta function")
    p.add_argument("--x", required=True, type=float)
    p.add_argument("--s", type=float, default=2.0, help="strength parameter (default 2)")
    p.add_argument("--a", type=float, default=0.5, help="asymmetry parameter (default 0.5)")
    p.set_defaults(func=_cmd_ibf)

    p = sub.add_parser("simulate", parents=[common],
                       help="run the synthetic closed-loop training harness")
    p.add_argument("--regime", choices=REGIMES, default="two_stage")
    p.add_argument("--stage1", type=int, default=5, help="pretraining epochs")
    p.add_argument("--stage2", type=int, default=25, help="adaptive epochs")
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--task-seed", type=int, default=0,
                   help="synthetic dataset generation seed")
    p.add_argument("--out", metavar="PATH", default=None,
                   help="write metrics CSV here instead of stdout")
    p.add_argument("--report-out", metavar="PATH", default=None,
                   help="dump every batch report as JSON lines")
    p.set_defaults(func=_cmd_simulate)

    return parser


def _effective_config(args) -> EngineConfig:
    config = load_engine_config(args.config) if args.config else EngineConfig()
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    return config


def _maybe_print_config(args, config: EngineConfig) -> bool:
    if args.print_config:
        print(json.dumps(engine_config_to_mapping(config), indent=2, sort_keys=True))
        return True
    return False


def _cmd_augment(args) -> int:
    config = _effective_config(args)
    if _maybe_print_config(args, config):
        return 0
    entries = read_manifest(args.manifest)
    base = os.path.dirname(os.path.abspath(args.manifest))
    features, losses, ids = [], [], []
    for entry in entries:
        path = entry.feature_path
        if not os.path.isabs(path):
            path = os.path.join(base, path)
        try:
            features.append(read_features(path))
        except OSError as exc:
            raise OSError(f"sample {entry.sample_id!r}: cannot read features: {exc}") from exc
        losses.append(entry.loss)
        ids.append(entry.sample_id)
    augmented, report = augment_batch(
        features, losses, args.epoch, config,
        batch_index=args.batch_index, sample_ids=ids)
    os.makedirs(args.out, exist_ok=True)
    for sample_id, array in zip(ids, augmented):
        out_path = os.path.join(args.out, f"{sample_id}.spgm")
        write_features(array, out_path)
        print(f"{sample_id}\t{out_path}")
    write_report(report, os.path.join(args.out, "report.jsonl"))
    return 0


def _cmd_policy(args) -> int:
    config = _effective_config(args)
    if _maybe_print_config(args, config):
        return 0
    if args.manifest is not None:
        losses = [entry.loss for entry in read_manifest(args.manifest)]
    else:
        losses = args.losses
    if args.policy == "rank":
        lam = rank_policy(losses, config.ibf)
        print("index,l_raw,lambda")
        for i, (raw, value) in enumerate(zip(losses, lam)):
            print(f"{i},{raw!r},{value!r}")
        return 0
    trace = hybrid_normalize(losses, config.ibf, clip_with_std=config.clip_with_std)
    print("index,l_raw,l_clipped,l_meannorm,l_minmax,lambda")
    for i in range(len(trace.l_raw)):
        print(f"{i},{trace.l_raw[i]!r},{trace.l_clipped[i]!r},"
              f"{trace.l_meannorm[i]!r},{trace.l_minmax[i]!r},{trace.lam[i]!r}")
    return 0


def _cmd_schedule(args) -> int:
    config = _effective_config(args)
    if _maybe_print_config(args, config):
        return 0
    sched = config.schedule
    if args.total is not None:
        sched = replace(sched, total_epochs=args.total)
    print("epoch,epoch_policy,p_mask,p_sub")
    for epoch in range(sched.total_epochs + 1):
        state = schedule_at(epoch, sched)
        print(f"{epoch},{state.epoch_policy!r},{state.p_mask!r},{state.p_sub!r}")
    return 0


def _cmd_ibf(args) -> int:
    config = _effective_config(args)
    if _maybe_print_config(args, config):
        return 0
    params = IbfParams(s=args.s, a=args.a)
    print(f"{regularized_ibf(args.x, params):.12g}")
    return 0


def _cmd_simulate(args) -> int:
    config = _effective_config(args)
    if _maybe_print_config(args, config):
        return 0
    sim = SimConfig(
        regime=args.regime,
        stage1_epochs=args.stage1,
        stage2_epochs=args.stage2,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        engine=config,
        seed=config.master_seed,
    )
    task = SyntheticTask(seed=args.task_seed)
    sink = None
    report_file = None
    if args.report_out is not None:
        report_file = open(args.report_out, "w", encoding="utf-8")

        def sink(report):
            for record in report_to_mappings(report):
                report_file.write(json.dumps(record, sort_keys=True) + "\n")

    try:
        metrics = run_simulation(task, sim, report_sink=sink)
    finally:
        if report_file is not None:
            report_file.close()
    text = metrics.to_csv()
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (FormatError, OSError) as exc:
        print(f"adaptaug: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"adaptaug: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
