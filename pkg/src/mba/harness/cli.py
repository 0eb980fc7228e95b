"""Command-line interface: demo-gen, train, eval, rollout-trace, report.

All outputs are written atomically (temp file + rename), and contract
violations exit nonzero with a one-line message instead of a traceback.
"""

from __future__ import annotations

import argparse
import csv
import io
import re
import sys
from pathlib import Path

import numpy as np

from ..geometry import DegenerateRotation, WrongLength
from ..numcore import CheckpointError
from ..numcore.checkpoint import _atomic_write_bytes
from ..policy import (
    TrainSettings,
    VariantMismatch,
    load_policy,
    save_policy,
    train,
)
from ..sim_env import (
    TASKS,
    DatasetError,
    ExpertExhausted,
    TaskSpec,
    collect_demos,
    load_demos,
    save_demos,
)
from .config import ConfigError, RunConfig, load_config
from .evaluate import TooFewCheckpoints, eval_rows_to_csv, evaluate
from .report import write_report
from .rollout import rollout

LOSS_CSV_HEADER = ("step", "motion_loss", "action_loss", "total_loss")
TRACE_CSV_HEADER = (
    ("cycle", "step", "horizon_index")
    + tuple(f"pred_{c}" for c in ("t0", "t1", "t2", "r0", "r1", "r2", "r3", "r4", "r5"))
    + tuple(f"real_{c}" for c in ("t0", "t1", "t2", "r0", "r1", "r2", "r3", "r4", "r5"))
)

_CHECKPOINT_RE = re.compile(r"checkpoint_(\d+)\.mba1$")
_SEED_DIR_RE = re.compile(r"seed(\d+)$")


class CliError(ValueError):
    """User-facing command error."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mba", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo-gen", help="collect scripted-expert demonstrations")
    p.add_argument("--task", choices=TASKS, required=True)
    p.add_argument("--n", type=int, required=True, help="number of successful episodes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset file (.mbad)")
    p.set_defaults(func=cmd_demo_gen)

    p = sub.add_parser("train", help="train one policy per configured seed")
    p.add_argument("--config", required=True)
    p.add_argument("--variant", choices=("baseline", "mba"), default=None, help="override config variant")
    p.add_argument("--demos", default=None, help="override config demos_path")
    p.add_argument("--out", required=True, help="output directory for checkpoints")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint series")
    p.add_argument("--checkpoint-dir", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rollout-trace", help="dump predicted motion vs realized poses for one episode")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True, help="environment seed for the episode")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_rollout_trace)

    p = sub.add_parser("report", help="merge eval CSVs into tables and a learning-curve figure")
    p.add_argument(
        "--csv",
        action="append",
        required=True,
        metavar="NAME=PATH",
        help="labelled eval CSV, e.g. --csv mba=eval_mba.csv (repeatable)",
    )
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def cmd_demo_gen(args) -> None:
    spec = TaskSpec(task=args.task)
    demos = collect_demos(spec, args.n, args.seed)
    save_demos(args.out, spec, demos)
    lengths = [len(d) for d in demos]
    print(f"wrote {len(demos)} episodes to {args.out} (frames min/mean/max: "
          f"{min(lengths)}/{sum(lengths) / len(lengths):.1f}/{max(lengths)})")


def _task_spec_for(cfg: RunConfig, dataset_spec: TaskSpec) -> TaskSpec:
    if dataset_spec.task != cfg.task:
        raise CliError(f"config task {cfg.task!r} does not match dataset task {dataset_spec.task!r}")
    return dataset_spec


def _losses_csv(history: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LOSS_CSV_HEADER)
    for row in history:
        motion = "" if row["motion_loss"] is None else repr(row["motion_loss"])
        writer.writerow([row["step"], motion, repr(row["action_loss"]), repr(row["total_loss"])])
    return buf.getvalue()


def cmd_train(args) -> None:
    cfg = load_config(args.config, overrides={"variant": args.variant, "demos_path": args.demos})
    dataset_spec, demos = load_demos(cfg.demos_path)
    _task_spec_for(cfg, dataset_spec)
    settings = TrainSettings(
        variant=cfg.variant,
        t_m=cfg.t_m,
        t_a=cfg.t_a,
        diffusion_steps=cfg.diffusion_k,
        training_steps=cfg.training_steps,
        batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate,
        checkpoint_every=cfg.eval_every,
    )
    out = Path(args.out)
    for seed in cfg.seeds:
        result = train(demos, settings, np.random.default_rng(seed))
        seed_dir = out / f"seed{seed}"
        for step, params in result.snapshots:
            save_policy(seed_dir / f"checkpoint_{step:06d}.mba1", params)
        _atomic_write_bytes(seed_dir / "losses.csv", _losses_csv(result.history).encode())
        final = result.history[-1]
        print(f"seed {seed}: {len(result.snapshots)} checkpoints in {seed_dir}, "
              f"final total loss {final['total_loss']:.4f}")


def discover_checkpoints(root: str | Path) -> dict[int, list[tuple[int, Path]]]:
    root = Path(root)
    found: dict[int, list[tuple[int, Path]]] = {}
    for seed_dir in sorted(root.iterdir() if root.is_dir() else []):
        m = _SEED_DIR_RE.search(seed_dir.name)
        if not m or not seed_dir.is_dir():
            continue
        series = []
        for ckpt in sorted(seed_dir.iterdir()):
            cm = _CHECKPOINT_RE.search(ckpt.name)
            if cm:
                series.append((int(cm.group(1)), ckpt))
        if series:
            found[int(m.group(1))] = series
    if not found:
        raise CliError(f"no checkpoints found under {root} (expected seed*/checkpoint_*.mba1)")
    return found


def cmd_eval(args) -> None:
    cfg = load_config(args.config)
    dataset_spec, _ = load_demos(cfg.demos_path)
    spec = _task_spec_for(cfg, dataset_spec)
    series = {
        seed: [(step, load_policy(path)) for step, path in paths]
        for seed, paths in discover_checkpoints(args.checkpoint_dir).items()
    }
    for seed, ckpts in series.items():
        for _, params in ckpts:
            if params.variant != cfg.variant:
                raise VariantMismatch(
                    f"seed {seed}: checkpoint variant {params.variant!r} != config variant {cfg.variant!r}"
                )
    report = evaluate(series, spec, cfg.eval_episodes, cfg.t_a_prime)
    _atomic_write_bytes(Path(args.out), eval_rows_to_csv(report.rows()).encode())
    for stats in report.seed_stats:
        print(f"seed {stats.seed}: top-5 mean {stats.top5_mean:.3f} (std {stats.top5_std:.3f})")
    print(f"{report.variant}: cross-seed {report.mean:.3f} +/- {report.std:.3f} "
          f"({report.eval_episodes} episodes/checkpoint, {report.wall_clock_seconds:.1f}s)")


def cmd_rollout_trace(args) -> None:
    cfg = load_config(args.config)
    dataset_spec, _ = load_demos(cfg.demos_path)
    spec = _task_spec_for(cfg, dataset_spec)
    params = load_policy(args.checkpoint)
    rng = np.random.default_rng([args.seed, 0x7ACE])
    record = rollout(params, spec, args.seed, cfg.t_a_prime, rng, expected_variant=cfg.variant)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_CSV_HEADER)
    for cycle, predicted in enumerate(record.predicted_motions):
        flat = predicted.chunk.flatten().reshape(len(predicted.chunk), -1)
        for h in range(flat.shape[0]):
            absolute = predicted.start_step + h
            realized = [""] * 9
            if record.object_trace is not None and absolute < record.object_trace.shape[0]:
                realized = [repr(x) for x in record.object_trace[absolute]]
            writer.writerow([cycle, absolute, h, *[repr(x) for x in flat[h]], *realized])
    _atomic_write_bytes(Path(args.out), buf.getvalue().encode())
    print(f"episode seed {args.seed}: success={record.success} steps={record.steps}, "
          f"{len(record.predicted_motions)} motion chunks -> {args.out}")


def cmd_report(args) -> None:
    named: dict[str, str] = {}
    for item in args.csv:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise CliError(f"--csv expects NAME=PATH, got {item!r}")
        if name in named:
            raise CliError(f"duplicate report label {name!r}")
        named[name] = path
    paths = write_report(named, args.out_dir)
    for label, path in paths.items():
        print(f"{label}: {path}")


_USER_ERRORS = (
    CliError,
    ConfigError,
    DatasetError,
    CheckpointError,
    ExpertExhausted,
    TooFewCheckpoints,
    VariantMismatch,
    DegenerateRotation,
    WrongLength,
    ValueError,
    OSError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
