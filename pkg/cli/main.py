"""Command-line front end.

    python -m cli train --config blobs_ghl --epochs 1
    python -m cli eval --checkpoint runs/<run>/checkpoint.ghlckpt
    python -m cli gradcheck --arch tiny_mlp --seed 0
    python -m cli ablate --config blobs_ghl --rules ghl,sign_only,hebb_swta --seeds 0,1,2
    python -m cli sweep --config sweep_conv --depths 1,2 --multipliers 1,2
    python -m cli runs runs/<run> --run-id <id>

Exit codes: 0 success, 1 gradcheck failure, 2 any other error (one line on stderr).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

from pydantic import ValidationError

from config.loader import ConfigError, parse_override, resolve_train_config
from config.settings import settings
from models.schemas import ActivationKind, RuleKind, TrainConfig
from services.experiment_service import ExperimentService
from tensor_core import GHLError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _parse_list(raw: Optional[str], convert: Callable[[str], T], what: str) -> List[T]:
    if raw is None:
        return []
    items = [item.strip() for item in raw.split(",") if item.strip()]
    try:
        return [convert(item) for item in items]
    except GHLError:
        raise
    except ValueError:
        raise ConfigError(f"cannot parse {what} list {raw!r}") from None


def parse_rule(name: str) -> RuleKind:
    try:
        return RuleKind(name)
    except ValueError:
        raise ConfigError(f"unknown rule {name!r}; accepted: {[r.value for r in RuleKind]}") from None


def parse_activation(name: str) -> ActivationKind:
    try:
        return ActivationKind(name)
    except ValueError:
        raise ConfigError(f"unknown activation {name!r}; accepted: {[a.value for a in ActivationKind]}") from None


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config name under configs/ or a path to a YAML file")
    common.add_argument("--seed", type=int)
    common.add_argument("--rule", help=f"one of {[r.value for r in RuleKind]}")
    common.add_argument("--eta", type=float, help="learning rate")
    common.add_argument("--tau", type=float, help="softmax temperature of the competition")
    common.add_argument("--epochs", type=int)
    common.add_argument("--batch-size", type=int)
    common.add_argument("--out-dir", help="run directory (default: under GHL_OUT_DIR)")
    common.add_argument("--threads", type=int, help="worker processes; 1 = deterministic mode")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING, ...")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key, e.g. dataset.spread=0.2")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghl", description="Global-guided Hebbian learning experiments")
    verbs = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()

    verbs.add_parser("train", parents=[common], help="train one configuration")

    evaluate = verbs.add_parser("eval", parents=[common], help="evaluate a checkpoint")
    evaluate.add_argument("--checkpoint", required=True)
    evaluate.add_argument("--split", choices=["train", "test"], default="test")

    gradcheck = verbs.add_parser("gradcheck", parents=[common], help="backprop vs finite differences")
    gradcheck.add_argument("--arch", default="tiny_mlp")
    gradcheck.add_argument("--batch", type=int, default=2)
    gradcheck.add_argument("--corrupt-backward", action="store_true", help=argparse.SUPPRESS)

    ablate = verbs.add_parser("ablate", parents=[common], help="rule × seed comparison")
    ablate.add_argument("--rules", required=True, help="comma-separated rule names")
    ablate.add_argument("--seeds", required=True, help="comma-separated seeds")
    ablate.add_argument("--eta-grid", help="comma-separated learning rates tried per rule")

    sweep = verbs.add_parser("sweep", parents=[common], help="conv depth/width/activation sweep")
    sweep.add_argument("--depths", default="1,2")
    sweep.add_argument("--multipliers", default="1,2")
    sweep.add_argument("--activations", default="triangle,relu")
    sweep.add_argument("--rules", default="ghl,backprop_sgd")
    sweep.add_argument("--seeds", default="0")
    sweep.add_argument("--base-channels", type=int, default=8)
    sweep.add_argument("--p", type=float, default=2.0, help="Triangle exponent")

    runs = verbs.add_parser("runs", parents=[common], help="list the runs recorded in a run directory")
    runs.add_argument("run_dir", help="directory holding runs.db")
    runs.add_argument("--run-id", help="print the per-epoch metrics of one run")
    return parser


def resolve_config(args: argparse.Namespace) -> TrainConfig:
    """Defaults < config file < --set < typed flags."""
    overrides: Dict[str, Any] = dict(parse_override(item) for item in args.overrides)
    typed = {
        "seed": args.seed,
        "rule.kind": parse_rule(args.rule).value if args.rule else None,
        "eta": args.eta,
        "rule.tau": args.tau,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
    }
    overrides.update({key: value for key, value in typed.items() if value is not None})
    return resolve_train_config(args.config, overrides)


def cmd_train(args: argparse.Namespace, service: ExperimentService) -> int:
    outcome = service.train(resolve_config(args), args.out_dir)
    final = outcome.final
    print(f"{outcome.out_dir}: epoch {final.epoch} train_acc={final.train_acc:.4f} test_acc={final.test_acc}")
    return 0


def cmd_eval(args: argparse.Namespace, service: ExperimentService) -> int:
    result = service.evaluate(args.checkpoint, args.split, args.out_dir)
    print(f"{result['split']}: loss={result['loss']:.4f} accuracy={result['accuracy']:.4f} ({result['samples']} samples)")
    return 0


def cmd_gradcheck(args: argparse.Namespace, service: ExperimentService) -> int:
    report = service.gradcheck(args.arch, args.seed or 0, args.batch, args.corrupt_backward)
    for layer, error in report.errors.items():
        print(f"{layer}: max relative error {error:.3e}")
    print(f"{'PASS' if report.passed else 'FAIL'} (tolerance {report.tolerance:g})")
    return 0 if report.passed else 1


def cmd_ablate(args: argparse.Namespace, service: ExperimentService) -> int:
    base = resolve_config(args)
    rules = _parse_list(args.rules, parse_rule, "rule")
    seeds = _parse_list(args.seeds, int, "seed")
    etas = _parse_list(args.eta_grid, float, "eta")
    out_dir = args.out_dir or Path(settings.out_dir) / f"{base.name}-ablate"
    rows = service.ablate(base, rules, seeds, out_dir, etas or None)
    print(f"{out_dir}: {len(rows)} rows written to summary.csv and summary.md")
    return 0


def cmd_sweep(args: argparse.Namespace, service: ExperimentService) -> int:
    base = resolve_config(args)
    out_dir = args.out_dir or Path(settings.out_dir) / f"{base.name}-sweep"
    rows = service.sweep(
        base,
        out_dir,
        depths=_parse_list(args.depths, int, "depth"),
        multipliers=_parse_list(args.multipliers, int, "multiplier"),
        activations=_parse_list(args.activations, parse_activation, "activation"),
        rules=_parse_list(args.rules, parse_rule, "rule"),
        seeds=_parse_list(args.seeds, int, "seed"),
        base_channels=args.base_channels,
        p=args.p,
    )
    print(f"{out_dir}: {len(rows)} rows written to summary.csv")
    return 0


def cmd_runs(args: argparse.Namespace, service: ExperimentService) -> int:
    for run in service.runs(args.run_dir, args.run_id):
        metrics = run["metrics"]
        last = metrics[-1]["test_acc"] if metrics else None
        print(
            f"{run['run_id']} {run['command']} rule={run['rule']} seed={run['seed']} "
            f"status={run['status']} epochs={len(metrics)} test_acc={last}"
        )
        if args.run_id:
            for row in metrics:
                print(
                    f"  epoch {row['epoch']}: train_loss={row['train_loss']:.4f} "
                    f"train_acc={row['train_acc']:.4f} test_acc={row['test_acc']}"
                )
    return 0


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
    "runs": cmd_runs,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    service = ExperimentService(threads=args.threads or settings.threads)
    try:
        return COMMANDS[args.command](args, service)
    except (GHLError, ValidationError) as exc:
        lines = str(exc).strip().splitlines() or [type(exc).__name__]
        print(f"error: {lines[0]}", file=sys.stderr)
        logger.debug("command failed", exc_info=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
