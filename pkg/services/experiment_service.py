"""Workflows behind the CLI verbs. Every file a workflow writes lands in its run directory."""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from autodiff import build_network, gradient_check, loss_and_gradients
from config.loader import ConfigError, config_hash
from config.settings import settings
from datasets import dataset_signature, load_dataset
from layers import conv_stack, get_architecture
from models.schemas import (
    AblationRow,
    ActivationKind,
    GradcheckReport,
    MetricsRecord,
    NetworkSpec,
    RuleKind,
    RunManifest,
    SweepRow,
    TrainConfig,
)
from services.report_formatter import report_formatter
from services.run_registry import RunRegistry, utc_now
from tensor_core import DataError, NumericError, ParameterError
from trainer import Trainer, evaluate, init_weights, load_checkpoint

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class RunOutcome:
    out_dir: Path
    manifest: RunManifest
    metrics: List[MetricsRecord]
    checkpoint_path: Path

    @property
    def final(self) -> MetricsRecord:
        return self.metrics[-1]


def write_manifest(out_dir: Path, manifest: RunManifest) -> Path:
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def default_run_dir(config: TrainConfig) -> Path:
    return Path(settings.out_dir) / f"{config.name}-{config.rule.kind.value}-s{config.seed}-{config_hash(config)[:8]}"


def config_variant(base: TrainConfig, **changes: Any) -> TrainConfig:
    """Copy of `base` with a different rule kind, eta, seed or arch, revalidated."""
    data = base.model_dump(mode="json")
    if "rule" in changes:
        data["rule"]["kind"] = RuleKind(changes.pop("rule")).value
    if isinstance(changes.get("arch"), NetworkSpec):
        changes["arch"] = changes["arch"].model_dump(mode="json")
    data.update(changes)
    data["checkpoint_path"] = None
    return TrainConfig.model_validate(data)


def _train_job(payload: Dict[str, Any]) -> Dict[str, Any]:
    """Worker entry point; one configuration in its own directory."""
    config = TrainConfig.model_validate(payload["config"])
    service = ExperimentService(payload["data_dir"], threads=1)
    try:
        outcome = service.train(config, payload["out_dir"], payload["command"])
    except NumericError as exc:
        # a diverged grid cell scores zero instead of aborting the batch
        logger.warning(f"{config.name} (rule={config.rule.kind.value} eta={config.eta:g} seed={config.seed}) diverged: {exc}")
        return {"train_acc": 0.0, "test_acc": 0.0}
    return {"train_acc": outcome.final.train_acc, "test_acc": outcome.final.test_acc}


class ExperimentService:
    """Runs train/eval/gradcheck/ablate/sweep and writes their run directories"""

    def __init__(self, data_dir: Optional[PathLike] = None, threads: Optional[int] = None):
        self.data_dir = data_dir or settings.data_dir
        self.threads = threads or settings.threads

    @property
    def deterministic(self) -> bool:
        return self.threads == 1

    def train(self, config: TrainConfig, out_dir: Optional[PathLike] = None, command: str = "train") -> RunOutcome:
        """Train one configuration: manifest first, then metrics.csv and the checkpoint."""
        out = Path(out_dir) if out_dir else default_run_dir(config)
        out.mkdir(parents=True, exist_ok=True)
        digest = config_hash(config)
        manifest = RunManifest(
            command=command,
            config=config,
            config_hash=digest,
            out_dir=str(out),
            created_at=utc_now(),
            threads=self.threads,
        )
        write_manifest(out, manifest)

        registry = RunRegistry(out / settings.registry_filename)
        run_id = registry.create_run(command, config.rule.kind.value, config.seed, digest, str(out))
        checkpoint_name = Path(config.checkpoint_path).name if config.checkpoint_path else settings.checkpoint_filename
        checkpoint_path = out / checkpoint_name
        try:
            train_set, test_set = load_dataset(config.dataset, self.data_dir)
            trainer = Trainer(config, train_set, test_set, checkpoint_path=checkpoint_path)
            result = trainer.train(on_record=lambda record: registry.add_metrics(run_id, record))
        except Exception:
            registry.finish_run(run_id, "failed")
            raise

        report_formatter.write_metrics_csv(
            out / "metrics.csv", result.metrics, result.network.weighted_ids, include_wall_time=not self.deterministic
        )
        registry.finish_run(run_id)
        manifest = manifest.model_copy(update={"finished_at": utc_now()})
        write_manifest(out, manifest)
        logger.info(f"Run {config.name} finished in {out}")
        return RunOutcome(out_dir=out, manifest=manifest, metrics=result.metrics, checkpoint_path=checkpoint_path)

    def evaluate(self, checkpoint_path: PathLike, split: str = "test", out_dir: Optional[PathLike] = None) -> Dict[str, Any]:
        checkpoint_path = Path(checkpoint_path)
        checkpoint = load_checkpoint(checkpoint_path)
        config = checkpoint.config
        net = build_network(get_architecture(config.arch), checkpoint.weights)
        train_set, test_set = load_dataset(config.dataset, self.data_dir)
        dataset = train_set if split == "train" else test_set
        if dataset is None:
            raise DataError(f"config {config.name!r} has no {split} split")
        loss, accuracy = evaluate(net, dataset, config.eval_batch_size)
        result = {
            "checkpoint": str(checkpoint_path),
            "epoch": checkpoint.epoch,
            "split": split,
            "samples": len(dataset),
            "loss": loss,
            "accuracy": accuracy,
        }
        out = Path(out_dir) if out_dir else checkpoint_path.parent
        out.mkdir(parents=True, exist_ok=True)
        (out / f"eval_{split}.json").write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")
        return result

    def gradcheck(self, arch: str, seed: int = 0, batch_size: int = 2, corrupt_backward: bool = False) -> GradcheckReport:
        """Backprop vs finite differences on a seeded network and random batch.

        `corrupt_backward` perturbs the first layer's analytic gradient; the check must then fail.
        """
        spec = get_architecture(arch)
        net = build_network(spec, init_weights(spec, seed))
        if net.weight_count > settings.gradcheck_max_weights:
            raise ParameterError(
                f"refusing gradcheck of {spec.name!r}: {net.weight_count} weights exceed the limit of "
                f"{settings.gradcheck_max_weights}"
            )
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 2])))
        x = rng.standard_normal((batch_size,) + net.input_shape)
        y = rng.integers(0, net.num_classes, size=batch_size)
        _, analytic = loss_and_gradients(net, x, y)
        if corrupt_backward:
            first = net.weighted_ids[0]
            analytic[first] = analytic[first] * 1.5 + 1e-3
        errors = gradient_check(net, x, y, settings.gradcheck_eps, analytic=analytic)
        return GradcheckReport(
            arch=spec.name,
            seed=seed,
            tolerance=settings.gradcheck_tolerance,
            errors={f"layer{lid}_{net.layers[lid].kind.value}": err for lid, err in errors.items()},
        )

    def runs(self, out_dir: PathLike, run_id: Optional[str] = None) -> List[Dict[str, Any]]:
        """Registry rows of a run directory, each with its metric rows; one row when `run_id` is given."""
        path = Path(out_dir) / settings.registry_filename
        if not path.is_file():
            raise ConfigError(f"no run registry at {str(path)!r}")
        registry = RunRegistry(path)
        if run_id is None:
            runs = registry.list_runs()
        else:
            run = registry.get_run(run_id)
            if run is None:
                known = [r["run_id"] for r in registry.list_runs()]
                raise ConfigError(f"unknown run {run_id!r}; known: {known}")
            runs = [run]
        return [dict(run, metrics=registry.get_metrics(run["run_id"])) for run in runs]

    def _run_jobs(self, payloads: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        if self.threads <= 1 or len(payloads) <= 1:
            return [_train_job(p) for p in payloads]
        logger.info(f"Running {len(payloads)} configurations on {self.threads} worker processes")
        with ProcessPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(_train_job, payloads))

    def _payload(self, config: TrainConfig, out_dir: Path, command: str) -> Dict[str, Any]:
        return {
            "config": config.model_dump(mode="json"),
            "out_dir": str(out_dir),
            "command": command,
            "data_dir": str(self.data_dir),
        }

    def _start_batch(self, command: str, base: TrainConfig, out_dir: PathLike, metadata: Dict[str, Any]):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_manifest(
            out,
            RunManifest(
                command=command,
                config=base,
                config_hash=config_hash(base),
                out_dir=str(out),
                created_at=utc_now(),
                threads=self.threads,
            ),
        )
        registry = RunRegistry(out / settings.registry_filename)
        run_id = registry.create_run(command, base.rule.kind.value, base.seed, config_hash(base), str(out), metadata)
        return out, registry, run_id

    def ablate(
        self,
        base: TrainConfig,
        rules: Sequence[RuleKind],
        seeds: Sequence[int],
        out_dir: PathLike,
        eta_grid: Optional[Sequence[float]] = None,
    ) -> List[AblationRow]:
        """rule × seed cross-product; each rule runs at the grid η with the best mean train accuracy."""
        rules = [RuleKind(r) for r in rules]
        if len(rules) < 2:
            raise ParameterError(f"ablate needs at least two rules, got {[r.value for r in rules]}")
        if not seeds:
            raise ParameterError("ablate needs at least one seed")
        etas = list(eta_grid) if eta_grid else [base.eta]
        out, registry, run_id = self._start_batch(
            "ablate", base, out_dir, {"rules": [r.value for r in rules], "seeds": list(seeds), "eta_grid": etas}
        )

        cells = [(rule, eta, seed) for rule in rules for eta in etas for seed in seeds]
        payloads = [
            self._payload(
                config_variant(base, rule=rule, eta=eta, seed=seed, name=f"{base.name}-{rule.value}"),
                out / rule.value / f"eta{eta:g}-s{seed}",
                "ablate",
            )
            for rule, eta, seed in cells
        ]
        results = dict(zip(cells, self._run_jobs(payloads)))

        rows: List[AblationRow] = []
        for rule in rules:
            by_eta = {eta: [results[(rule, eta, seed)]["train_acc"] for seed in seeds] for eta in etas}
            best = max(etas, key=lambda eta: float(np.mean(by_eta[eta])))
            logger.info(f"ablate: {rule.value} uses eta={best:g}")
            for seed in seeds:
                cell = results[(rule, best, seed)]
                rows.append(AblationRow(rule=rule, seed=seed, eta=best, train_acc=cell["train_acc"], test_acc=cell["test_acc"]))

        (out / "summary.csv").write_text(report_formatter.format(rows, "csv"), encoding="utf-8")
        (out / "summary.md").write_text(
            report_formatter.ablation_summary(rows) + "\n" + report_formatter.format(rows, "markdown"), encoding="utf-8"
        )
        registry.finish_run(run_id)
        return rows

    def sweep(
        self,
        base: TrainConfig,
        out_dir: PathLike,
        depths: Sequence[int],
        multipliers: Sequence[int],
        activations: Sequence[ActivationKind],
        rules: Sequence[RuleKind],
        seeds: Sequence[int],
        base_channels: int = 8,
        p: float = 2.0,
    ) -> List[SweepRow]:
        """Depth × width multiplier × activation × rule over conv_stack networks."""
        if not (depths and multipliers and activations and rules and seeds):
            raise ParameterError("sweep needs at least one depth, multiplier, activation, rule and seed")
        input_shape, num_classes = dataset_signature(base.dataset)
        if len(input_shape) != 3:
            raise ParameterError(f"sweep needs C×H×W samples, dataset gives {input_shape}; set dataset.image_shape")
        out, registry, run_id = self._start_batch("sweep", base, out_dir, {"depths": list(depths), "multipliers": list(multipliers)})

        cells = [
            (depth, multiplier, ActivationKind(activation), RuleKind(rule), seed)
            for depth in depths
            for multiplier in multipliers
            for activation in activations
            for rule in rules
            for seed in seeds
        ]
        payloads = []
        for depth, multiplier, activation, rule, seed in cells:
            spec = conv_stack(
                depth,
                base_channels,
                multiplier,
                activation,
                p,
                input_shape=input_shape,
                num_classes=num_classes,
                classifier_plastic=True,
            )
            config = config_variant(base, rule=rule, seed=seed, arch=spec, name=spec.name)
            payloads.append(self._payload(config, out / spec.name / f"{rule.value}-s{seed}", "sweep"))

        rows = [
            SweepRow(
                depth=depth,
                multiplier=multiplier,
                activation=activation,
                rule=rule,
                seed=seed,
                train_acc=result["train_acc"],
                test_acc=result["test_acc"],
            )
            for (depth, multiplier, activation, rule, seed), result in zip(cells, self._run_jobs(payloads))
        ]
        (out / "summary.csv").write_text(report_formatter.format(rows, "csv"), encoding="utf-8")
        registry.finish_run(run_id)
        return rows


experiment_service = ExperimentService()
