"""Training loop: forward with trace capture, loss, backward, rule dispatch, W += η·ΔW."""

import hashlib
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from autodiff.engine import GradientSet, Network, backward_pass, build_network, forward_pass, softmax_cross_entropy
from datasets import LabeledDataset, augment_batch, load_dataset
from layers import get_architecture
from models.schemas import LayerStats, MetricsRecord, TrainConfig, UpdateRule
from plasticity import layer_update
from tensor_core import DataError, DimensionError, NumericError, Tensor, ensure_finite
from trainer.checkpoint import Checkpoint, save_checkpoint
from trainer.initialization import data_order_rng, init_weights
from trainer.schedules import learning_rate

logger = logging.getLogger(__name__)

RecordCallback = Callable[[MetricsRecord], None]


@dataclass(frozen=True)
class StepResult:
    """Everything one step computed. `network` holds the weights after application
    (before it, for a result straight out of compute_step)."""

    network: Network
    loss: float
    accuracy: float
    gradients: GradientSet
    hebbian: Dict[int, Tensor]
    updates: Dict[int, Tensor]
    step_scales: Dict[int, float]
    digest: str
    applied: Dict[int, float] = field(default_factory=dict)


def _digest(logits: Tensor, gradients: GradientSet) -> str:
    h = hashlib.sha256(np.ascontiguousarray(logits).tobytes())
    for lid in sorted(gradients):
        h.update(np.ascontiguousarray(gradients[lid]).tobytes())
    return h.hexdigest()


def compute_step(
    net: Network, batch_x: Tensor, batch_y: Sequence[int], rule: UpdateRule, loss_scale: float = 1.0
) -> StepResult:
    """One step up to, not including, weight application."""
    if len(batch_x) == 0:
        raise DataError("empty batch")
    fwd = forward_pass(net, batch_x, rule.tau, capture_traces=rule.kind.uses_traces)
    loss, logit_grad = softmax_cross_entropy(fwd.logits, batch_y, loss_scale)
    if not np.isfinite(loss.loss):
        raise NumericError(f"non-finite loss {loss.loss}")
    gradients = backward_pass(net, fwd.caches, logit_grad)
    traces = {t.layer_id: t for t in fwd.traces}

    hebbian: Dict[int, Tensor] = {}
    updates: Dict[int, Tensor] = {}
    scales: Dict[int, float] = {}
    for lid in net.weighted_ids:
        layer = net.layers[lid]
        ensure_finite(gradients[lid], f"gradient of layer {lid} ({layer.describe()})")
        result = layer_update(rule, layer, net.weights[lid], gradients[lid], traces.get(lid))
        updates[lid] = result.update.delta
        scales[lid] = result.step_scale
        if result.hebbian is not None:
            hebbian[lid] = result.hebbian

    accuracy = float(np.mean(fwd.logits.argmax(axis=1) == loss.labels))
    return StepResult(
        network=net,
        loss=loss.loss,
        accuracy=accuracy,
        gradients=gradients,
        hebbian=hebbian,
        updates=updates,
        step_scales=scales,
        digest=_digest(fwd.logits, gradients),
    )


def apply_updates(step: StepResult, eta: float) -> StepResult:
    """W += η·scale·ΔW for every weighted layer; η enters here and nowhere else."""
    net = step.network
    weights = dict(net.weights)
    applied: Dict[int, float] = {}
    for lid, delta in step.updates.items():
        change = (eta * step.step_scales[lid]) * delta
        updated = net.weights[lid] + change
        if not np.all(np.isfinite(updated)):
            raise NumericError(f"non-finite weights in layer {lid} ({net.layers[lid].describe()}) after update")
        weights[lid] = updated
        applied[lid] = float(np.mean(np.abs(change)))
    return replace(step, network=net.with_weights(weights), applied=applied)


def train_step(
    net: Network,
    batch_x: Tensor,
    batch_y: Sequence[int],
    rule: UpdateRule,
    eta: float,
    tau: Optional[float] = None,
    loss_scale: float = 1.0,
) -> StepResult:
    if tau is not None:
        rule = rule.model_copy(update={"tau": tau})
    return apply_updates(compute_step(net, batch_x, batch_y, rule, loss_scale), eta)


def evaluate(net: Network, dataset: Union[LabeledDataset, Tuple[Tensor, Sequence[int]]], batch_size: int = 256) -> Tuple[float, float]:
    """(mean loss, top-1 accuracy); argmax ties go to the lowest class index."""
    if isinstance(dataset, LabeledDataset):
        images, labels = dataset.images, dataset.labels
    else:
        images, labels = dataset
    labels = np.asarray(labels)
    if len(images) == 0:
        raise DataError("cannot evaluate on an empty dataset")
    total_loss = 0.0
    correct = 0
    for start in range(0, len(images), batch_size):
        x, y = images[start : start + batch_size], labels[start : start + batch_size]
        logits = forward_pass(net, x, capture_traces=False).logits
        total_loss += softmax_cross_entropy(logits, y)[0].loss * len(y)
        correct += int(np.sum(logits.argmax(axis=1) == y))
    return total_loss / len(images), correct / len(images)


def layer_stats(net: Network, update_means: Dict[int, float]) -> Dict[int, LayerStats]:
    stats: Dict[int, LayerStats] = {}
    for lid in net.weighted_ids:
        norms = net.layers[lid].unit_norms(net.weights[lid])
        stats[lid] = LayerStats(
            wnorm_min=float(norms.min()),
            wnorm_mean=float(norms.mean()),
            wnorm_max=float(norms.max()),
            update_mean=update_means.get(lid, 0.0),
        )
    return stats


@dataclass
class TrainResult:
    network: Network
    metrics: List[MetricsRecord]
    steps: int


class Trainer:
    """Runs the epoch loop of one TrainConfig.

    Shuffling and augmentation draw from a data-order generator seeded from
    `config.seed`; its state travels with checkpoints so a resumed run follows
    the uninterrupted trajectory.
    """

    def __init__(
        self,
        config: TrainConfig,
        train_set: LabeledDataset,
        test_set: Optional[LabeledDataset] = None,
        network: Optional[Network] = None,
        checkpoint_path: Union[str, Path, None] = None,
    ):
        self.config = config
        self.train_set = train_set
        self.test_set = test_set
        if network is None:
            spec = get_architecture(config.arch)
            network = build_network(spec, init_weights(spec, config.seed))
        if train_set.sample_shape != network.input_shape:
            raise DimensionError(
                f"dataset samples {list(train_set.sample_shape)} do not fit network input {list(network.input_shape)}"
            )
        if train_set.num_classes > network.num_classes:
            raise DimensionError(f"{train_set.num_classes} classes but the network emits {network.num_classes} logits")
        self.network = network
        self.rng = data_order_rng(config.seed)
        self.epoch = 0
        self.steps = 0
        self.checkpoint_path = checkpoint_path or config.checkpoint_path
        self.metrics: List[MetricsRecord] = []

    @classmethod
    def from_checkpoint(
        cls,
        checkpoint: Checkpoint,
        train_set: LabeledDataset,
        test_set: Optional[LabeledDataset] = None,
        checkpoint_path: Union[str, Path, None] = None,
    ) -> "Trainer":
        spec = get_architecture(checkpoint.config.arch)
        trainer = cls(checkpoint.config, train_set, test_set, build_network(spec, checkpoint.weights), checkpoint_path)
        trainer.rng.bit_generator.state = checkpoint.rng_state
        trainer.epoch = checkpoint.epoch
        return trainer

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(
            weights={lid: w.copy() for lid, w in self.network.weights.items()},
            config=self.config,
            rng_state=self.rng.bit_generator.state,
            epoch=self.epoch,
        )

    def run_epoch(self, with_test: bool = True) -> MetricsRecord:
        cfg = self.config
        eta = learning_rate(cfg.lr_schedule, cfg.eta, self.epoch, cfg.epochs)
        started = time.perf_counter()
        order = self.rng.permutation(len(self.train_set))
        loss_sum = 0.0
        correct = 0.0
        update_sums: Dict[int, float] = {}
        steps = 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            x = self.train_set.images[idx]
            if x.ndim == 4:
                x = augment_batch(x, self.rng, cfg.dataset.augment_flip, cfg.dataset.augment_crop)
            step = train_step(self.network, x, self.train_set.labels[idx], cfg.rule, eta, loss_scale=cfg.loss_scale)
            self.network = step.network
            loss_sum += step.loss * len(idx)
            correct += step.accuracy * len(idx)
            for lid, magnitude in step.applied.items():
                update_sums[lid] = update_sums.get(lid, 0.0) + magnitude
            steps += 1
        self.steps += steps
        self.epoch += 1

        test_acc = None
        if with_test and self.test_set is not None:
            _, test_acc = evaluate(self.network, self.test_set, cfg.eval_batch_size)
        return MetricsRecord(
            epoch=self.epoch,
            train_loss=loss_sum / len(order),
            train_acc=correct / len(order),
            test_acc=test_acc,
            wall_seconds=time.perf_counter() - started,
            eta=eta,
            layers=layer_stats(self.network, {lid: s / steps for lid, s in update_sums.items()}),
        )

    def train(self, on_record: Optional[RecordCallback] = None) -> TrainResult:
        cfg = self.config
        logger.info(f"Training {cfg.name}: rule={cfg.rule.kind.value} eta={cfg.eta} epochs={cfg.epochs} seed={cfg.seed}")
        while self.epoch < cfg.epochs:
            upcoming = self.epoch + 1
            recorded = upcoming % cfg.eval_every == 0 or upcoming == cfg.epochs
            record = self.run_epoch(with_test=recorded)
            if self.checkpoint_path:
                save_checkpoint(self.checkpoint_path, self.checkpoint())
            if not recorded:
                continue
            self.metrics.append(record)
            logger.info(
                f"epoch {record.epoch}/{cfg.epochs} loss={record.train_loss:.4f} "
                f"train_acc={record.train_acc:.4f} test_acc={record.test_acc} eta={record.eta:.4g} "
                f"({record.wall_seconds:.2f}s)"
            )
            if on_record is not None:
                on_record(record)
        return TrainResult(network=self.network, metrics=list(self.metrics), steps=self.steps)


def train(
    config: TrainConfig,
    data_dir: Union[str, Path, None] = None,
    on_record: Optional[RecordCallback] = None,
) -> TrainResult:
    train_set, test_set = load_dataset(config.dataset, data_dir)
    return Trainer(config, train_set, test_set).train(on_record)
