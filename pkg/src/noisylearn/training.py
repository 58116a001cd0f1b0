"""Training loop: warm-up epochs, then selective drop/reuse/relabel epochs.

Warm-up trains conventionally on every sample with its observed label as
a plain one-hot target; label smoothing kicks in with the selective
phase, whose loss it defines. After warm-up each mini-batch is split into
easy / reusable / dropped sets,
reusable samples get their label replaced by the history-based corrected
one for this step only (the stored dataset is never modified), and the
update averages gradients over the kept samples alone. Every epoch logs a
full per-sample snapshot so selection quality can be audited offline.

Shuffling is keyed on (seed, epoch), so a run is a pure function of the
dataset and its config.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .datasets import ProvenancedSample
from .history import PredictionHistory
from .network import (
    ModelState,
    backward_batch,
    cross_entropy_batch,
    forward_batch,
    init_model,
    sgd_step,
)
from .selection import BatchPartition, certainty_batch, partition_batch
from .smoothing import lsr_targets

logger = logging.getLogger(__name__)

GROUP_WARMUP = "warmup"
GROUP_EASY = "easy"
GROUP_REUSABLE = "reusable"
GROUP_DROPPED = "dropped"

# labels_used sentinel for samples excluded from the update.
NO_LABEL = -1


@dataclass
class TrainConfig:
    """Hyperparameters for one training run.

    ``layer_dims`` is the full stack [input_dim, hidden..., n_classes].
    Setting ``warmup_epochs == total_epochs`` gives the plain-SGD
    baseline: the selective phase never starts.
    """

    layer_dims: list[int]
    warmup_epochs: int = 5
    total_epochs: int = 60
    history_len: int = 5
    epsilon: float = 0.5
    lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 0.0003
    batch_size: int = 32
    seed: int = 0

    def validate(self) -> None:
        if len(self.layer_dims) < 2 or any(d <= 0 for d in self.layer_dims):
            raise ValueError(f"layer_dims must be >=2 positive entries, got {self.layer_dims}")
        if self.warmup_epochs < 1:
            raise ValueError(f"warmup_epochs must be >= 1, got {self.warmup_epochs}")
        if self.total_epochs < self.warmup_epochs:
            raise ValueError(
                f"total_epochs must be >= warmup_epochs, got {self.total_epochs}"
            )
        if self.history_len < 0:
            raise ValueError(f"history_len must be >= 0, got {self.history_len}")
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")
        if not self.lr > 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if not 0 <= self.momentum < 1:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.seed < 0 or int(self.seed) != self.seed:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")


@dataclass
class EpochLog:
    """Per-epoch audit trail.

    The per-sample arrays are aligned with ``sample_ids`` (dataset order).
    ``labels_used`` holds the label each sample was trained with this
    epoch, NO_LABEL for dropped samples. ``corrections`` lists
    (sample_id, observed_label, corrected_label) for every reusable
    sample, whether or not the label actually changed.
    """

    epoch: int
    sample_ids: np.ndarray
    losses: np.ndarray
    certainties: np.ndarray
    groups: np.ndarray
    labels_used: np.ndarray
    pred_labels: np.ndarray
    mean_loss: float
    partitions: list[BatchPartition] = field(default_factory=list)
    corrections: list[tuple[int, int, int]] = field(default_factory=list)
    test_accuracy: float = float("nan")
    skipped_updates: int = 0
    fallback_batches: int = 0

    def group_counts(self) -> dict[str, int]:
        values, counts = np.unique(self.groups, return_counts=True)
        return dict(zip(values.tolist(), counts.tolist()))


def _dataset_arrays(dataset: list[ProvenancedSample], config: TrainConfig):
    if not dataset:
        raise ValueError("dataset is empty")
    X = np.stack([s.features for s in dataset]).astype(float)
    y = np.array([s.observed_label for s in dataset], dtype=int)
    ids = np.array([s.id for s in dataset], dtype=int)
    if len(set(ids.tolist())) != len(ids):
        raise ValueError("sample ids must be unique")
    if X.shape[1] != config.layer_dims[0]:
        raise ValueError(
            f"feature dim {X.shape[1]} != layer_dims[0] {config.layer_dims[0]}"
        )
    n_classes = config.layer_dims[-1]
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError(f"observed labels must lie in [0, {n_classes})")
    return X, y, ids


def shuffle_order(seed: int, epoch: int, n: int) -> np.ndarray:
    """Deterministic epoch shuffle; also the contract for external replays."""
    return np.random.default_rng([seed, epoch]).permutation(n)


def _run_epoch(
    model: ModelState,
    X: np.ndarray,
    y: np.ndarray,
    ids: np.ndarray,
    history: PredictionHistory,
    config: TrainConfig,
    epoch: int,
    selective: bool,
) -> tuple[ModelState, EpochLog]:
    n = X.shape[0]
    n_classes = config.layer_dims[-1]
    order = shuffle_order(config.seed, epoch, n)

    losses_out = np.empty(n)
    certs_out = np.empty(n)
    groups_out = np.empty(n, dtype="<U8")
    labels_used = np.full(n, NO_LABEL, dtype=int)
    preds_out = np.empty(n, dtype=int)
    partitions: list[BatchPartition] = []
    corrections: list[tuple[int, int, int]] = []
    skipped = 0
    fallbacks = 0

    for start in range(0, n, config.batch_size):
        rows = order[start : start + config.batch_size]
        batch_ids = ids[rows].tolist()
        probs = forward_batch(model, X[rows])
        # Warm-up optimizes plain one-hot targets; smoothing only shapes
        # the selective-phase loss (both its partition and its update).
        epsilon = config.epsilon if selective else 0.0
        observed_targets = lsr_targets(y[rows], n_classes, epsilon)
        losses = cross_entropy_batch(probs, observed_targets)
        certs = certainty_batch(probs)

        losses_out[rows] = losses
        certs_out[rows] = certs
        preds_out[rows] = probs.argmax(axis=1)

        if not selective:
            for k, sid in enumerate(batch_ids):
                history.record(sid, epoch, probs[k])
            groups_out[rows] = GROUP_WARMUP
            labels_used[rows] = y[rows]
            grads = backward_batch(model, X[rows], observed_targets)
            model = sgd_step(model, grads, config.lr, config.momentum, config.weight_decay)
            continue

        part = partition_batch(batch_ids, losses.tolist(), certs.tolist())
        partitions.append(part)
        if part.used_fallback_threshold:
            fallbacks += 1
            logger.debug(
                "epoch %d: empty easy set, certainty threshold fell back to batch mean",
                epoch,
            )

        pos = {sid: k for k, sid in enumerate(batch_ids)}
        kept_rows: list[int] = []
        kept_labels: list[int] = []
        for sid in part.easy_ids:
            k = pos[sid]
            kept_rows.append(rows[k])
            kept_labels.append(int(y[rows[k]]))
            groups_out[rows[k]] = GROUP_EASY
            labels_used[rows[k]] = y[rows[k]]
        for sid in part.reusable_ids:
            k = pos[sid]
            corrected = history.corrected_label(sid, probs[k])
            corrections.append((sid, int(y[rows[k]]), corrected))
            kept_rows.append(rows[k])
            kept_labels.append(corrected)
            groups_out[rows[k]] = GROUP_REUSABLE
            labels_used[rows[k]] = corrected
        for sid in part.dropped_ids:
            groups_out[rows[pos[sid]]] = GROUP_DROPPED

        # Current-epoch predictions enter the history only after the
        # relabel step: corrections above must see previous epochs only.
        for k, sid in enumerate(batch_ids):
            history.record(sid, epoch, probs[k])

        if kept_rows:
            kept_targets = lsr_targets(np.array(kept_labels), n_classes, epsilon)
            grads = backward_batch(model, X[kept_rows], kept_targets)
            model = sgd_step(model, grads, config.lr, config.momentum, config.weight_decay)
        else:
            skipped += 1
            logger.debug("epoch %d: batch kept no samples, update skipped", epoch)

    log = EpochLog(
        epoch=epoch,
        sample_ids=ids.copy(),
        losses=losses_out,
        certainties=certs_out,
        groups=groups_out,
        labels_used=labels_used,
        pred_labels=preds_out,
        mean_loss=float(losses_out.mean()),
        partitions=partitions,
        corrections=corrections,
        skipped_updates=skipped,
        fallback_batches=fallbacks,
    )
    return model, log


def warmup_epoch(
    model: ModelState,
    dataset: list[ProvenancedSample],
    history: PredictionHistory,
    config: TrainConfig,
    epoch: int = 1,
) -> tuple[ModelState, EpochLog]:
    """One conventional epoch over all samples with their observed labels."""
    config.validate()
    X, y, ids = _dataset_arrays(dataset, config)
    return _run_epoch(model, X, y, ids, history, config, epoch, selective=False)


def selective_epoch(
    model: ModelState,
    dataset: list[ProvenancedSample],
    history: PredictionHistory,
    config: TrainConfig,
    epoch: int,
) -> tuple[ModelState, EpochLog]:
    """One drop/reuse/relabel epoch; the update sees kept samples only."""
    config.validate()
    X, y, ids = _dataset_arrays(dataset, config)
    return _run_epoch(model, X, y, ids, history, config, epoch, selective=True)


def _accuracy(model: ModelState, X: np.ndarray, y: np.ndarray) -> float:
    return float((forward_batch(model, X).argmax(axis=1) == y).mean())


def train(
    dataset: list[ProvenancedSample],
    test_set: list[ProvenancedSample] | None,
    config: TrainConfig,
) -> tuple[ModelState, list[EpochLog]]:
    """Run the full schedule: warm-up for epochs 1..warmup_epochs, then
    selective epochs up to total_epochs.

    Test accuracy is evaluated after every epoch when a test set is given.
    """
    config.validate()
    X, y, ids = _dataset_arrays(dataset, config)
    X_test = y_test = None
    if test_set:
        X_test = np.stack([s.features for s in test_set]).astype(float)
        y_test = np.array([s.true_label for s in test_set], dtype=int)

    model = init_model(config.layer_dims, config.seed)
    history = PredictionHistory(config.history_len)
    logs: list[EpochLog] = []
    for epoch in range(1, config.total_epochs + 1):
        selective = epoch > config.warmup_epochs
        model, log = _run_epoch(model, X, y, ids, history, config, epoch, selective)
        if X_test is not None:
            log.test_accuracy = _accuracy(model, X_test, y_test)
        logs.append(log)
    return model, logs


def write_epochs_csv(logs: list[EpochLog], path) -> None:
    """One row per sample per epoch: epoch,sample_id,loss,certainty,group,label_used.

    label_used is left empty for dropped samples. Rows are sorted by
    sample id within each epoch.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "sample_id", "loss", "certainty", "group", "label_used"])
        for log in logs:
            for k in np.argsort(log.sample_ids, kind="stable"):
                label = log.labels_used[k]
                writer.writerow(
                    [
                        log.epoch,
                        log.sample_ids[k],
                        repr(float(log.losses[k])),
                        repr(float(log.certainties[k])),
                        log.groups[k],
                        "" if label == NO_LABEL else label,
                    ]
                )
