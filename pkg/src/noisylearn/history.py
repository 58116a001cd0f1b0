"""Per-sample prediction history and accumulated-probability relabeling.

Each training sample keeps a bounded queue of its last ``capacity``
per-epoch predictions (argmax label and its probability). A corrected
label is the class with the highest probability mass accumulated over
those retained records; the current epoch's prediction is only the
fallback when nothing is retained, so callers record an epoch's
predictions after any relabeling that epoch.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class HistoryRecord:
    epoch: int
    label: int
    prob: float


class PredictionHistory:
    """Bounded per-sample queues of (epoch, label, probability) records."""

    def __init__(self, capacity: int):
        if capacity < 0 or int(capacity) != capacity:
            raise ValueError(f"capacity must be a non-negative integer, got {capacity}")
        self.capacity = int(capacity)
        self._records: dict[int, deque[HistoryRecord]] = {}

    def record(self, sample_id: int, epoch: int, pred: np.ndarray) -> None:
        """Append the argmax label and its probability for one sample.

        Epochs must arrive in strictly increasing order per sample; the
        oldest record is evicted once the queue exceeds capacity. With
        capacity 0 nothing is ever retained.
        """
        if self.capacity == 0:
            return
        p = np.asarray(pred, dtype=float)
        queue = self._records.setdefault(sample_id, deque())
        if queue and epoch <= queue[-1].epoch:
            raise ValueError(
                f"epoch {epoch} for sample {sample_id} is not after "
                f"recorded epoch {queue[-1].epoch}"
            )
        label = int(p.argmax())
        queue.append(HistoryRecord(epoch=int(epoch), label=label, prob=float(p[label])))
        if len(queue) > self.capacity:
            queue.popleft()

    def records_for(self, sample_id: int) -> tuple[HistoryRecord, ...]:
        """Retained records for one sample, oldest first."""
        return tuple(self._records.get(sample_id, ()))

    def corrected_label(self, sample_id: int, current_pred: np.ndarray) -> int:
        """Class with the highest accumulated probability over retained records.

        Ties break to the smallest class index. A sample with no retained
        records (capacity 0 or never recorded) falls back to the argmax of
        the current prediction.
        """
        records = self._records.get(sample_id)
        if not records:
            return int(np.asarray(current_pred, dtype=float).argmax())
        scores: dict[int, float] = {}
        for rec in records:
            scores[rec.label] = scores.get(rec.label, 0.0) + rec.prob
        best_label, best_score = -1, -np.inf
        for label in sorted(scores):
            if scores[label] > best_score:
                best_label, best_score = label, scores[label]
        return best_label

    def sample_ids(self) -> Iterable[int]:
        return self._records.keys()

    def write_csv(self, path) -> None:
        """Dump the retained state as sample_id,epoch,label,prob rows."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample_id", "epoch", "label", "prob"])
            for sid in sorted(self._records):
                for rec in self._records[sid]:
                    writer.writerow([sid, rec.epoch, rec.label, repr(rec.prob)])
