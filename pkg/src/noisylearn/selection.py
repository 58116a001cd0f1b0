"""Two-stage mini-batch sample selection.

Stage one drops the high-loss half of a batch using the batch-mean loss as
a dynamic threshold (strict ``<`` keeps a sample). Stage two salvages
high-loss samples whose prediction certainty, the standard deviation of
the softmax probability vector, reaches the mean certainty of the easy
set (inclusive ``>=``); the rest are dropped for the step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass
class BatchPartition:
    """Disjoint split of one mini-batch into easy / reusable / dropped ids."""

    easy_ids: list[int]
    reusable_ids: list[int]
    dropped_ids: list[int]
    loss_threshold: float
    certainty_threshold: float
    used_fallback_threshold: bool = field(default=False)

    @property
    def batch_size(self) -> int:
        return len(self.easy_ids) + len(self.reusable_ids) + len(self.dropped_ids)


def certainty(pred: np.ndarray) -> float:
    """Standard deviation of a probability vector, in [0, sqrt(K-1)/K].

    Zero for a uniform prediction, maximal for a one-hot one. The inner
    ``max`` guards against a negative variance from rounding at the
    uniform point.
    """
    p = np.asarray(pred, dtype=float)
    k = p.shape[-1]
    return float(np.sqrt(max(0.0, (p * p).mean() - 1.0 / k**2)))


def certainty_batch(probs: np.ndarray) -> np.ndarray:
    """Per-row prediction certainty for an (n, K) probability matrix."""
    p = np.asarray(probs, dtype=float)
    k = p.shape[1]
    return np.sqrt(np.maximum(0.0, (p * p).mean(axis=1) - 1.0 / k**2))


def partition_easy(
    batch: Sequence[tuple[int, float]],
) -> tuple[list[int], list[int], float]:
    """Split (id, loss) pairs on the batch-mean loss.

    Returns (easy_ids, rest_ids, loss_threshold) with input order
    preserved; a sample is easy only when its loss is strictly below the
    mean, so a batch of equal losses has an empty easy set.
    """
    if len(batch) == 0:
        raise ValueError("cannot partition an empty batch")
    losses = np.asarray([loss for _, loss in batch], dtype=float)
    if not np.all(np.isfinite(losses)):
        raise ValueError("batch losses must be finite")
    threshold = float(losses.mean())
    easy_ids = [sid for (sid, loss) in batch if loss < threshold]
    rest_ids = [sid for (sid, loss) in batch if not loss < threshold]
    return easy_ids, rest_ids, threshold


def select_reusable(
    rest: Sequence[tuple[int, float]],
    easy_certainties: Sequence[float],
    batch_certainties: Sequence[float],
) -> tuple[list[int], list[int], float]:
    """Split high-loss (id, certainty) pairs on the mean easy-set certainty.

    A sample is reusable when its certainty is >= the threshold (the
    boundary is inclusive). When the easy set is empty the threshold falls
    back to the whole-batch mean certainty so the epoch keeps running.
    """
    if len(easy_certainties) > 0:
        threshold = float(np.mean(easy_certainties))
    else:
        threshold = float(np.mean(batch_certainties))
    reusable_ids = [sid for (sid, c) in rest if c >= threshold]
    dropped_ids = [sid for (sid, c) in rest if not c >= threshold]
    return reusable_ids, dropped_ids, threshold


def partition_batch(
    ids: Sequence[int],
    losses: Sequence[float],
    certainties: Sequence[float],
) -> BatchPartition:
    """Run both selection stages over one batch worth of ids.

    ``losses`` and ``certainties`` are aligned with ``ids``.
    """
    if not len(ids) == len(losses) == len(certainties):
        raise ValueError("ids, losses and certainties must be aligned")
    cert_by_id = dict(zip(ids, certainties))
    easy_ids, rest_ids, loss_thr = partition_easy(list(zip(ids, losses)))
    reusable_ids, dropped_ids, cert_thr = select_reusable(
        [(sid, cert_by_id[sid]) for sid in rest_ids],
        [cert_by_id[sid] for sid in easy_ids],
        list(certainties),
    )
    return BatchPartition(
        easy_ids=easy_ids,
        reusable_ids=reusable_ids,
        dropped_ids=dropped_ids,
        loss_threshold=loss_thr,
        certainty_threshold=cert_thr,
        used_fallback_threshold=not easy_ids,
    )
