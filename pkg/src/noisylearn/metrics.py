"""Diagnostics computed against hidden ground-truth provenance.

Selection accuracy scores each sample's group against where its
provenance says it belongs: irrelevant samples belong in the dropped set,
mislabeled ones in the reusable set, and clean samples are fine in either
the easy or the reusable set (a hard clean sample salvaged and relabeled
to its own label is not a mistake). Relabel accuracy checks corrected
labels against true labels. Overlap measures how stable the selected sets
are across consecutive epochs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .datasets import Provenance, ProvenancedSample
from .network import ModelState, forward_batch
from .training import (
    GROUP_DROPPED,
    GROUP_EASY,
    GROUP_REUSABLE,
    GROUP_WARMUP,
    EpochLog,
)

DEFAULT_OVERLAP_LAGS = (1, 2, 3, 5, 8, 10)

_SELECTIVE_GROUPS = (GROUP_EASY, GROUP_REUSABLE, GROUP_DROPPED)


@dataclass
class EpochDiagnostics:
    """All per-epoch quality numbers in one place; nan where undefined."""

    epoch: int
    ratio_easy: float
    ratio_reusable: float
    ratio_dropped: float
    selection_accuracy: float
    relabel_accuracy: float
    test_accuracy: float
    mean_loss_by_group: dict[str, float]
    mean_certainty_by_group: dict[str, float]
    dropped_overlap: dict[int, float]
    easy_overlap: dict[int, float]


def test_accuracy(model: ModelState, test_set: Sequence[ProvenancedSample]) -> float:
    """Fraction of test samples whose argmax prediction hits the true label."""
    if not test_set:
        raise ValueError("test set is empty")
    X = np.stack([s.features for s in test_set]).astype(float)
    y = np.array([s.true_label for s in test_set], dtype=int)
    return float((forward_batch(model, X).argmax(axis=1) == y).mean())


def _group_correct(group: str, sample: ProvenancedSample) -> bool:
    if group not in _SELECTIVE_GROUPS:
        raise ValueError(f"sample {sample.id} has non-selective group {group!r}")
    if sample.provenance is Provenance.IRRELEVANT:
        return group == GROUP_DROPPED
    if sample.provenance is Provenance.MISLABELED:
        return group == GROUP_REUSABLE
    return group in (GROUP_EASY, GROUP_REUSABLE)


def selection_accuracy(
    groups_by_id: Mapping[int, str], samples: Iterable[ProvenancedSample]
) -> float:
    """Mean group-vs-provenance correctness over the given samples."""
    correct = []
    for sample in samples:
        if sample.id not in groups_by_id:
            raise ValueError(f"sample {sample.id} has no recorded group")
        correct.append(_group_correct(groups_by_id[sample.id], sample))
    if not correct:
        raise ValueError("no samples given")
    return float(np.mean(correct))


def relabel_accuracy(
    corrections: Iterable[tuple[int, int, int]],
    samples_by_id: Mapping[int, ProvenancedSample],
) -> float:
    """Fraction of relabeled samples whose new label is the right one.

    Mislabeled samples must be relabeled to their true label, clean ones
    to their own observed label; any irrelevant sample that slipped into
    the reusable set counts as incorrect. Returns nan when nothing was
    relabeled.
    """
    correct = []
    for sample_id, _old, new in corrections:
        sample = samples_by_id[sample_id]
        if sample.provenance is Provenance.IRRELEVANT:
            correct.append(False)
        elif sample.provenance is Provenance.MISLABELED:
            correct.append(new == sample.true_label)
        else:
            correct.append(new == sample.observed_label)
    if not correct:
        return float("nan")
    return float(np.mean(correct))


def overlap(selected_sets: Sequence[set], lag: int) -> np.ndarray:
    """Per-epoch overlap of each set with its previous ``lag`` sets.

    Value i is |intersection of sets[i-lag..i]| / |sets[i]|, reported for
    i = lag .. len-1. Lag 0 is 1.0 by definition.
    """
    if lag < 0:
        raise ValueError(f"lag must be >= 0, got {lag}")
    if len(selected_sets) <= lag:
        raise ValueError(
            f"need more than {lag} epochs of selections, got {len(selected_sets)}"
        )
    values = []
    for i in range(lag, len(selected_sets)):
        current = selected_sets[i]
        if not current:
            values.append(1.0 if lag == 0 else float("nan"))
            continue
        inter = set(current)
        for j in range(i - lag, i):
            inter &= selected_sets[j]
        values.append(len(inter) / len(current))
    return np.array(values)


def group_ratios(log: EpochLog) -> tuple[float, float, float]:
    """(easy, reusable, dropped) fractions of the epoch; nans during warm-up."""
    if GROUP_WARMUP in log.groups:
        return (float("nan"),) * 3
    n = log.groups.shape[0]
    return tuple(float((log.groups == g).sum() / n) for g in _SELECTIVE_GROUPS)


def prediction_accuracy(
    log: EpochLog,
    samples: Iterable[ProvenancedSample],
    provenance: Provenance | None = None,
    against: str = "true",
) -> float:
    """Accuracy of the epoch's argmax predictions on a provenance subset.

    ``against`` picks the reference label: "true" or "observed". Returns
    nan when the subset is empty.
    """
    if against not in ("true", "observed"):
        raise ValueError(f"against must be 'true' or 'observed', got {against!r}")
    pred_by_id = dict(zip(log.sample_ids.tolist(), log.pred_labels.tolist()))
    hits = []
    for sample in samples:
        if provenance is not None and sample.provenance is not provenance:
            continue
        target = sample.true_label if against == "true" else sample.observed_label
        hits.append(pred_by_id[sample.id] == target)
    if not hits:
        return float("nan")
    return float(np.mean(hits))


def _selected_id_sets(logs: Sequence[EpochLog], group: str) -> list[set]:
    sets = []
    for log in logs:
        sets.append(set(log.sample_ids[log.groups == group].tolist()))
    return sets


def _mean_by_group(log: EpochLog, values: np.ndarray) -> dict[str, float]:
    out = {}
    for g in _SELECTIVE_GROUPS + (GROUP_WARMUP,):
        mask = log.groups == g
        out[g] = float(values[mask].mean()) if mask.any() else float("nan")
    return out


def epoch_diagnostics(
    logs: Sequence[EpochLog],
    dataset: Sequence[ProvenancedSample],
    overlap_lags: Sequence[int] = DEFAULT_OVERLAP_LAGS,
) -> list[EpochDiagnostics]:
    """Assemble the full diagnostics series for a finished run.

    Selection-dependent fields are nan for warm-up epochs; overlap values
    are nan until enough selective epochs have accumulated for the lag.
    """
    samples_by_id = {s.id: s for s in dataset}
    selective_logs = [log for log in logs if GROUP_WARMUP not in log.groups]
    dropped_sets = _selected_id_sets(selective_logs, GROUP_DROPPED)
    easy_sets = _selected_id_sets(selective_logs, GROUP_EASY)
    selective_pos = {id(log): k for k, log in enumerate(selective_logs)}

    out = []
    for log in logs:
        warm = id(log) not in selective_pos
        if warm:
            ratios = (float("nan"),) * 3
            sel_acc = float("nan")
            rel_acc = float("nan")
            dropped_ov = {lag: float("nan") for lag in overlap_lags}
            easy_ov = {lag: float("nan") for lag in overlap_lags}
        else:
            ratios = group_ratios(log)
            groups_by_id = dict(zip(log.sample_ids.tolist(), log.groups.tolist()))
            sel_acc = selection_accuracy(groups_by_id, dataset)
            rel_acc = relabel_accuracy(log.corrections, samples_by_id)
            k = selective_pos[id(log)]
            dropped_ov, easy_ov = {}, {}
            for lag in overlap_lags:
                if k >= lag:
                    dropped_ov[lag] = float(overlap(dropped_sets[: k + 1], lag)[-1])
                    easy_ov[lag] = float(overlap(easy_sets[: k + 1], lag)[-1])
                else:
                    dropped_ov[lag] = float("nan")
                    easy_ov[lag] = float("nan")
        out.append(
            EpochDiagnostics(
                epoch=log.epoch,
                ratio_easy=ratios[0],
                ratio_reusable=ratios[1],
                ratio_dropped=ratios[2],
                selection_accuracy=sel_acc,
                relabel_accuracy=rel_acc,
                test_accuracy=log.test_accuracy,
                mean_loss_by_group=_mean_by_group(log, log.losses),
                mean_certainty_by_group=_mean_by_group(log, log.certainties),
                dropped_overlap=dropped_ov,
                easy_overlap=easy_ov,
            )
        )
    return out


def _cell(value: float) -> str:
    return "" if math.isnan(value) else repr(float(value))


def write_summary_csv(
    logs: Sequence[EpochLog], dataset: Sequence[ProvenancedSample], path
) -> None:
    """Per-epoch summary: losses, test accuracy, group ratios, accuracies.

    Cells that are undefined for an epoch (all selection columns during
    warm-up) are left empty.
    """
    diags = epoch_diagnostics(logs, dataset, overlap_lags=())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "epoch",
                "mean_loss",
                "test_acc",
                "ratio_easy",
                "ratio_reusable",
                "ratio_dropped",
                "selection_acc",
                "relabel_acc",
            ]
        )
        for log, diag in zip(logs, diags):
            writer.writerow(
                [
                    log.epoch,
                    repr(float(log.mean_loss)),
                    _cell(log.test_accuracy),
                    _cell(diag.ratio_easy),
                    _cell(diag.ratio_reusable),
                    _cell(diag.ratio_dropped),
                    _cell(diag.selection_accuracy),
                    _cell(diag.relabel_accuracy),
                ]
            )
