"""Synthetic noisy datasets with known per-sample provenance.

Samples are drawn around well-separated Gaussian cluster centers, one
cluster per class plus optional extra clusters whose samples do not
belong to any task class. Clean samples sit within one spread-radius of
their center, a configurable fraction of them ("hard" ones) in the
2-3 radius annulus instead. Label noise comes from two sources: a
fraction of task samples get a uniformly random wrong label, and the
extra-cluster samples get uniformly random labels. The hidden provenance
tag of every sample makes selection and relabeling quality measurable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

# Cluster centers are rejected until pairwise distances reach this many
# spread units; sampling radii (1 for easy, 2-3 for hard) stay inside it.
MIN_CENTER_SEPARATION = 4.0

_PLACEMENT_ROUNDS = 8
_TRIES_PER_CENTER = 200


class Provenance(IntEnum):
    """Hidden ground-truth origin of a sample; values match the CSV encoding."""

    CLEAN = 0
    MISLABELED = 1
    IRRELEVANT = 2


@dataclass
class ProvenancedSample:
    """One training or test point: features, observed label, hidden origin.

    ``true_label`` equals the observed label unless the sample is
    mislabeled; irrelevant samples have no task class, so their observed
    (random) label is carried there as well.
    """

    id: int
    features: np.ndarray
    observed_label: int
    provenance: Provenance
    true_label: int


@dataclass
class NoiseConfig:
    """Knobs for the synthetic generator; all counts are per class."""

    n_classes: int = 10
    n_irrelevant_classes: int = 2
    corruption_rate: float = 0.2
    samples_per_class: int = 200
    feature_dim: int = 16
    cluster_spread: float = 1.0
    hard_fraction: float = 0.2
    test_samples_per_class: int = 50
    seed: int = 0

    def validate(self) -> None:
        if self.n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.n_irrelevant_classes < 0:
            raise ValueError(
                f"n_irrelevant_classes must be >= 0, got {self.n_irrelevant_classes}"
            )
        if not 0 <= self.corruption_rate < 1:
            raise ValueError(
                f"corruption_rate must be in [0, 1), got {self.corruption_rate}"
            )
        if self.samples_per_class < 1:
            raise ValueError(f"samples_per_class must be >= 1, got {self.samples_per_class}")
        if self.feature_dim < 1:
            raise ValueError(f"feature_dim must be >= 1, got {self.feature_dim}")
        if not self.cluster_spread > 0:
            raise ValueError(f"cluster_spread must be positive, got {self.cluster_spread}")
        if not 0 <= self.hard_fraction < 1:
            raise ValueError(f"hard_fraction must be in [0, 1), got {self.hard_fraction}")
        if self.test_samples_per_class < 1:
            raise ValueError(
                f"test_samples_per_class must be >= 1, got {self.test_samples_per_class}"
            )
        if self.seed < 0 or int(self.seed) != self.seed:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")


def _place_centers(rng: np.random.Generator, n_centers: int, dim: int, spread: float) -> np.ndarray:
    """Rejection-sample centers pairwise >= MIN_CENTER_SEPARATION * spread apart.

    Starts from a compact bounding box (maximal cluster confusion) and
    grows it when the separation constraint cannot be met.
    """
    min_sep = MIN_CENTER_SEPARATION * spread
    half_width = 2.0 * spread
    for _ in range(_PLACEMENT_ROUNDS):
        centers: list[np.ndarray] = []
        for _ in range(n_centers):
            for _ in range(_TRIES_PER_CENTER):
                cand = rng.uniform(-half_width, half_width, size=dim)
                if all(np.linalg.norm(cand - c) >= min_sep for c in centers):
                    centers.append(cand)
                    break
            else:
                break
        if len(centers) == n_centers:
            return np.array(centers)
        half_width *= 1.5
    raise ValueError(
        f"could not place {n_centers} centers {min_sep:g} apart in {dim} dimensions"
    )


def _draw_around(
    rng: np.random.Generator, center: np.ndarray, spread: float, hard: bool
) -> np.ndarray:
    direction = rng.normal(size=center.shape[0])
    direction /= np.linalg.norm(direction)
    radius = spread * (rng.uniform(2.0, 3.0) if hard else rng.uniform(0.0, 1.0))
    return center + radius * direction


def generate(config: NoiseConfig) -> tuple[list[ProvenancedSample], list[ProvenancedSample]]:
    """Build (training set, clean test set) from the config, deterministically.

    Training set: ``samples_per_class`` clean draws per task class (a
    ``hard_fraction`` of them from the hard annulus), then a
    ``corruption_rate`` fraction of all task samples mislabeled uniformly
    at random, plus ``samples_per_class`` randomly labeled draws per
    irrelevant cluster. Test set: clean task-class draws only.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    n_centers = config.n_classes + config.n_irrelevant_classes
    centers = _place_centers(rng, n_centers, config.feature_dim, config.cluster_spread)

    n_hard = int(round(config.hard_fraction * config.samples_per_class))
    features: list[np.ndarray] = []
    labels: list[int] = []
    for cls in range(config.n_classes):
        for j in range(config.samples_per_class):
            features.append(
                _draw_around(rng, centers[cls], config.cluster_spread, hard=j < n_hard)
            )
            labels.append(cls)

    n_task = config.n_classes * config.samples_per_class
    n_corrupt = int(round(config.corruption_rate * n_task))
    corrupt_idx = set(rng.choice(n_task, size=n_corrupt, replace=False).tolist())

    train: list[ProvenancedSample] = []
    for i in range(n_task):
        true_label = labels[i]
        if i in corrupt_idx:
            wrong = int(rng.integers(0, config.n_classes - 1))
            if wrong >= true_label:
                wrong += 1
            train.append(
                ProvenancedSample(
                    id=i,
                    features=features[i],
                    observed_label=wrong,
                    provenance=Provenance.MISLABELED,
                    true_label=true_label,
                )
            )
        else:
            train.append(
                ProvenancedSample(
                    id=i,
                    features=features[i],
                    observed_label=true_label,
                    provenance=Provenance.CLEAN,
                    true_label=true_label,
                )
            )

    next_id = n_task
    for extra in range(config.n_irrelevant_classes):
        center = centers[config.n_classes + extra]
        for _ in range(config.samples_per_class):
            label = int(rng.integers(0, config.n_classes))
            train.append(
                ProvenancedSample(
                    id=next_id,
                    features=_draw_around(rng, center, config.cluster_spread, hard=False),
                    observed_label=label,
                    provenance=Provenance.IRRELEVANT,
                    true_label=label,
                )
            )
            next_id += 1

    n_hard_test = int(round(config.hard_fraction * config.test_samples_per_class))
    test: list[ProvenancedSample] = []
    for cls in range(config.n_classes):
        for j in range(config.test_samples_per_class):
            test.append(
                ProvenancedSample(
                    id=next_id,
                    features=_draw_around(
                        rng, centers[cls], config.cluster_spread, hard=j < n_hard_test
                    ),
                    observed_label=cls,
                    provenance=Provenance.CLEAN,
                    true_label=cls,
                )
            )
            next_id += 1
    return train, test


def write_samples_csv(samples: list[ProvenancedSample], path) -> None:
    """Export samples as id,label,provenance,true_label,f0..f{d-1} rows."""
    if not samples:
        raise ValueError("cannot export an empty sample list")
    dim = samples[0].features.shape[0]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["id", "label", "provenance", "true_label"] + [f"f{i}" for i in range(dim)]
        )
        for s in samples:
            writer.writerow(
                [s.id, s.observed_label, int(s.provenance), s.true_label]
                + [repr(float(x)) for x in s.features]
            )


def read_samples_csv(path) -> list[ProvenancedSample]:
    """Load samples written by write_samples_csv."""
    samples: list[ProvenancedSample] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:4] != ["id", "label", "provenance", "true_label"]:
            raise ValueError(f"unexpected dataset header in {path}: {header[:4]}")
        for row in reader:
            samples.append(
                ProvenancedSample(
                    id=int(row[0]),
                    features=np.array([float(x) for x in row[4:]]),
                    observed_label=int(row[1]),
                    provenance=Provenance(int(row[2])),
                    true_label=int(row[3]),
                )
            )
    return samples
