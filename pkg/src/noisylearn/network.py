"""Small feed-forward softmax classifier with exact gradients.

Plain numpy throughout. Weights are stored as ``[fan_in, fan_out]``
matrices so a batch of row vectors flows left to right; hidden layers use
ReLU, the output layer is a softmax with max-logit subtraction. The
optimizer is SGD with classic (non-dampened) momentum and weight decay
applied to weights only.

All functions are pure: they never mutate their inputs and return fresh
state, which keeps training runs exactly reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Probabilities are clamped here before any log; tests evaluating the loss
# by hand must apply the same floor.
PROB_FLOOR = 1e-12

# Tolerance when checking that a target vector is a distribution.
TARGET_SUM_TOL = 1e-6


@dataclass
class ModelState:
    """Classifier parameters plus the momentum buffer.

    ``layer_dims`` is ``[input_dim, hidden..., n_classes]``; weights[i] has
    shape ``(layer_dims[i], layer_dims[i+1])`` and biases[i] shape
    ``(layer_dims[i+1],)``. Velocities mirror the parameter shapes.
    """

    layer_dims: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    velocity_w: list[np.ndarray]
    velocity_b: list[np.ndarray]

    @property
    def n_classes(self) -> int:
        return self.layer_dims[-1]

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    def copy(self) -> "ModelState":
        return ModelState(
            layer_dims=list(self.layer_dims),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            velocity_w=[v.copy() for v in self.velocity_w],
            velocity_b=[v.copy() for v in self.velocity_b],
        )


@dataclass
class GradientSet:
    """Gradients with the same shapes as the model parameters."""

    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]


def init_model(layer_dims: list[int], seed: int) -> ModelState:
    """Build a model with zero-mean 1/sqrt(fan_in) weights and zero biases.

    Deterministic for a fixed seed: two calls with the same arguments
    produce bit-identical state.
    """
    if len(layer_dims) < 2:
        raise ValueError(f"layer_dims needs at least 2 entries, got {layer_dims}")
    if any(int(d) != d or d <= 0 for d in layer_dims):
        raise ValueError(f"layer_dims must be positive integers, got {layer_dims}")
    dims = [int(d) for d in layer_dims]
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return ModelState(
        layer_dims=dims,
        weights=weights,
        biases=biases,
        velocity_w=[np.zeros_like(w) for w in weights],
        velocity_b=[np.zeros_like(b) for b in biases],
    )


def _as_batch(features: np.ndarray, input_dim: int) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != input_dim:
        raise ValueError(
            f"features have shape {np.shape(features)}, expected (*, {input_dim})"
        )
    return x


def _forward_cached(model: ModelState, x: np.ndarray):
    """Forward pass keeping pre-activations and activations for backprop."""
    activations = [x]
    pre_acts = []
    h = x
    n_layers = len(model.weights)
    for i in range(n_layers - 1):
        z = h @ model.weights[i] + model.biases[i]
        h = np.maximum(0.0, z)
        pre_acts.append(z)
        activations.append(h)
    logits = h @ model.weights[-1] + model.biases[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    return activations, pre_acts, probs


def forward_batch(model: ModelState, features: np.ndarray) -> np.ndarray:
    """Softmax class probabilities for a batch of row vectors, shape (n, K)."""
    x = _as_batch(features, model.input_dim)
    _, _, probs = _forward_cached(model, x)
    return probs


def forward(model: ModelState, features: np.ndarray) -> np.ndarray:
    """Softmax class probabilities for a single feature vector, shape (K,)."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 1:
        raise ValueError(f"expected a 1-d feature vector, got shape {features.shape}")
    return forward_batch(model, features)[0]


def _check_targets(targets: np.ndarray, n_classes: int) -> np.ndarray:
    t = np.asarray(targets, dtype=float)
    if t.shape[-1] != n_classes:
        raise ValueError(f"target length {t.shape[-1]} != number of classes {n_classes}")
    if np.any(t < 0):
        raise ValueError("target entries must be non-negative")
    sums = t.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > TARGET_SUM_TOL):
        raise ValueError("target rows must sum to 1")
    return t


def cross_entropy(pred: np.ndarray, target: np.ndarray) -> float:
    """-sum(target * log(pred)) with probabilities clamped at PROB_FLOOR."""
    p = np.asarray(pred, dtype=float)
    t = _check_targets(target, p.shape[-1])
    if p.shape != t.shape:
        raise ValueError(f"pred shape {p.shape} != target shape {t.shape}")
    return float(-(t * np.log(np.maximum(p, PROB_FLOOR))).sum())


def cross_entropy_batch(probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Per-row cross-entropy for (n, K) probabilities against (n, K) targets."""
    p = np.asarray(probs, dtype=float)
    t = _check_targets(targets, p.shape[-1])
    if p.shape != t.shape:
        raise ValueError(f"probs shape {p.shape} != targets shape {t.shape}")
    return -(t * np.log(np.maximum(p, PROB_FLOOR))).sum(axis=1)


def backward_batch(model: ModelState, features: np.ndarray, targets: np.ndarray) -> GradientSet:
    """Mean gradient of the cross-entropy over a batch.

    The returned gradients are averaged over the rows of ``features``, i.e.
    the normalizer is the batch size.
    """
    x = _as_batch(features, model.input_dim)
    t = _check_targets(np.atleast_2d(np.asarray(targets, dtype=float)), model.n_classes)
    if t.shape[0] != x.shape[0]:
        raise ValueError(f"{x.shape[0]} feature rows but {t.shape[0]} target rows")
    activations, pre_acts, probs = _forward_cached(model, x)
    n = x.shape[0]
    d_weights = [np.empty(0)] * len(model.weights)
    d_biases = [np.empty(0)] * len(model.biases)
    # Gradient of mean CE w.r.t. output logits is (probs - targets) / n.
    delta = (probs - t) / n
    for i in range(len(model.weights) - 1, -1, -1):
        d_weights[i] = activations[i].T @ delta
        d_biases[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (pre_acts[i - 1] > 0)
    return GradientSet(d_weights=d_weights, d_biases=d_biases)


def backward(model: ModelState, features: np.ndarray, target: np.ndarray) -> GradientSet:
    """Exact gradient of cross_entropy(forward(model, x), target) for one sample."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 1:
        raise ValueError(f"expected a 1-d feature vector, got shape {features.shape}")
    return backward_batch(model, features[None, :], np.asarray(target, dtype=float)[None, :])


def sgd_step(
    model: ModelState,
    grads: GradientSet,
    lr: float,
    momentum: float,
    weight_decay: float,
) -> ModelState:
    """One SGD-with-momentum update, returning a new ModelState.

    velocity <- momentum * velocity + (grad + weight_decay * param) and
    param <- param - lr * velocity. Weight decay is applied to weights
    only, never to biases.
    """
    if not lr > 0:
        raise ValueError(f"lr must be positive, got {lr}")
    if not 0 <= momentum < 1:
        raise ValueError(f"momentum must be in [0, 1), got {momentum}")
    if weight_decay < 0:
        raise ValueError(f"weight_decay must be >= 0, got {weight_decay}")
    for g in (*grads.d_weights, *grads.d_biases):
        if not np.all(np.isfinite(g)):
            raise ValueError("non-finite gradient entries")

    new_vw, new_w = [], []
    for w, vw, gw in zip(model.weights, model.velocity_w, grads.d_weights):
        v = momentum * vw + (gw + weight_decay * w)
        new_vw.append(v)
        new_w.append(w - lr * v)
    new_vb, new_b = [], []
    for b, vb, gb in zip(model.biases, model.velocity_b, grads.d_biases):
        v = momentum * vb + gb
        new_vb.append(v)
        new_b.append(b - lr * v)
    return ModelState(
        layer_dims=list(model.layer_dims),
        weights=new_w,
        biases=new_b,
        velocity_w=new_vw,
        velocity_b=new_vb,
    )


def predict_labels(model: ModelState, features: np.ndarray) -> np.ndarray:
    """Argmax class indices for a batch of feature rows."""
    return forward_batch(model, features).argmax(axis=1)
