"""Scikit-learn estimator wrapper around the noise-robust training loop."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .datasets import Provenance, ProvenancedSample
from .network import forward_batch
from .training import TrainConfig, train


class SelectiveRelabelClassifier(ClassifierMixin, BaseEstimator):
    """MLP classifier that is robust to label noise in the training set.

    After ``warmup_epochs`` of conventional training, each mini-batch is
    partitioned by loss and prediction certainty: confusing high-loss
    samples are dropped from the update, confident high-loss samples are
    kept but trained with a label re-derived from the model's own recent
    prediction history. With ``selective=False`` the classifier degrades
    to a plain SGD baseline over all samples (useful for comparisons).

    Parameters mirror TrainConfig, except the architecture is given as
    ``hidden_dims``; input and output sizes come from the fitted data.
    """

    def __init__(
        self,
        hidden_dims=(32,),
        warmup_epochs=5,
        total_epochs=60,
        history_len=5,
        epsilon=0.5,
        lr=0.01,
        momentum=0.9,
        weight_decay=0.0003,
        batch_size=32,
        seed=0,
        selective=True,
    ):
        self.hidden_dims = hidden_dims
        self.warmup_epochs = warmup_epochs
        self.total_epochs = total_epochs
        self.history_len = history_len
        self.epsilon = epsilon
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.seed = seed
        self.selective = selective

    def fit(self, X, y):
        """Train on (possibly noisy) integer or string labels."""
        X, y = check_X_y(X, y, dtype=float)
        self.classes_, y_encoded = np.unique(y, return_inverse=True)
        if self.classes_.shape[0] < 2:
            raise ValueError("need at least 2 classes to fit")
        config = TrainConfig(
            layer_dims=[X.shape[1], *(int(h) for h in self.hidden_dims), self.classes_.shape[0]],
            warmup_epochs=self.total_epochs if not self.selective else self.warmup_epochs,
            total_epochs=self.total_epochs,
            history_len=self.history_len,
            epsilon=self.epsilon,
            lr=self.lr,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            batch_size=self.batch_size,
            seed=self.seed,
        )
        samples = [
            ProvenancedSample(
                id=i,
                features=X[i],
                observed_label=int(y_encoded[i]),
                provenance=Provenance.CLEAN,
                true_label=int(y_encoded[i]),
            )
            for i in range(X.shape[0])
        ]
        self.model_, self.epoch_logs_ = train(samples, None, config)
        self.n_features_in_ = X.shape[1]
        return self

    def _validate_for_predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return X

    def predict_proba(self, X):
        """Softmax class probabilities, columns aligned with ``classes_``."""
        return forward_batch(self.model_, self._validate_for_predict(X))

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[proba.argmax(axis=1)]
