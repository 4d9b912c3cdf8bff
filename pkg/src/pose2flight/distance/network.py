"""From-scratch fully-connected distance classifier.

Architecture: 7 inputs, four ReLU hidden layers of 1000 units, a softmax
head over the 5 distance classes. Dropout (rate 0.5) follows the second
hidden layer; an identity skip adds the first hidden layer's output to
the third layer's input (the equal layer widths make that natural).
Training is plain seeded mini-batch gradient descent on softmax
cross-entropy; features are standardized with training-set statistics
stored inside the model. Forward/backward are written out explicitly so
the gradients can be checked against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .features import CLASS_LABELS_CM, FEATURE_DIM, DistanceFeatures

DEFAULT_HIDDEN = (1000, 1000, 1000, 1000)
DROPOUT_RATE = 0.5
DROPOUT_AFTER_LAYER = 2  # hidden layer index (1-based) whose output is dropped
SKIP_FROM, SKIP_INTO = 1, 3  # h1 output added to hidden layer 3's input
LEARNING_RATE = 1e-3
BATCH_SIZE = 64

MODEL_FORMAT_VERSION = 1


class UninitializedModel(Exception):
    """Forward pass requested before weights/normalization exist."""


class DegenerateDataset(Exception):
    """Training set does not cover all distance classes."""


@dataclass(frozen=True)
class DistanceEstimate:
    continuous_cm: float
    posterior: tuple[float, ...]
    argmax_class_cm: float


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def continuous_distance(posterior: np.ndarray, labels: tuple[float, ...] = CLASS_LABELS_CM) -> float:
    """Convex-combination readout of a class posterior.

    Classes within 0.1 of the largest softmax output keep their weight,
    the rest are zeroed; the surviving weights are renormalized and used
    to blend the class labels.
    """
    s = np.asarray(posterior, dtype=np.float64)
    w = np.where(np.abs(s.max() - s) < 0.1, s, 0.0)
    w = w / w.sum()
    return float(np.dot(w, np.asarray(labels)))


@dataclass
class DistanceModel:
    """Weights, normalization statistics and the class-label vector."""

    hidden_sizes: tuple[int, ...] = DEFAULT_HIDDEN
    class_labels: tuple[float, ...] = CLASS_LABELS_CM
    weights: list[np.ndarray] = field(default_factory=list)
    biases: list[np.ndarray] = field(default_factory=list)
    feat_mean: Optional[np.ndarray] = None
    feat_std: Optional[np.ndarray] = None
    dropout_rate: float = DROPOUT_RATE

    @property
    def initialized(self) -> bool:
        return bool(self.weights) and self.feat_mean is not None

    @property
    def has_skip(self) -> bool:
        # the skip needs layers 1 and 3 to exist with equal widths
        return (
            len(self.hidden_sizes) >= SKIP_INTO
            and self.hidden_sizes[SKIP_FROM - 1] == self.hidden_sizes[SKIP_INTO - 1 - 1]
        )

    def init_weights(self, seed: int):
        """He-normal initialization; identity normalization until trained."""
        rng = np.random.default_rng(seed)
        sizes = (FEATURE_DIM, *self.hidden_sizes, len(self.class_labels))
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        if self.feat_mean is None:
            self.feat_mean = np.zeros(FEATURE_DIM)
            self.feat_std = np.ones(FEATURE_DIM)

    def set_normalization(self, x: np.ndarray):
        self.feat_mean = x.mean(axis=0)
        self.feat_std = np.maximum(x.std(axis=0), 1e-8)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        if self.feat_mean is None:
            raise UninitializedModel("normalization statistics missing")
        return (x - self.feat_mean) / self.feat_std

    def _forward(self, xn: np.ndarray, dropout_mask: Optional[np.ndarray]) -> tuple[np.ndarray, list]:
        """Forward pass on normalized inputs; returns (probs, cache)."""
        cache = []
        a = xn
        skip_out = None
        n_hidden = len(self.hidden_sizes)
        for layer in range(1, n_hidden + 1):
            inp = a
            if layer == SKIP_INTO and self.has_skip and skip_out is not None:
                inp = a + skip_out
            z = inp @ self.weights[layer - 1] + self.biases[layer - 1]
            h = np.maximum(z, 0.0)
            mask = None
            if layer == DROPOUT_AFTER_LAYER and dropout_mask is not None:
                mask = dropout_mask
                h = h * mask
            cache.append((inp, z, mask))
            if layer == SKIP_FROM and self.has_skip:
                skip_out = h
            a = h
        z_out = a @ self.weights[-1] + self.biases[-1]
        cache.append((a, z_out, None))
        return softmax(z_out), cache

    def forward(self, feats: DistanceFeatures | np.ndarray) -> np.ndarray:
        """Posterior over the distance classes (inference mode, no dropout)."""
        if not self.initialized:
            raise UninitializedModel("model has no weights")
        x = feats.to_vector() if isinstance(feats, DistanceFeatures) else np.asarray(feats, dtype=np.float64)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        probs, _ = self._forward(self.normalize(x), dropout_mask=None)
        return probs[0] if single else probs

    def estimate(self, feats: DistanceFeatures) -> DistanceEstimate:
        posterior = self.forward(feats)
        idx = int(np.argmax(posterior))
        return DistanceEstimate(
            continuous_cm=continuous_distance(posterior, self.class_labels),
            posterior=tuple(float(p) for p in posterior),
            argmax_class_cm=self.class_labels[idx],
        )

    def loss_and_gradients(
        self,
        x: np.ndarray,
        y: np.ndarray,
        dropout_mask: Optional[np.ndarray] = None,
    ) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
        """Mean cross-entropy plus analytic gradients for every parameter.

        A fixed dropout mask keeps the loss deterministic, which is what
        the finite-difference check needs.
        """
        if not self.initialized:
            raise UninitializedModel("model has no weights")
        xn = self.normalize(np.atleast_2d(x))
        n = xn.shape[0]
        probs, cache = self._forward(xn, dropout_mask)
        eps = 1e-12
        loss = float(-np.mean(np.log(probs[np.arange(n), y] + eps)))

        grads_w = [np.zeros_like(w) for w in self.weights]
        grads_b = [np.zeros_like(b) for b in self.biases]

        delta = probs.copy()
        delta[np.arange(n), y] -= 1.0
        delta /= n

        inp_out, _, _ = cache[-1]
        grads_w[-1] = inp_out.T @ delta
        grads_b[-1] = delta.sum(axis=0)
        grad_h = delta @ self.weights[-1].T  # gradient wrt last hidden output

        n_hidden = len(self.hidden_sizes)
        grad_skip = None  # accumulated gradient flowing back to the skip source's output
        for layer in range(n_hidden, 0, -1):
            inp, z, mask = cache[layer - 1]
            if layer == SKIP_FROM and self.has_skip and grad_skip is not None:
                grad_h = grad_h + grad_skip
            if mask is not None:
                grad_h = grad_h * mask
            dz = grad_h * (z > 0.0)
            grads_w[layer - 1] = inp.T @ dz
            grads_b[layer - 1] = dz.sum(axis=0)
            grad_inp = dz @ self.weights[layer - 1].T
            if layer == SKIP_INTO and self.has_skip:
                grad_skip = grad_inp
            grad_h = grad_inp
        return loss, grads_w, grads_b


def train(
    x: np.ndarray,
    y: np.ndarray,
    epochs: int,
    seed: int,
    hidden_sizes: tuple[int, ...] = DEFAULT_HIDDEN,
    learning_rate: float = LEARNING_RATE,
    batch_size: int = BATCH_SIZE,
    verbose: bool = False,
) -> DistanceModel:
    """Train a classifier on (n, 7) features and integer class labels."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n_classes = len(CLASS_LABELS_CM)
    present = set(np.unique(y).tolist())
    if present != set(range(n_classes)):
        missing = sorted(set(range(n_classes)) - present)
        raise DegenerateDataset(f"classes {missing} absent from the training set")

    model = DistanceModel(hidden_sizes=hidden_sizes)
    model.set_normalization(x)
    model.init_weights(seed)
    rng = np.random.default_rng(seed + 1)

    n = x.shape[0]
    keep = 1.0 - model.dropout_rate
    drop_width = hidden_sizes[DROPOUT_AFTER_LAYER - 1] if len(hidden_sizes) >= DROPOUT_AFTER_LAYER else None
    for epoch in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            mask = None
            if drop_width is not None:
                # inverted dropout: scale at train time, identity at inference
                mask = (rng.random((len(idx), drop_width)) < keep) / keep
            loss, gw, gb = model.loss_and_gradients(x[idx], y[idx], dropout_mask=mask)
            epoch_loss += loss * len(idx)
            for w, g in zip(model.weights, gw):
                w -= learning_rate * g
            for b, g in zip(model.biases, gb):
                b -= learning_rate * g
        if verbose:
            print(f"epoch {epoch + 1}/{epochs}  loss {epoch_loss / n:.4f}")
    return model


def save_model(model: DistanceModel, path: str):
    """Versioned npz container: shapes, weights, stats, class labels."""
    meta = {
        "format_version": MODEL_FORMAT_VERSION,
        "hidden_sizes": list(model.hidden_sizes),
        "class_labels": list(model.class_labels),
        "dropout_rate": model.dropout_rate,
        "n_layers": len(model.weights),
    }
    arrays = {"feat_mean": model.feat_mean, "feat_std": model.feat_std}
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    np.savez(path, meta=json.dumps(meta), **arrays)


def load_model(path: str) -> DistanceModel:
    data = np.load(path, allow_pickle=False)
    meta = json.loads(str(data["meta"]))
    if meta["format_version"] != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {meta['format_version']}")
    model = DistanceModel(
        hidden_sizes=tuple(meta["hidden_sizes"]),
        class_labels=tuple(meta["class_labels"]),
        dropout_rate=meta["dropout_rate"],
    )
    model.feat_mean = data["feat_mean"]
    model.feat_std = data["feat_std"]
    model.weights = [data[f"w{i}"] for i in range(meta["n_layers"])]
    model.biases = [data[f"b{i}"] for i in range(meta["n_layers"])]
    return model
