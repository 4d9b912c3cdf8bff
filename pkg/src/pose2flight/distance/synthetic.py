"""Synthetic pinhole-projection dataset for the distance classifier.

Projected sizes scale with focal_length * physical_size / distance. Each
sample draws a view: side views show a narrower head and a less reliable
torso span (the projected neck-to-hip line depends on how the person
twists), back views a slightly narrower one. Multiplicative Gaussian
noise of the requested sigma lands on every geometric feature.
"""

from __future__ import annotations

import numpy as np

from .features import CLASS_LABELS_CM
from ..view import ViewClass

FOCAL_PX = 920.0
FACE_W_CM = 16.0
FACE_H_CM = 24.0
TORSO_CM = 48.0

SIDE_FACE_W_FACTOR = 0.6
SIDE_TORSO_JITTER = 0.08  # relative sigma of the side-view torso wobble
BACK_FACE_W_FACTOR = 0.9

VIEW_CHOICES = (ViewClass.FRONT, ViewClass.SIDE, ViewClass.BACK)
VIEW_PROBS = (0.5, 0.3, 0.2)


def project_features(distance_cm: float, view: ViewClass) -> tuple[float, float, float]:
    """Noise-free (W, H, torso) pixel sizes at a given distance and view."""
    face_w = FACE_W_CM
    if view is ViewClass.SIDE:
        face_w *= SIDE_FACE_W_FACTOR
    elif view in (ViewClass.BACK, ViewClass.AMBIGUOUS):
        face_w *= BACK_FACE_W_FACTOR
    w = FOCAL_PX * face_w / distance_cm
    h = FOCAL_PX * FACE_H_CM / distance_cm
    torso = FOCAL_PX * TORSO_CM / distance_cm
    return w, h, torso


def generate_synthetic_dataset(
    n_per_class: int,
    noise_sigma: float,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """(features (n, 7), labels (n,)) over all 5 distance classes.

    Labels are class indices into CLASS_LABELS_CM. Same seed, same data.
    """
    if n_per_class <= 0:
        raise ValueError("n_per_class must be positive")
    rng = np.random.default_rng(seed)
    rows = []
    labels = []
    for class_idx, distance in enumerate(CLASS_LABELS_CM):
        for _ in range(n_per_class):
            view = VIEW_CHOICES[rng.choice(len(VIEW_CHOICES), p=VIEW_PROBS)]
            w, h, torso = project_features(distance, view)
            if view is ViewClass.SIDE:
                torso *= 1.0 + SIDE_TORSO_JITTER * rng.standard_normal()
            if noise_sigma > 0.0:
                w *= 1.0 + noise_sigma * rng.standard_normal()
                h *= 1.0 + noise_sigma * rng.standard_normal()
                torso *= 1.0 + noise_sigma * rng.standard_normal()
            w = max(w, 1e-3)
            h = max(h, 1e-3)
            torso = max(torso, 1e-3)
            front = 1.0 if view is ViewClass.FRONT else 0.0
            side = 1.0 if view is ViewClass.SIDE else 0.0
            other = 1.0 - front - side
            rows.append([w, h, w * h, torso, front, side, other])
            labels.append(class_idx)
    return np.asarray(rows, dtype=np.float64), np.asarray(labels, dtype=np.int64)


def save_dataset(path: str, x: np.ndarray, y: np.ndarray):
    np.savez(path, x=x, y=y)


def load_dataset(path: str) -> tuple[np.ndarray, np.ndarray]:
    data = np.load(path, allow_pickle=False)
    return data["x"], data["y"]
