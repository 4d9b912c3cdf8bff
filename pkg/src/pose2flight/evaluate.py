"""Evaluation harnesses: gesture corpus accuracy and distance metrics."""

from __future__ import annotations

import numpy as np

from .distance import DistanceModel, continuous_distance
from .distance.features import CLASS_LABELS_CM
from .gestures import Gesture, classify_frame
from .poses import gesture_corpus
from .view import ViewConfig, classify_view


def evaluate_gesture_corpus(
    n_per_gesture: int = 600,
    seed: int = 7,
    angle_max_deg: float = 10.0,
    jitter_frac: float = 0.03,
) -> dict[Gesture, float]:
    """Per-frame recognition accuracy over a jittered synthetic corpus.

    Mirrors the per-frame evaluation protocol (every frame counts on its
    own, no temporal filtering).
    """
    cfg = ViewConfig()
    hits = {g: 0 for g in Gesture}
    totals = {g: 0 for g in Gesture}
    for label, frame in gesture_corpus(n_per_gesture, seed, angle_max_deg, jitter_frac):
        view = classify_view(frame, cfg)
        got = classify_frame(frame, view)
        totals[label] += 1
        if got is label:
            hits[label] += 1
    return {g: hits[g] / totals[g] for g in Gesture}


def evaluate_distance(model: DistanceModel, x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """(classification accuracy, continuous-readout MAE in cm)."""
    probs = model.forward(x)
    pred = probs.argmax(axis=1)
    accuracy = float((pred == y).mean())
    true_cm = np.asarray(CLASS_LABELS_CM)[y]
    est_cm = np.array([continuous_distance(p, model.class_labels) for p in probs])
    mae = float(np.abs(est_cm - true_cm).mean())
    return accuracy, mae
