"""Accuracy, macro precision/recall, F-beta and the conformal reliability score."""
from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = ["LengthMismatch", "metrics", "fbeta", "reliability", "per_class"]


class LengthMismatch(ValueError):
    pass


def fbeta(precision: float, recall: float, beta: float = 1.0) -> float:
    b2 = beta * beta
    denom = b2 * precision + recall
    return (1 + b2) * precision * recall / denom if denom > 0 else 0.0


def per_class(preds: Sequence, truth: Sequence, labels: Sequence | None = None) -> dict:
    """Per-label precision and recall; a label nobody predicted has precision 0."""
    if len(preds) != len(truth):
        raise LengthMismatch(f"{len(preds)} predictions for {len(truth)} labels")
    labels = sorted(set(truth) | set(preds)) if labels is None else list(labels)
    out = {}
    for c in labels:
        tp = sum(p == c and t == c for p, t in zip(preds, truth))
        predicted = sum(p == c for p in preds)
        actual = sum(t == c for t in truth)
        out[c] = (tp / predicted if predicted else 0.0, tp / actual if actual else 0.0)
    return out


def metrics(preds: Sequence, truth: Sequence, beta: float = 1.0, labels: Sequence | None = None) -> dict:
    """F-beta from the macro-averaged precision and recall."""
    if len(preds) != len(truth):
        raise LengthMismatch(f"{len(preds)} predictions for {len(truth)} labels")
    if not truth:
        return {"accuracy": 0.0, "precision": 0.0, "recall": 0.0, "fbeta": 0.0}
    pc = per_class(preds, truth, labels)
    p = sum(v[0] for v in pc.values()) / len(pc)
    r = sum(v[1] for v in pc.values()) / len(pc)
    acc = sum(a == b for a, b in zip(preds, truth)) / len(truth)
    return {"accuracy": acc, "precision": p, "recall": r, "fbeta": fbeta(p, r, beta)}


def reliability(probabilities) -> float | np.ndarray:
    """``1 - (p1 - p2)`` over the two largest probabilities, row-wise for matrices."""
    p = np.asarray(probabilities, dtype=float)
    if p.ndim == 1:
        if p.size < 2:
            return 0.0
        top = np.partition(p, -2)[-2:]
        return float(1.0 - (top[1] - top[0]))
    top = np.partition(p, -2, axis=1)[:, -2:]
    return 1.0 - (top[:, 1] - top[:, 0])
