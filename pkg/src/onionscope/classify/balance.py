"""Per-class resampling to a fixed size."""
from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = ["EmptyClass", "bootstrap_balance", "DEFAULT_CAP", "DEFAULT_SEED"]

DEFAULT_CAP = 200
DEFAULT_SEED = 42


class EmptyClass(ValueError):
    pass


def bootstrap_balance(docs: Sequence, labels: Sequence, cap: int = DEFAULT_CAP, rng_seed: int = DEFAULT_SEED,
                      classes: Sequence | None = None) -> tuple[list, list]:
    """Every class resampled to exactly ``cap`` documents.

    Larger classes are down-sampled without replacement, smaller ones are
    drawn with replacement. Classes are processed in sorted order so the
    result depends only on the data and the seed.
    """
    if len(docs) != len(labels):
        raise ValueError("docs and labels differ in length")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    by_class: dict = {}
    for i, y in enumerate(labels):
        by_class.setdefault(y, []).append(i)
    wanted = sorted(by_class) if classes is None else list(classes)
    missing = [c for c in wanted if not by_class.get(c)]
    if missing:
        raise EmptyClass(f"no samples for classes {missing}")
    rng = np.random.default_rng(rng_seed)
    out_docs, out_labels = [], []
    for c in sorted(wanted, key=str):
        idx = np.array(by_class[c])
        if len(idx) >= cap:
            pick = rng.choice(idx, size=cap, replace=False)
        else:
            pick = rng.choice(idx, size=cap, replace=True)
        out_docs.extend(docs[i] for i in pick)
        out_labels.extend([c] * cap)
    return out_docs, out_labels
