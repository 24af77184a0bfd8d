"""Labeled-pair benchmark of the hybrid detector against SimHash and MinHash."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .baselines import MINHASH_THRESHOLD, SIMHASH_THRESHOLD, minhash, minhash_sim, simhash, simhash_sim
from .detect import MirrorWeights, detect_mirror, fingerprint

__all__ = ["EmptyBenchmark", "BenchRow", "Method", "hybrid_method", "simhash_method", "minhash_method",
           "default_methods", "bench_dedup", "threshold_sweep", "rows_to_csv", "best_threshold", "CSV_COLUMNS", "SWEEP"]

CSV_COLUMNS = ["Method", "TP", "FP", "FN", "Precision", "Recall", "F1", "Repetitions"]
SWEEP = tuple(round(0.1 * i, 1) for i in range(11))


class EmptyBenchmark(ValueError):
    pass


@dataclass(frozen=True)
class BenchRow:
    method: str
    tp: int
    fp: int
    fn: int
    repetitions: int = 0
    threshold: float | None = None

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def as_list(self) -> list:
        return [self.method, self.tp, self.fp, self.fn, f"{self.precision:.4f}", f"{self.recall:.4f}",
                f"{self.f1:.4f}", self.repetitions]


@dataclass(frozen=True)
class Method:
    """``prepare`` turns raw HTML into a signature; ``same`` decides a pair at a threshold."""

    name: str
    threshold: float
    prepare: Callable[[bytes, str], object]
    same: Callable[[object, object, float], bool]


def hybrid_method(weights: MirrorWeights = MirrorWeights()) -> Method:
    def same(a, b, t):
        return detect_mirror(a, b, MirrorWeights(weights.scheme, weights.content, t)).is_mirror
    return Method("Hybrid", weights.threshold, lambda html, host: fingerprint(html, host=host), same)


def simhash_method(threshold: float = SIMHASH_THRESHOLD) -> Method:
    return Method("SimHash", threshold, lambda html, host: simhash(html),
                  lambda a, b, t: simhash_sim(a, b) >= t)


def minhash_method(threshold: float = MINHASH_THRESHOLD) -> Method:
    return Method("MinHash", threshold, lambda html, host: minhash(html),
                  lambda a, b, t: minhash_sim(a, b) >= t)


def default_methods() -> list[Method]:
    return [hybrid_method(), simhash_method(), minhash_method()]


def _as_bytes(html) -> bytes:
    return html.encode("utf-8") if isinstance(html, str) else html


def _signatures(method: Method, pages: Mapping[str, bytes], hosts: Iterable[str]) -> dict[str, object]:
    return {h: method.prepare(_as_bytes(pages[h]), h) for h in hosts}


def _confusion(method: Method, sigs, pairs, threshold: float) -> tuple[int, int, int]:
    tp = fp = fn = 0
    for a, b, truth in pairs:
        said = method.same(sigs[a], sigs[b], threshold)
        tp += said and truth
        fp += said and not truth
        fn += truth and not said
    return tp, fp, fn


def _repetitions(method: Method, sigs, representatives: Sequence[str], others: Sequence[str]) -> int:
    """Pages matched to more than one representative, counted once per extra match."""
    total = 0
    for page in others:
        hits = sum(method.same(sigs[r], sigs[page], method.threshold) for r in representatives)
        total += max(0, hits - 1)
    return total


def _check(pairs) -> list[tuple[str, str, bool]]:
    pairs = [(a, b, bool(y)) for a, b, y in pairs]
    if not pairs:
        raise EmptyBenchmark("no labeled pairs")
    return pairs


def bench_dedup(pages: Mapping[str, bytes | str], pairs: Iterable[tuple[str, str, bool]],
                representatives: Sequence[str] | None = None,
                methods: Sequence[Method] | None = None) -> list[BenchRow]:
    """One row per method at its own threshold.

    ``representatives`` default to the first host of every positive pair;
    every other host in the pairs is checked against all of them to count
    repetitions.
    """
    pairs = _check(pairs)
    hosts = sorted({h for a, b, _ in pairs for h in (a, b)})
    if representatives is None:
        representatives = sorted({a for a, _, y in pairs if y})
    reps = [r for r in representatives if r in set(hosts)]
    rep_set = set(reps)
    others = [h for h in hosts if h not in rep_set]
    rows = []
    for method in methods or default_methods():
        sigs = _signatures(method, pages, hosts)
        tp, fp, fn = _confusion(method, sigs, pairs, method.threshold)
        reps_count = _repetitions(method, sigs, reps, others)
        rows.append(BenchRow(method.name, tp, fp, fn, reps_count, method.threshold))
    return rows


def threshold_sweep(pages: Mapping[str, bytes | str], pairs: Iterable[tuple[str, str, bool]],
                    methods: Sequence[Method] | None = None,
                    thresholds: Sequence[float] = SWEEP) -> list[BenchRow]:
    """Confusion counts of every method at every threshold (repetitions not counted)."""
    pairs = _check(pairs)
    hosts = sorted({h for a, b, _ in pairs for h in (a, b)})
    rows = []
    for method in methods or default_methods():
        sigs = _signatures(method, pages, hosts)
        for t in thresholds:
            rows.append(BenchRow(method.name, *_confusion(method, sigs, pairs, float(t)), threshold=float(t)))
    return rows


def rows_to_csv(rows: Sequence[BenchRow], sweep: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + (["Threshold"] if sweep else []))
    for r in rows:
        w.writerow(r.as_list() + ([f"{r.threshold:.1f}"] if sweep else []))
    return buf.getvalue()


def best_threshold(rows: Sequence[BenchRow], method: str) -> float:
    """Sweep point with the highest F1 for ``method`` (lowest threshold on ties)."""
    cands = [r for r in rows if r.method == method]
    if not cands:
        raise KeyError(method)
    f1 = np.array([r.f1 for r in cands])
    return cands[int(np.argmax(f1))].threshold
