"""Training pipeline: balance, grid search on a holdout, k-fold report, final refit."""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.model_selection import KFold, train_test_split

from .balance import DEFAULT_CAP, DEFAULT_SEED, bootstrap_balance
from .logistic import LogisticRegression, NonConvergence
from .metrics import fbeta, metrics, reliability
from .vectorize import TfidfVectorizer, Vocabulary

__all__ = ["CATEGORIES", "ClassifierConfig", "TextClassifier", "LRModel", "Prediction", "train", "predict",
           "grid_search", "cross_validate", "save_model", "load_model", "report_csv", "GRID_C",
           "GRID_PENALTIES"]

CATEGORIES = ("Counterfeit", "Crypto", "Drugs", "Forum", "Hacking", "Locked", "Down", "Market", "Porn",
              "Soc.-Network", "Hosting")
GRID_C = (0.01, 0.1, 1.0, 10.0, 100.0)
# tie-break order of the grid: earlier wins
GRID_PENALTIES = ("none", "l2", "l1", "elasticnet")


@dataclass
class ClassifierConfig:
    penalty: str = "l1"
    C: float = 1.0
    l1_ratio: float = 0.5
    classes: tuple = CATEGORIES
    cap: int = DEFAULT_CAP
    folds: int = 10
    beta: float = 1.0
    rng_seed: int = DEFAULT_SEED
    holdout: float = 0.2
    mode: str = "standard"
    multi_class: str = "multinomial"
    max_iter: int = 1000
    grid: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classes"] = list(self.classes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierConfig":
        d = dict(d)
        d["classes"] = tuple(d.get("classes", CATEGORIES))
        return cls(**d)


class TextClassifier(ClassifierMixin, BaseEstimator):
    """tf-idf features followed by logistic regression, trained on raw text."""

    def __init__(self, penalty: str = "l1", C: float = 1.0, l1_ratio: float = 0.5, mode: str = "standard",
                 multi_class: str = "multinomial", max_iter: int = 1000, classes=None):
        self.penalty = penalty
        self.C = C
        self.l1_ratio = l1_ratio
        self.mode = mode
        self.multi_class = multi_class
        self.max_iter = max_iter
        self.classes = classes

    def fit(self, docs, y):
        self.vectorizer_ = TfidfVectorizer(mode=self.mode).fit(docs)
        X = self.vectorizer_.transform(docs)
        present = set(y)
        classes = [c for c in self.classes if c in present] if self.classes is not None else None
        self.lr_ = LogisticRegression(penalty=self.penalty, C=self.C, l1_ratio=self.l1_ratio,
                                      max_iter=self.max_iter, multi_class=self.multi_class,
                                      classes=classes).fit(X, list(y))
        self.classes_ = self.lr_.classes_
        return self

    def predict_proba(self, docs) -> np.ndarray:
        return self.lr_.predict_proba(self.vectorizer_.transform(docs))

    def predict(self, docs) -> np.ndarray:
        return self.lr_.predict(self.vectorizer_.transform(docs))


@dataclass
class LRModel:
    classes: list
    vocabulary: Vocabulary
    coef: np.ndarray
    intercept: np.ndarray
    config: ClassifierConfig
    report: dict = field(default_factory=dict)

    def to_classifier(self) -> TextClassifier:
        clf = TextClassifier(self.config.penalty, self.config.C, self.config.l1_ratio, self.config.mode,
                             "multinomial", self.config.max_iter, self.classes)
        vec = TfidfVectorizer(mode=self.config.mode)
        vec.vocabulary_ = self.vocabulary
        vec.idf_ = np.log2(self.vocabulary.n_docs / (np.array(self.vocabulary.df, dtype=float) + 1.0))
        lr = LogisticRegression(multi_class="multinomial")
        lr.classes_ = np.array(self.classes, dtype=object)
        lr.coef_, lr.intercept_ = self.coef, self.intercept
        clf.vectorizer_, clf.lr_, clf.classes_ = vec, lr, lr.classes_
        return clf


@dataclass(frozen=True)
class Prediction:
    label: str
    probabilities: dict
    reliability: float


def _fit_quiet(params: dict, docs, labels, classes):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonConvergence)
        clf = TextClassifier(classes=classes, **params).fit(docs, labels)
    return clf, [w.message for w in caught if issubclass(w.category, NonConvergence)]


def _params(config: ClassifierConfig, penalty: str, C: float) -> dict:
    return {"penalty": penalty, "C": C, "l1_ratio": config.l1_ratio, "mode": config.mode,
            "multi_class": config.multi_class, "max_iter": config.max_iter}


def grid_search(config: ClassifierConfig, docs: Sequence, labels: Sequence,
                points: Sequence[tuple[str, float]] | None = None) -> tuple[tuple[str, float], list]:
    """Best (penalty, C) by macro F-beta on a stratified holdout.

    ``points`` defaults to every penalty crossed with every C. Ties prefer the
    smaller C, then the earlier penalty in ``GRID_PENALTIES``, whatever the
    order of the points.
    """
    if points is None:
        points = [(p, C) for C in GRID_C for p in GRID_PENALTIES]
    tr_d, te_d, tr_y, te_y = train_test_split(list(docs), list(labels), test_size=config.holdout,
                                              random_state=config.rng_seed, stratify=list(labels))
    results = []
    for penalty, C in points:
        clf, _ = _fit_quiet(_params(config, penalty, C), tr_d, tr_y, config.classes)
        m = metrics(list(clf.predict(te_d)), te_y, config.beta)
        results.append({"penalty": penalty, "C": C, **m})
    rank = {p: i for i, p in enumerate(GRID_PENALTIES)}
    best = min(results, key=lambda r: (-round(r["fbeta"], 12), r["C"], rank[r["penalty"]]))
    return (best["penalty"], best["C"]), results


def cross_validate(config: ClassifierConfig, docs: Sequence, labels: Sequence, penalty: str, C: float) -> list[dict]:
    """k-fold metrics; the vectorizer of each fold sees only its training part."""
    docs, labels = list(docs), list(labels)
    folds = []
    kf = KFold(n_splits=config.folds, shuffle=True, random_state=config.rng_seed)
    for k, (tr, te) in enumerate(kf.split(docs)):
        tr_y = [labels[i] for i in tr]
        if len(set(tr_y)) < 2:
            continue
        clf, warns = _fit_quiet(_params(config, penalty, C), [docs[i] for i in tr], tr_y, config.classes)
        preds = list(clf.predict([docs[i] for i in te]))
        m = metrics(preds, [labels[i] for i in te], config.beta)
        folds.append({"fold": k, **m, "converged": not warns})
    return folds


def train(config: ClassifierConfig, docs: Sequence, labels: Sequence, balance: bool = True) -> LRModel:
    if balance:
        present = [c for c in config.classes if c in set(labels)]
        docs, labels = bootstrap_balance(docs, labels, config.cap, config.rng_seed, classes=present)
    if len(set(labels)) < 2:
        raise ValueError("need at least two classes to train")
    penalty, C = config.penalty, config.C
    grid = []
    if config.grid:
        (penalty, C), grid = grid_search(config, docs, labels)
    folds = cross_validate(config, docs, labels, penalty, C) if config.folds >= 2 else []
    clf, warns = _fit_quiet(_params(config, penalty, C), docs, labels, config.classes)
    for w in warns:
        warnings.warn(w)
    report = {"chosen": {"penalty": penalty, "C": C}, "grid": grid, "folds": folds,
              "rng_seed": config.rng_seed, "n_train": len(docs), "converged": not warns,
              "grad_norm": float(clf.lr_.grad_norm_)}
    if folds:
        mean = {k: float(np.mean([f[k] for f in folds])) for k in ("accuracy", "precision", "recall", "fbeta")}
        report["mean"] = mean
        # two aggregations: F from the averaged P and R, and the average of per-fold F
        report["fbeta_of_means"] = fbeta(mean["precision"], mean["recall"], config.beta)
        report["mean_of_fbeta"] = mean["fbeta"]
    chosen = ClassifierConfig.from_dict({**config.to_dict(), "penalty": penalty, "C": C})
    return LRModel(list(clf.classes_), clf.vectorizer_.vocabulary_, clf.lr_.coef_, clf.lr_.intercept_,
                   chosen, report)


def predict(model: LRModel | TextClassifier, doc: str) -> Prediction:
    clf = model.to_classifier() if isinstance(model, LRModel) else model
    p = clf.predict_proba([doc])[0]
    label = clf.classes_[int(np.argmax(p))]
    return Prediction(str(label), {str(c): float(v) for c, v in zip(clf.classes_, p)}, float(reliability(p)))


# -- persistence ----------------------------------------------------------------

def save_model(model: LRModel, path: str | Path) -> None:
    """Sectioned text: config JSON, one ``term<TAB>index<TAB>df`` line per term, weight rows."""
    lines = ["[config]", json.dumps({**model.config.to_dict(), "n_docs": model.vocabulary.n_docs},
                                    sort_keys=True)]
    lines.append("[vocabulary]")
    for term in model.vocabulary.terms():
        j = model.vocabulary.index[term]
        lines.append(f"{term}\t{j}\t{model.vocabulary.df[j]}")
    lines.append("[weights]")
    for c, b, row in zip(model.classes, model.intercept, model.coef):
        lines.append("\t".join([c, repr(float(b))] + [repr(float(x)) for x in row]))
    lines.append("[report]")
    lines.append(json.dumps(model.report, sort_keys=True))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> LRModel:
    section, config, vocab, weights, report = None, None, [], [], {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("[") and line.endswith("]") and line[1:-1] in ("config", "vocabulary", "weights", "report"):
            section = line[1:-1]
            continue
        if not line:
            continue
        if section == "config":
            config = json.loads(line)
        elif section == "vocabulary":
            term, j, df = line.split("\t")
            vocab.append((term, int(j), int(df)))
        elif section == "weights":
            parts = line.split("\t")
            weights.append((parts[0], float(parts[1]), [float(x) for x in parts[2:]]))
        elif section == "report":
            report = json.loads(line)
    if config is None:
        raise ValueError(f"{path}: missing [config] section")
    n_docs = config.pop("n_docs")
    vocab.sort(key=lambda t: t[1])
    vocabulary = Vocabulary({t: j for t, j, _ in vocab}, tuple(df for _, _, df in vocab), n_docs)
    coef = np.array([w for _, _, w in weights], dtype=float).reshape(len(weights), len(vocab))
    return LRModel([c for c, _, _ in weights], vocabulary, coef, np.array([b for _, b, _ in weights]),
                   ClassifierConfig.from_dict(config), report)


def report_csv(model: LRModel) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["section", "key", "penalty", "C", "accuracy", "precision", "recall", "fbeta"])
    for g in model.report.get("grid", []):
        w.writerow(["grid", "", g["penalty"], g["C"], g["accuracy"], g["precision"], g["recall"], g["fbeta"]])
    chosen = model.report.get("chosen", {})
    for f in model.report.get("folds", []):
        w.writerow(["fold", f["fold"], chosen.get("penalty"), chosen.get("C"), f["accuracy"], f["precision"],
                    f["recall"], f["fbeta"]])
    if "mean" in model.report:
        m = model.report["mean"]
        w.writerow(["summary", "mean_of_folds", chosen.get("penalty"), chosen.get("C"), m["accuracy"],
                    m["precision"], m["recall"], model.report["mean_of_fbeta"]])
        w.writerow(["summary", "fbeta_of_means", chosen.get("penalty"), chosen.get("C"), m["accuracy"],
                    m["precision"], m["recall"], model.report["fbeta_of_means"]])
    return buf.getvalue()
