import math
import random
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone
from sklearn.metrics import accuracy_score, precision_recall_fscore_support

from onionscope.classify import (CATEGORIES, ClassifierConfig, EmptyClass, EmptyVocabulary, LengthMismatch,
                                 LogisticRegression, TextClassifier, TfidfVectorizer, bootstrap_balance, fbeta,
                                 grid_search, load_model, metrics, predict, preprocess, reliability, report_csv,
                                 save_model, softmax, stem, term_weight, train)
from onionscope.classify import model as model_mod
from onionscope.classify.logistic import loss_grad, objective
from onionscope.synth import text_corpus


# -- preprocessing ----------------------------------------------------------------

def test_preprocess_example():
    assert preprocess("Selling stolen cards!") == ["sell", "stolen", "card"]


@pytest.mark.parametrize("text", ["the and of it", "12 34", "", "a b c"])
def test_preprocess_empty(text):
    assert preprocess(text) == []


@pytest.mark.parametrize("word,out", [("cards", "card"), ("selling", "sell"), ("hosted", "host"),
                                      ("quickly", "quick"), ("running", "run"), ("is", "is")])
def test_stem_rules(word, out):
    assert stem(word) == out


# -- tf-idf -----------------------------------------------------------------------

def _oracle_matrix(docs, mode):
    """Term weights straight from the formula, one dict per document."""
    n = len(docs)
    vocab = sorted({t for d in docs for t in d})
    df = {t: sum(t in d for d in docs) for t in vocab}
    out = []
    for d in docs:
        row = {}
        for t in set(d):
            tf = d.count(t)
            idf = math.log2(n / (df[t] + 1))
            if mode == "standard":
                row[t] = (1 + math.log2(tf)) * max(0.0, idf)
            else:
                row[t] = tf / idf if idf != 0 else 0.0
        if mode == "standard":
            norm = math.sqrt(sum(v * v for v in row.values()))
            row = {t: (v / norm if norm else 0.0) for t, v in row.items()}
        out.append(row)
    return vocab, out


@pytest.mark.parametrize("mode", ["standard", "paper-literal"])
@pytest.mark.parametrize("docs", [
    [["a", "a", "b"], ["b", "c"]],
    [["x", "x", "x", "y"], ["y", "z"], ["z", "w"], ["w"], ["v", "v"]],
])
def test_tfidf_matches_hand_oracle(docs, mode):
    vec = TfidfVectorizer(mode=mode).fit(docs)
    X = vec.transform(docs).toarray()
    vocab, rows = _oracle_matrix(docs, mode)
    assert list(vec.get_feature_names_out()) == vocab
    for i, row in enumerate(rows):
        for j, t in enumerate(vocab):
            assert X[i, j] == pytest.approx(row.get(t, 0.0), abs=1e-12)


def test_two_document_values():
    # N = 2: every idf is log2(2/(df+1)) <= 0, so standard weights vanish
    vec = TfidfVectorizer().fit([["a", "a", "b"], ["b", "c"]])
    assert vec.transform([["b", "c"]]).nnz == 0
    assert term_weight(1, 1, 2) == 0.0
    assert term_weight(1, 2, 2, "paper-literal") == pytest.approx(1 / math.log2(2 / 3), abs=1e-12)
    assert term_weight(2, 1, 8) == pytest.approx(2 * 2.0, abs=1e-12)  # (1 + log2 2) * log2(8/2)
    assert term_weight(0, 1, 8) == 0.0


def test_ubiquitous_term_clamped():
    docs = [["common", f"t{i}"] for i in range(6)]
    vec = TfidfVectorizer().fit(docs)
    j = vec.vocabulary_.index["common"]
    assert (vec.transform(docs).toarray()[:, j] == 0).all()


def test_unseen_terms_ignored():
    vec = TfidfVectorizer().fit([["a", "b"], ["c", "d"], ["e", "f"]])
    assert vec.transform([["zzz", "yyy"]]).nnz == 0


def test_empty_vocabulary():
    with pytest.raises(EmptyVocabulary):
        TfidfVectorizer().fit(["the and", "12"])


def test_standard_rows_unit_norm():
    docs, _ = zip(*text_corpus(5, seed=3))
    X = TfidfVectorizer().fit_transform(list(docs))
    norms = np.sqrt(X.multiply(X).sum(axis=1)).A.ravel()
    assert np.allclose(norms[norms > 0], 1.0, atol=1e-12)


# -- metrics ----------------------------------------------------------------------

FIVE = [
    (["a", "a", "b", "b", "c"], ["a", "b", "b", "c", "c"]),
    (["x", "y", "x", "y", "x"], ["x", "x", "x", "x", "x"]),
    (["p", "q", "r", "p", "q"], ["p", "q", "r", "p", "q"]),
    (["a", "b", "a", "b", "a"], ["b", "a", "b", "a", "b"]),
]


@pytest.mark.parametrize("preds,truth", FIVE)
def test_metrics_match_sklearn_and_formula(preds, truth):
    m = metrics(preds, truth)
    p, r, _, _ = precision_recall_fscore_support(truth, preds, average="macro", zero_division=0)
    assert m["accuracy"] == pytest.approx(accuracy_score(truth, preds), abs=1e-12)
    assert m["precision"] == pytest.approx(p, abs=1e-12)
    assert m["recall"] == pytest.approx(r, abs=1e-12)
    want = 2 * p * r / (p + r) if p + r else 0.0
    assert m["fbeta"] == pytest.approx(want, abs=1e-12)


def test_metrics_hand_case():
    # classes a, b, c: precisions 1/2, 1/2, 1 ; recalls 1, 1/2, 1/2
    m = metrics(["a", "a", "b", "b", "c"], ["a", "b", "b", "c", "c"])
    p, r = (0.5 + 0.5 + 1) / 3, (1 + 0.5 + 0.5) / 3
    assert (m["precision"], m["recall"]) == (pytest.approx(p, abs=1e-12), pytest.approx(r, abs=1e-12))
    assert m["accuracy"] == pytest.approx(0.6, abs=1e-12)


def test_fbeta_values():
    assert fbeta(0.757, 0.864) == pytest.approx(2 * 0.757 * 0.864 / (0.757 + 0.864), abs=1e-12)
    assert round(fbeta(0.757, 0.864), 3) == 0.807
    assert fbeta(0.4, 0.4) == pytest.approx(0.4, abs=1e-12)
    assert fbeta(0.0, 0.0) == 0.0
    assert fbeta(0.5, 1.0, beta=2) == pytest.approx(5 * 0.5 / (4 * 0.5 + 1), abs=1e-12)


def test_perfect_predictions():
    assert metrics(list("abc"), list("abc")) == {"accuracy": 1.0, "precision": 1.0, "recall": 1.0, "fbeta": 1.0}


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        metrics(["a"], ["a", "b"])


# -- reliability ------------------------------------------------------------------

def test_reliability_examples():
    assert reliability([0.9, 0.1] + [0.0] * 9) == pytest.approx(0.2, abs=1e-12)
    assert reliability(np.full(11, 1 / 11)) == 1.0
    assert reliability(np.eye(11)[3]) == 0.0


def test_reliability_on_random_vectors():
    rng = np.random.default_rng(0)
    P = rng.dirichlet(np.ones(11), size=1000)
    got = reliability(P)
    for p, r in zip(P, got):
        s = sorted(p.tolist())
        assert r == 1 - (s[-1] - s[-2])
        assert reliability(p) == r


# -- logistic regression ----------------------------------------------------------

def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(5, 4))
    Y = np.eye(3)[[0, 1, 2, 1, 0]]
    W, b = rng.normal(size=(3, 4)), rng.normal(size=3)
    for penalty in ("none", "l2", "l1", "elasticnet"):
        _, gW, gb = loss_grad(W, b, X, Y, penalty=penalty, C=0.7)
        h = 1e-6
        for idx in np.ndindex(W.shape):
            Wp, Wm = W.copy(), W.copy()
            Wp[idx] += h
            Wm[idx] -= h
            fd = (objective(Wp, b, X, Y, penalty, 0.7) - objective(Wm, b, X, Y, penalty, 0.7)) / (2 * h)
            assert gW[idx] == pytest.approx(fd, rel=1e-5, abs=1e-9)
        for k in range(3):
            bp, bm = b.copy(), b.copy()
            bp[k] += h
            bm[k] -= h
            fd = (objective(W, bp, X, Y, penalty, 0.7) - objective(W, bm, X, Y, penalty, 0.7)) / (2 * h)
            assert gb[k] == pytest.approx(fd, rel=1e-5, abs=1e-9)


@given(st.integers(0, 2**31), st.integers(2, 11))
def test_softmax_normalized(seed, k):
    Z = np.random.default_rng(seed).normal(scale=50, size=(20, k))
    P = softmax(Z)
    assert (P >= 0).all()
    assert np.abs(P.sum(axis=1) - 1).max() <= 1e-9


def _blobs(seed=0, n=40):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-3, 0.5, size=(n, 2)), rng.normal(3, 0.5, size=(n, 2))])
    return X, np.array(["neg"] * n + ["pos"] * n)


def test_separable_training_accuracy():
    X, y = _blobs()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # separable data has no finite optimum
        clf = LogisticRegression(penalty="none", max_iter=2000).fit(X, y)
    assert (clf.predict(X) == y).all()


def test_strong_l2_shrinks_weights():
    X, y = _blobs()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        clf = LogisticRegression(penalty="l2", C=1e-9).fit(X, y)
    assert np.abs(clf.coef_).max() <= 1e-6


def test_loss_monotone():
    docs, labels = zip(*text_corpus(20, seed=2))
    X = TfidfVectorizer().fit_transform(list(docs))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        clf = LogisticRegression(penalty="l1", C=10, max_iter=200, tol=0).fit(X, list(labels))
    losses = np.array(clf.loss_curve_)
    assert (np.diff(losses) <= 1e-12).all()


def test_non_convergence_warns_and_returns_model():
    X, y = _blobs()
    with pytest.warns(UserWarning, match="gradient norm"):
        clf = LogisticRegression(penalty="none", max_iter=2).fit(X, y)
    assert clf.coef_.shape == (2, 2)


def test_ovo_probabilities():
    docs, labels = zip(*text_corpus(15, seed=4))
    X = TfidfVectorizer().fit_transform(list(docs))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        clf = LogisticRegression(penalty="l2", C=10, multi_class="ovo", max_iter=200).fit(X, list(labels))
    P = clf.predict_proba(X)
    assert np.abs(P.sum(axis=1) - 1).max() <= 1e-9
    assert (clf.predict(X) == np.array(labels)).mean() > 0.9


def test_argmax_tie_goes_to_earlier_class():
    clf = LogisticRegression()
    clf.classes_ = np.array(["b", "a"], dtype=object)
    clf.coef_, clf.intercept_ = np.zeros((2, 3)), np.zeros(2)
    assert clf.predict(np.zeros((1, 3)))[0] == "b"


def test_estimator_clone():
    clf = TextClassifier(penalty="l2", C=3.0)
    twin = clone(clf)
    assert twin.get_params() == clf.get_params() and twin is not clf
    assert clone(LogisticRegression(C=0.5)).get_params()["C"] == 0.5


# -- balancing --------------------------------------------------------------------

def test_balance_down_and_up():
    docs = [f"d{i}" for i in range(550)]
    labels = ["big"] * 500 + ["small"] * 50
    out_d, out_y = bootstrap_balance(docs, labels, cap=200, rng_seed=1)
    big = [d for d, y in zip(out_d, out_y) if y == "big"]
    small = [d for d, y in zip(out_d, out_y) if y == "small"]
    assert len(big) == len(set(big)) == 200
    assert len(small) == 200 and set(small) <= set(docs[500:])
    assert bootstrap_balance(docs, labels, 200, 1) == (out_d, out_y)


def test_balance_at_cap_is_permutation():
    docs = [f"d{i}" for i in range(6)]
    labels = ["x"] * 3 + ["y"] * 3
    out_d, out_y = bootstrap_balance(docs, labels, cap=3)
    assert sorted(zip(out_d, out_y)) == sorted(zip(docs, labels))


def test_balance_empty_class():
    with pytest.raises(EmptyClass):
        bootstrap_balance(["a"], ["x"], classes=["x", "y"])


# -- training pipeline -----------------------------------------------------------

@pytest.fixture(scope="module")
def small_training():
    return [(d, y) for d, y in text_corpus(12, seed=8) if y in CATEGORIES[:4]]


def test_train_predict_save_load(small_training, tmp_path):
    docs, labels = zip(*small_training)
    config = ClassifierConfig(classes=CATEGORIES[:4], cap=12, folds=3, grid=False, penalty="l2", C=10,
                              max_iter=300)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = train(config, docs, labels)
    assert len(m.report["folds"]) == 3
    assert {"fbeta_of_means", "mean_of_fbeta"} <= set(m.report)
    pred = predict(m, docs[0])
    assert pred.label == labels[0]
    assert sum(pred.probabilities.values()) == pytest.approx(1.0, abs=1e-9)
    assert 0 <= pred.reliability <= 1
    save_model(m, tmp_path / "model.txt")
    back = load_model(tmp_path / "model.txt")
    assert back.classes == m.classes and back.vocabulary == m.vocabulary
    assert np.array_equal(back.coef, m.coef) and np.array_equal(back.intercept, m.intercept)
    assert predict(back, docs[5]) == predict(m, docs[5])
    assert report_csv(m).splitlines()[0] == "section,key,penalty,C,accuracy,precision,recall,fbeta"


def test_grid_order_invariant_and_tie_break(small_training):
    docs, labels = zip(*small_training)
    config = ClassifierConfig(classes=CATEGORIES[:4], max_iter=100)
    points = [(p, C) for C in (1.0, 10.0) for p in ("none", "l2")]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        best, results = grid_search(config, docs, labels, points)
        shuffled = points[:]
        random.Random(0).shuffle(shuffled)
        best2, _ = grid_search(config, docs, labels, shuffled[::-1])
    assert best == best2
    top = max(r["fbeta"] for r in results)
    tied = [(r["C"], ("none", "l2").index(r["penalty"])) for r in results if round(r["fbeta"], 12) == round(top, 12)]
    assert (best[1], ("none", "l2").index(best[0])) == min(tied)


def test_folds_never_leak_vocabulary(small_training, monkeypatch):
    docs, labels = zip(*[(f"{d} uniq{i}x", y) for i, (d, y) in enumerate(small_training)])
    fitted = []
    real = model_mod.TfidfVectorizer

    class Spy(real):
        def fit(self, docs_, y=None):
            fitted.append(set(docs_))
            return super().fit(docs_, y)

    monkeypatch.setattr(model_mod, "TfidfVectorizer", Spy)
    config = ClassifierConfig(classes=CATEGORIES[:4], folds=4, max_iter=50, rng_seed=3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model_mod.cross_validate(config, docs, labels, "l2", 1.0)
    from sklearn.model_selection import KFold
    splits = list(KFold(4, shuffle=True, random_state=3).split(docs))
    assert len(fitted) == 4
    for seen, (_, te) in zip(fitted, splits):
        assert not seen & {docs[i] for i in te}


def test_config_defaults():
    c = ClassifierConfig()
    assert (c.penalty, c.cap, c.folds, c.beta, c.rng_seed) == ("l1", 200, 10, 1.0, 42)
    assert len(c.classes) == 11
    assert ClassifierConfig.from_dict(c.to_dict()) == c
