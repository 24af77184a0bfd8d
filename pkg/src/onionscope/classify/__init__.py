"""Content classification: preprocessing, tf-idf, logistic regression, reliability."""
from .balance import EmptyClass, bootstrap_balance
from .logistic import LogisticRegression, NonConvergence, softmax
from .metrics import LengthMismatch, fbeta, metrics, reliability
from .model import (CATEGORIES, ClassifierConfig, LRModel, Prediction, TextClassifier, cross_validate,
                    grid_search, load_model, predict, report_csv, save_model, train)
from .preprocess import preprocess, stem, tokenize
from .vectorize import EmptyVocabulary, TfidfVectorizer, Vocabulary, term_weight

__all__ = [
    "EmptyClass", "bootstrap_balance", "LogisticRegression", "NonConvergence", "softmax", "LengthMismatch",
    "fbeta", "metrics", "reliability", "CATEGORIES", "ClassifierConfig", "LRModel", "Prediction",
    "TextClassifier", "cross_validate", "grid_search", "load_model", "predict", "report_csv", "save_model",
    "train", "preprocess", "stem", "tokenize", "EmptyVocabulary", "TfidfVectorizer", "Vocabulary",
    "term_weight",
]
