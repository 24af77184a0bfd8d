"""Tokenization, stop-word removal and a rule-table suffix stemmer."""
from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

__all__ = ["load_stopwords", "load_stem_rules", "stem", "tokenize", "preprocess"]

_TOKEN = re.compile(r"[a-z0-9]+")
_VOWELS = set("aeiouy")


@lru_cache(maxsize=None)
def load_stopwords(path: str | None = None) -> frozenset[str]:
    if path is None:
        text = resources.files("onionscope.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip() and not w.startswith("#"))


@lru_cache(maxsize=1)
def load_stem_rules() -> tuple[tuple[str, str, int], ...]:
    text = resources.files("onionscope.data").joinpath("stem_rules.tsv").read_text(encoding="utf-8")
    rules = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        suffix, repl, min_len = line.split("\t")
        rules.append((suffix, repl, int(min_len)))
    return tuple(rules)


@lru_cache(maxsize=1 << 16)
def stem(word: str) -> str:
    for suffix, repl, min_len in load_stem_rules():
        if not word.endswith(suffix):
            continue
        base = word[: len(word) - len(suffix)]
        if len(base) < min_len:
            return word
        if suffix in ("ing", "ed", "ingly", "edly") and not _VOWELS & set(base):
            return word
        out = base + repl
        if suffix in ("ing", "ed", "ingly", "edly") and len(out) >= 3 and out[-1] == out[-2] \
                and out[-1] not in _VOWELS and out[-1] not in "lsz":
            out = out[:-1]
        return out
    return word


def tokenize(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Lowercase alphanumeric runs minus stop words; no stemming."""
    stop = load_stopwords() if stopwords is None else stopwords
    return [t for t in _TOKEN.findall(text.lower()) if t not in stop]


def preprocess(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Tokens for classification: stop words, short and numeric tokens dropped, then stemmed."""
    return [stem(t) for t in tokenize(text, stopwords) if len(t) >= 2 and not t.isdigit()]
