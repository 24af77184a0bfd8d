"""Character-trigram language identification over bundled frequency profiles.

Each profile file lists the most frequent trigrams of one language as
``trigram<TAB>count`` lines after a ``#total<TAB>n`` header. Text is split into
sentence chunks, every chunk is assigned its most likely language under a
naive-Bayes trigram model, and a language's score is the share of characters
it wins. Languages scoring at least ``inclusion`` times the top score are
reported.
"""
from __future__ import annotations

import math
import re
import unicodedata
from functools import lru_cache
from importlib import resources
from typing import Protocol

__all__ = ["LanguageDetector", "TrigramDetector", "default_detector", "load_profiles", "UNDETERMINED"]

UNDETERMINED = "und"
MIN_CHARS = 20
_UNSEEN_SPACE = 20000  # rough count of trigrams outside a profile, for the smoothing mass
_SENT_SPLIT = re.compile(r"(?<=[.!?;:。！？\n])\s+")
_NON_LETTER = re.compile(r"[^\w]+|[\d_]+")


class LanguageDetector(Protocol):
    def detect(self, text: str) -> list[tuple[str, float]]: ...


def load_profiles(package: str = "onionscope.data.profiles") -> dict[str, dict[str, int]]:
    profiles: dict[str, dict[str, int]] = {}
    root = resources.files(package)
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if not entry.name.endswith(".txt"):
            continue
        counts: dict[str, int] = {}
        total = 0
        for line in entry.read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            gram, _, n = line.rpartition("\t")
            if gram == "#total":
                total = int(n)
            else:
                counts[gram] = int(n)
        counts["#total"] = total or sum(counts.values())
        profiles[entry.name[:-4]] = counts
    return profiles


def _is_han(ch: str) -> bool:
    return "CJK UNIFIED" in unicodedata.name(ch, "")


def _trigrams(chunk: str):
    for word in chunk.split():
        padded = f" {word} "
        for i in range(len(padded) - 2):
            yield padded[i:i + 3]


class TrigramDetector:
    def __init__(self, profiles: dict[str, dict[str, int]] | None = None, inclusion: float = 0.2,
                 min_chunk: int = 40):
        profiles = profiles if profiles is not None else load_profiles()
        self.inclusion = inclusion
        self.min_chunk = min_chunk
        self._logp: dict[str, dict[str, float]] = {}
        self._floor: dict[str, float] = {}
        for lang, counts in profiles.items():
            total = counts["#total"]
            grams = {g: n for g, n in counts.items() if g != "#total"}
            covered = sum(grams.values()) / total
            self._logp[lang] = {g: math.log(n / total) for g, n in grams.items()}
            self._floor[lang] = math.log(max(1.0 - covered, 1e-3) / _UNSEEN_SPACE)
        self.languages = sorted(self._logp)

    def _chunks(self, text: str) -> list[str]:
        chunks, buf = [], ""
        for sent in _SENT_SPLIT.split(text):
            buf = f"{buf} {sent}" if buf else sent
            if len(buf) >= self.min_chunk:
                chunks.append(buf)
                buf = ""
        if buf:
            if chunks and len(buf) < self.min_chunk // 2:
                chunks[-1] += " " + buf
            else:
                chunks.append(buf)
        return chunks

    def classify_chunk(self, chunk: str) -> str | None:
        letters = [c for c in chunk if c.isalpha()]
        if not letters:
            return None
        if "zh" in self._logp and sum(map(_is_han, letters)) / len(letters) >= 0.3:
            return "zh"
        norm = _NON_LETTER.sub(" ", chunk.lower())
        grams = list(_trigrams(norm))
        if not grams:
            return None
        best, best_score = None, -math.inf
        for lang in self.languages:
            table, floor = self._logp[lang], self._floor[lang]
            score = sum(table.get(g, floor) for g in grams)
            if score > best_score:
                best, best_score = lang, score
        return best

    def detect(self, text: str) -> list[tuple[str, float]]:
        text = (text or "").strip()
        if len(text) < MIN_CHARS:
            return [(UNDETERMINED, 0.0)]
        weight: dict[str, float] = {}
        for chunk in self._chunks(text):
            lang = self.classify_chunk(chunk)
            if lang is not None:
                weight[lang] = weight.get(lang, 0.0) + len(chunk)
        total = sum(weight.values())
        if not total:
            return [(UNDETERMINED, 0.0)]
        ranked = sorted(((l, w / total) for l, w in weight.items()), key=lambda x: (-x[1], x[0]))
        top = ranked[0][1]
        return [(l, s) for l, s in ranked if s >= self.inclusion * top]


@lru_cache(maxsize=1)
def default_detector() -> TrigramDetector:
    return TrigramDetector()
