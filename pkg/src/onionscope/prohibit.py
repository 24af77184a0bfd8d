"""Sentence-pattern detector for sites that allow or forbid lexicon content.

A small lexicon-and-suffix tagger labels each token, then every keyword
occurrence is matched against five slot sequences (e.g. ``KEY VBZ NOT VBN+``,
"<kw> is not allowed") inside a window of tokens that follows it. Slots may be
separated only by untagged words such as "strictly".
"""
from __future__ import annotations

import enum
import re
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

__all__ = [
    "Tag", "TaggedToken", "Lexicon", "PatternRule", "RULES", "Verdict", "SiteVerdict", "EmptyLexicon",
    "LexiconError", "tag_tokens", "split_sentences", "match_rule", "classify_site", "load_lexicon",
    "parse_lexicon", "irregular_participles", "WINDOW",
]

WINDOW = 5

DEFAULT_NEGATIVE_VERBS = frozenset({"removed", "censored", "banned", "deleted", "blocked", "reported",
                                    "rejected", "disallowed", "prohibited", "forbidden"})
DEFAULT_POSITIVE_VERBS = frozenset({"allowed", "permitted", "accepted", "tolerated", "welcomed",
                                    "supported", "encouraged"})
DEFAULT_NEGATIVE_ADJECTIVES = frozenset({"forbidden", "prohibited", "illegal", "unacceptable", "unwelcome",
                                         "banned", "disallowed"})
DEFAULT_POSITIVE_ADJECTIVES = frozenset({"welcome", "legal", "acceptable", "ok", "okay", "fine"})

# copulas and the few -s verbs that take a participle or adjective complement
_VBZ = frozenset({"is", "are", "was", "were", "am", "be", "gets", "get", "remains", "remain", "stays",
                  "stay", "becomes", "seems"})
_WILL = frozenset({"will", "shall"})
_NOT = frozenset({"not", "n't", "never"})
# -en/-ed words that are not participles
_NOT_PARTICIPLE = frozenset({
    "children", "often", "even", "seven", "eleven", "open", "when", "then", "ten", "men", "women", "garden",
    "token", "chicken", "kitchen", "heaven", "listen", "happen", "screen", "green", "seen", "teen", "between",
    "bed", "red", "need", "feed", "seed", "speed", "weed", "shed", "led", "hundred", "sacred", "naked", "wicked",
})
_WORD = re.compile(r"[a-z0-9]+(?:['’][a-z]+)?|n't")
_SENTENCE = re.compile(r"[.!?\n]+")


class EmptyLexicon(UserWarning):
    pass


class LexiconError(ValueError):
    pass


class Tag(str, enum.Enum):
    KEY = "KEY"
    VBZ = "VBZ"
    VB = "VB"
    VBN = "VBN"
    JJ = "JJ"
    WILL = "WILL"
    NOT = "NOT"
    OTHER = "OTHER"


@dataclass(frozen=True)
class TaggedToken:
    text: str
    tag: Tag
    polarity: int = 0    # +1 allowance, -1 prohibition, 0 neutral


@lru_cache(maxsize=1)
def irregular_participles() -> frozenset[str]:
    text = resources.files("onionscope.data").joinpath("irregular_participles.txt").read_text(encoding="utf-8")
    return frozenset(l.strip() for l in text.splitlines() if l.strip() and not l.startswith("#"))


@dataclass(frozen=True)
class Lexicon:
    keywords: frozenset[str] = frozenset()
    negative_verbs: frozenset[str] = DEFAULT_NEGATIVE_VERBS
    positive_verbs: frozenset[str] = DEFAULT_POSITIVE_VERBS
    negative_adjectives: frozenset[str] = DEFAULT_NEGATIVE_ADJECTIVES
    positive_adjectives: frozenset[str] = DEFAULT_POSITIVE_ADJECTIVES

    def __post_init__(self):
        for name in ("keywords", "negative_verbs", "positive_verbs", "negative_adjectives", "positive_adjectives"):
            object.__setattr__(self, name, frozenset(w.strip().lower() for w in getattr(self, name) if w.strip()))
        negative = self.negative_verbs | self.negative_adjectives
        positive = self.positive_verbs | self.positive_adjectives
        clash = negative & positive
        if clash:
            raise LexiconError(f"terms with both polarities: {sorted(clash)}")

    @property
    def keyword_phrases(self) -> list[tuple[str, ...]]:
        """Keywords as token tuples, longest first for greedy matching."""
        phrases = {tuple(_WORD.findall(k)) for k in self.keywords}
        return sorted((p for p in phrases if p), key=lambda p: (-len(p), p))


_SECTIONS = ("keywords", "negative_verbs", "positive_verbs", "negative_adjectives", "positive_adjectives")


def parse_lexicon(text: str) -> Lexicon:
    """Sectioned plain text: ``[keywords]``, ``[negative_verbs]`` ... one term per line.

    Missing verb and adjective sections keep the built-in defaults; a missing
    keyword section leaves the keyword set empty.
    """
    found: dict[str, set[str]] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise LexiconError(f"line {lineno}: unknown section [{section}]")
            found.setdefault(section, set())
            continue
        if section is None:
            raise LexiconError(f"line {lineno}: term outside of a section")
        found[section].add(line.lower())
    return Lexicon(**{k: frozenset(v) for k, v in found.items()})


def load_lexicon(path: str | Path) -> Lexicon:
    return parse_lexicon(Path(path).read_text(encoding="utf-8"))


def _words(sentence: str) -> list[str]:
    out = []
    for tok in _WORD.findall(sentence.lower().replace("’", "'")):
        if tok.endswith("n't") and tok != "n't":
            stem = tok[:-3]
            out.extend([{"wo": "will", "ca": "can", "sha": "shall"}.get(stem, stem), "n't"])
        elif "'" in tok:
            stem, _, suffix = tok.partition("'")
            out.append(stem)
            out.append({"ll": "will", "re": "are", "s": "is"}.get(suffix, "'" + suffix))
        else:
            out.append(tok)
    return out


def _participle(word: str) -> bool:
    if word in irregular_participles():
        return True
    if word in _NOT_PARTICIPLE or len(word) < 4:
        return False
    return word.endswith("ed") or word.endswith("en")


def tag_tokens(sentence: str, lexicon: Lexicon | None = None) -> list[TaggedToken]:
    """Tag one sentence; multi-word keywords collapse into a single KEY token."""
    lexicon = lexicon or Lexicon()
    words = _words(sentence)
    phrases = lexicon.keyword_phrases
    out: list[TaggedToken] = []
    i = 0
    while i < len(words):
        phrase = next((p for p in phrases if tuple(words[i:i + len(p)]) == p), None)
        if phrase is not None:
            out.append(TaggedToken(" ".join(phrase), Tag.KEY))
            i += len(phrase)
            continue
        w = words[i]
        i += 1
        if w in _NOT:
            out.append(TaggedToken(w, Tag.NOT))
        elif w in _WILL:
            out.append(TaggedToken(w, Tag.WILL))
        elif w in _VBZ:
            out.append(TaggedToken(w, Tag.VBZ))
        elif w in lexicon.negative_adjectives or w in lexicon.positive_adjectives:
            out.append(TaggedToken(w, Tag.JJ, -1 if w in lexicon.negative_adjectives else 1))
        elif w in lexicon.negative_verbs or w in lexicon.positive_verbs:
            out.append(TaggedToken(w, Tag.VBN, -1 if w in lexicon.negative_verbs else 1))
        elif _participle(w):
            out.append(TaggedToken(w, Tag.VBN))
        else:
            out.append(TaggedToken(w, Tag.OTHER))
    # the verb right after a modal is a bare infinitive ("will be removed")
    for j, tok in enumerate(out):
        if tok.tag is Tag.WILL:
            k = j + 1
            while k < len(out) and out[k].tag is Tag.NOT:
                k += 1
            if k < len(out) and out[k].tag in (Tag.VBZ, Tag.OTHER):
                out[k] = TaggedToken(out[k].text, Tag.VB)
    return out


@dataclass(frozen=True)
class PatternRule:
    rule_id: int
    slots: tuple[tuple[Tag, int], ...]   # (tag, required polarity; 0 = any)
    example: str

    def __str__(self) -> str:
        names = {1: "(+)", -1: "(-)", 0: ""}
        return " + ".join(["KEY"] + [names[p] + t.value for t, p in self.slots])


RULES = (
    PatternRule(1, ((Tag.VBZ, 0), (Tag.NOT, 0), (Tag.VBN, 1)), "{keyword} is not allowed"),
    PatternRule(2, ((Tag.WILL, 0), (Tag.VB, 0), (Tag.VBN, -1)), "{keyword} will be removed"),
    PatternRule(3, ((Tag.VBZ, 0), (Tag.NOT, 0), (Tag.JJ, 1)), "{keyword} is not welcome"),
    PatternRule(4, ((Tag.VBZ, 0), (Tag.VBN, -1)), "{keyword} is censored"),
    PatternRule(5, ((Tag.VBZ, 0), (Tag.JJ, -1)), "{keyword} is forbidden"),
)


def match_rule(rule: PatternRule, window: list[TaggedToken]) -> bool:
    """Slots in order inside ``window``; only OTHER tokens may sit between them."""
    pos = 0
    for tag, polarity in rule.slots:
        while pos < len(window) and window[pos].tag is Tag.OTHER:
            pos += 1
        if pos >= len(window):
            return False
        tok = window[pos]
        if tok.tag is not tag or (polarity and tok.polarity != polarity):
            return False
        pos += 1
    return True


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE.split(text) if s.strip()]


class Verdict(str, enum.Enum):
    ALLOWS = "Allows"
    FORBIDS = "Forbids"
    NO_SIGNAL = "NoSignal"


@dataclass
class SiteVerdict:
    verdict: Verdict
    matched_sentences: list[tuple[str, int | None]] = field(default_factory=list)


def _sentence_rule(tokens: list[TaggedToken], window: int) -> int | None:
    for i, tok in enumerate(tokens):
        if tok.tag is not Tag.KEY:
            continue
        span = tokens[i + 1:i + 1 + window]
        for rule in RULES:
            if match_rule(rule, span):
                return rule.rule_id
    return None


def classify_site(text: str, lexicon: Lexicon, window: int = WINDOW) -> SiteVerdict:
    """Forbids if any keyword sentence matches a rule, Allows if keywords occur without one."""
    if not lexicon.keywords:
        warnings.warn("lexicon has no keywords; nothing to detect", EmptyLexicon, stacklevel=2)
        return SiteVerdict(Verdict.NO_SIGNAL)
    matched: list[tuple[str, int | None]] = []
    for sentence in split_sentences(text):
        tokens = tag_tokens(sentence, lexicon)
        if any(t.tag is Tag.KEY for t in tokens):
            matched.append((sentence, _sentence_rule(tokens, window)))
    if not matched:
        return SiteVerdict(Verdict.NO_SIGNAL)
    if any(rule is not None for _, rule in matched):
        return SiteVerdict(Verdict.FORBIDS, matched)
    return SiteVerdict(Verdict.ALLOWS, matched)
