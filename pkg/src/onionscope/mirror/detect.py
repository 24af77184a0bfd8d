"""Hybrid exact + fuzzy mirror detection and first-seen clustering."""
from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from ..corpus import PageRecord
from ..extractor import ExtractedPage, extract
from .ctph import FuzzyHash, ctph_compare, ctph_hash

__all__ = [
    "MirrorWeights", "VerdictKind", "Branch", "MirrorVerdict", "PageFingerprint", "EmptyPage",
    "fingerprint", "detect_mirror", "cluster_mirrors", "MirrorDetector", "MirrorClusterer",
    "SHORT_DOCUMENT_BYTES",
]

SHORT_DOCUMENT_BYTES = 256
DIGEST_ALGORITHM = "md5"


class EmptyPage(ValueError):
    pass


@dataclass(frozen=True)
class MirrorWeights:
    scheme: float = 0.3
    content: float = 0.7
    threshold: float = 0.90

    def __post_init__(self):
        if self.scheme < 0 or self.content < 0 or not math.isclose(self.scheme + self.content, 1.0, abs_tol=1e-9):
            raise ValueError(f"weights must be non-negative and sum to 1, got {self.scheme}+{self.content}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")


class VerdictKind(str, enum.Enum):
    EXACT_COPY = "exact_copy"
    NEAR_MIRROR = "near_mirror"
    DISTINCT = "distinct"


class Branch(str, enum.Enum):
    DIGEST = "digest"
    CROSS_LANGUAGE_SCHEME = "cross_language_scheme"
    FULL_HTML_FUZZY = "full_html_fuzzy"
    WEIGHTED_SPLIT = "weighted_split"


@dataclass(frozen=True)
class MirrorVerdict:
    kind: VerdictKind
    score: float
    branch: Branch

    @property
    def is_mirror(self) -> bool:
        return self.kind is not VerdictKind.DISTINCT


@dataclass(frozen=True)
class PageFingerprint:
    """Everything the workflow needs from one page, computed once."""

    host: str
    size: int
    digest: str
    language: str
    html_hash: FuzzyHash
    scheme_hash: FuzzyHash
    content_hash: FuzzyHash
    scheme_digest: str
    content_digest: str
    first_seen: float = 0.0

    @property
    def short(self) -> bool:
        return self.size < SHORT_DOCUMENT_BYTES


def _md5(data: bytes) -> str:
    return hashlib.md5(data).hexdigest()


def fingerprint(page: PageRecord | bytes, extracted: ExtractedPage | None = None, host: str = "",
                first_seen: float = 0.0) -> PageFingerprint:
    if isinstance(page, PageRecord):
        html, host = page.html, page.url
        if page.timestamps:
            first_seen = page.first_seen
    else:
        html = page
    if not html:
        raise EmptyPage(f"no html for {host or 'page'}")
    if extracted is None:
        extracted = extract(html, host or "unknown.onion")
    language = extracted.top_language
    if isinstance(page, PageRecord) and page.languages:
        language = page.languages[0]
    scheme = extracted.scheme.encode("utf-8")
    content = extracted.text.encode("utf-8")
    return PageFingerprint(
        host=host,
        size=len(html),
        digest=_md5(html),
        language=language,
        html_hash=ctph_hash(html),
        scheme_hash=ctph_hash(scheme),
        content_hash=ctph_hash(content),
        scheme_digest=_md5(scheme),
        content_digest=_md5(content),
        first_seen=first_seen,
    )


def _languages_differ(a: str, b: str) -> bool:
    return a != b and "und" not in (a, b)


def _decide(score: float, branch: Branch, weights: MirrorWeights) -> MirrorVerdict:
    kind = VerdictKind.NEAR_MIRROR if score >= weights.threshold else VerdictKind.DISTINCT
    return MirrorVerdict(kind, score, branch)


def detect_mirror(a: PageFingerprint, b: PageFingerprint, weights: MirrorWeights = MirrorWeights()) -> MirrorVerdict:
    """Digest, then language gate, then full-HTML fuzzy hash, then weighted scheme/content split."""
    if a.digest == b.digest:
        return MirrorVerdict(VerdictKind.EXACT_COPY, 1.0, Branch.DIGEST)
    if a.short or b.short:
        # fuzzy hashes carry no signal on tiny documents
        score = (weights.scheme * (a.scheme_digest == b.scheme_digest)
                 + weights.content * (a.content_digest == b.content_digest))
        return _decide(score, Branch.WEIGHTED_SPLIT, weights)
    if _languages_differ(a.language, b.language):
        return _decide(ctph_compare(a.scheme_hash, b.scheme_hash) / 100, Branch.CROSS_LANGUAGE_SCHEME, weights)
    full = ctph_compare(a.html_hash, b.html_hash) / 100
    if full >= weights.threshold:
        return MirrorVerdict(VerdictKind.NEAR_MIRROR, full, Branch.FULL_HTML_FUZZY)
    score = (weights.scheme * ctph_compare(a.scheme_hash, b.scheme_hash) / 100
             + weights.content * ctph_compare(a.content_hash, b.content_hash) / 100)
    return _decide(score, Branch.WEIGHTED_SPLIT, weights)


def cluster_mirrors(pages: Sequence[PageFingerprint], weights: MirrorWeights = MirrorWeights()):
    """Single pass in first-crawl order; each page joins the first matching representative.

    Returns ``(uniques, mirror_map)`` where ``mirror_map`` maps every unique
    host to the hosts of its mirrors in crawl order.
    """
    order = sorted(range(len(pages)), key=lambda i: (pages[i].first_seen, i))
    uniques: list[PageFingerprint] = []
    mirror_map: dict[str, list[str]] = {}
    by_digest: dict[str, PageFingerprint] = {}
    for i in order:
        page = pages[i]
        rep = by_digest.get(page.digest)
        if rep is None:
            for candidate in uniques:
                if detect_mirror(candidate, page, weights).is_mirror:
                    rep = candidate
                    break
        if rep is None:
            uniques.append(page)
            mirror_map[page.host] = []
            by_digest.setdefault(page.digest, page)
        else:
            mirror_map[rep.host].append(page.host)
    return uniques, mirror_map


class MirrorDetector(BaseEstimator):
    """Pairwise mirror decision with the workflow's weights as hyper-parameters."""

    def __init__(self, scheme_weight: float = 0.3, content_weight: float = 0.7, threshold: float = 0.90):
        self.scheme_weight = scheme_weight
        self.content_weight = content_weight
        self.threshold = threshold

    @property
    def weights(self) -> MirrorWeights:
        return MirrorWeights(self.scheme_weight, self.content_weight, self.threshold)

    def fit(self, X=None, y=None):
        self.weights_ = self.weights
        return self

    def verdicts(self, pairs) -> list[MirrorVerdict]:
        w = self.weights
        return [detect_mirror(a, b, w) for a, b in pairs]

    def decision_function(self, pairs) -> np.ndarray:
        return np.array([v.score for v in self.verdicts(pairs)], dtype=float)

    def predict(self, pairs) -> np.ndarray:
        return np.array([v.is_mirror for v in self.verdicts(pairs)], dtype=bool)


class MirrorClusterer(ClusterMixin, BaseEstimator):
    """First-seen mirror clustering; ``labels_`` index into ``representatives_``."""

    def __init__(self, scheme_weight: float = 0.3, content_weight: float = 0.7, threshold: float = 0.90):
        self.scheme_weight = scheme_weight
        self.content_weight = content_weight
        self.threshold = threshold

    def fit(self, X: Sequence[PageFingerprint], y=None):
        weights = MirrorWeights(self.scheme_weight, self.content_weight, self.threshold)
        uniques, mirror_map = cluster_mirrors(X, weights)
        self.representatives_ = [u.host for u in uniques]
        self.mirror_map_ = mirror_map
        index = {}
        for k, rep in enumerate(self.representatives_):
            index[rep] = k
            for m in mirror_map[rep]:
                index[m] = k
        self.labels_ = np.array([index[p.host] for p in X], dtype=int)
        return self
