"""Seed generation: tf-idf keywords from titles, search-engine lookups, manual seeds."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .classify.preprocess import load_stopwords, tokenize
from .classify.vectorize import TfidfVectorizer
from .corpus import OnionAddress, Surface, normalize_url

__all__ = ["Keyword", "Seed", "EmptyCorpus", "EngineError", "SearchClient", "FixtureSearchClient",
           "HttpSearchClient", "QueryResult", "extract_keywords", "query_engines", "merge_seeds",
           "MANUAL", "load_seeds", "save_seeds"]

log = logging.getLogger(__name__)
MANUAL = "manual"


class EmptyCorpus(ValueError):
    pass


class EngineError(RuntimeError):
    pass


@dataclass(frozen=True)
class Keyword:
    term: str
    score: float


@dataclass(frozen=True)
class Seed:
    url: OnionAddress | Surface
    provenance: frozenset[str]

    @property
    def host(self) -> str:
        return self.url.host


class SearchClient(Protocol):
    name: str

    def search(self, term: str) -> list[str]: ...


class FixtureSearchClient:
    """Canned results: a directory with one file per term, one URL per line."""

    def __init__(self, root: str | Path, name: str = "fixture"):
        self.root = Path(root)
        self.name = name
        if not self.root.is_dir():
            raise EngineError(f"fixture directory {self.root} does not exist")

    def search(self, term: str) -> list[str]:
        for candidate in (self.root / term, self.root / f"{term}.txt"):
            if candidate.is_file():
                lines = candidate.read_text(encoding="utf-8").splitlines()
                return [ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]
        return []


class HttpSearchClient:
    """Generic HTML search endpoint reached through a SOCKS proxy.

    ``url_template`` receives the term as ``{term}``; onion addresses are
    scraped from the response. Needs the optional ``requests`` extra.
    """

    def __init__(self, name: str, url_template: str, proxy: str | None = None, timeout: float = 30.0):
        self.name = name
        self.url_template = url_template
        self.proxy = proxy
        self.timeout = timeout

    def search(self, term: str) -> list[str]:
        try:
            import requests
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise EngineError("requests is not installed; install onionscope[proxy]") from exc
        from .extractor import extract_links
        from .corpus import LinkClass
        proxies = {"http": f"socks5h://{self.proxy}", "https": f"socks5h://{self.proxy}"} if self.proxy else None
        try:
            resp = requests.get(self.url_template.format(term=term), proxies=proxies, timeout=self.timeout)
        except requests.RequestException as exc:
            raise EngineError(f"{self.name}: {exc}") from exc
        return [u for u, cls in extract_links(resp.text, "engine.invalid") if cls is LinkClass.EXTERNAL_ONION]


def _analyzer(stopwords: frozenset[str]):
    return lambda doc: tokenize(doc, stopwords)


def extract_keywords(titles: Sequence[str], k: int, stopwords: Iterable[str] | None = None) -> list[Keyword]:
    """Top ``k`` terms by tf-idf summed over documents; ties break alphabetically."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not titles:
        raise EmptyCorpus("no titles")
    stop = load_stopwords() if stopwords is None else frozenset(stopwords)
    vec = TfidfVectorizer(mode="standard", analyzer=_analyzer(stop))
    try:
        X = vec.fit_transform(list(titles))
    except ValueError as exc:
        raise EmptyCorpus(str(exc)) from exc
    scores = np.asarray(X.sum(axis=0)).ravel()
    terms = vec.vocabulary_.terms()
    if not scores.any():
        # idf is zero for every term in tiny corpora; fall back to summed sublinear tf
        tf = TfidfVectorizer(mode="standard", analyzer=_analyzer(stop), normalize=False)
        tf.fit(list(titles))
        tf.idf_ = np.ones(len(terms))
        scores = np.asarray(tf.transform(list(titles)).sum(axis=0)).ravel()
    ranked = sorted(zip(terms, scores.tolist()), key=lambda ts: (-ts[1], ts[0]))
    return [Keyword(t, float(s)) for t, s in ranked[:k]]


@dataclass
class QueryResult:
    seeds: list[Seed]
    surface_skipped: int = 0
    failed_engines: int = 0


def query_engines(keywords: Sequence[Keyword | str], engines: Sequence[SearchClient],
                  concurrent: bool = True) -> QueryResult:
    """Look every keyword up in every engine; one in-flight request per engine."""
    if not engines:
        raise ValueError("at least one search engine is required")
    terms = [kw.term if isinstance(kw, Keyword) else kw for kw in keywords]

    def run(engine):
        hits, errors = [], 0
        for term in terms:
            try:
                hits.extend((term, url) for url in engine.search(term))
            except EngineError as exc:
                log.warning("engine %s failed on %r: %s", getattr(engine, "name", engine), term, exc)
                errors += 1
        return hits, errors

    if concurrent and len(engines) > 1:
        with ThreadPoolExecutor(max_workers=len(engines)) as pool:
            outcomes = list(pool.map(run, engines))
    else:
        outcomes = [run(e) for e in engines]

    hits = sorted(h for hs, _ in outcomes for h in hs)
    provenance: dict[str, set[str]] = {}
    addresses: dict[str, OnionAddress] = {}
    surface = 0
    for term, url in hits:
        try:
            addr = normalize_url(url)
        except ValueError:
            continue
        if isinstance(addr, Surface):
            surface += 1
            continue
        addresses[addr.host] = addr
        provenance.setdefault(addr.host, set()).add(term)
    if surface:
        log.warning("discarded %d surface results", surface)
    seeds = [Seed(addresses[h], frozenset(provenance[h])) for h in sorted(addresses)]
    return QueryResult(seeds, surface, sum(e > 0 for _, e in outcomes))


def merge_seeds(auto: Sequence[Seed], manual: Sequence[str]) -> list[Seed]:
    """Union by normalized host; manual entries are tagged ``manual``.

    Manual surface URLs are kept (the crawler fetches them once); automatic
    seeds keep their order, new manual hosts follow in input order.
    """
    merged: dict[str, tuple[OnionAddress | Surface, set[str]]] = {}
    for seed in auto:
        entry = merged.setdefault(seed.host, (seed.url, set()))
        entry[1].update(seed.provenance)
    for raw in manual:
        if not raw.strip():
            continue
        addr = normalize_url(raw)
        entry = merged.setdefault(addr.host, (addr, set()))
        entry[1].add(MANUAL)
    return [Seed(url, frozenset(tags)) for url, tags in merged.values()]


def save_seeds(seeds: Sequence[Seed], path: str | Path) -> None:
    """One seed per line: ``host<TAB>tag,tag``."""
    lines = [f"{s.host}\t{','.join(sorted(s.provenance))}" for s in seeds]
    Path(path).write_text("".join(ln + "\n" for ln in lines), encoding="utf-8")


def load_seeds(path: str | Path) -> list[Seed]:
    """Read a seed file; plain URL lines count as manual seeds."""
    seeds = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        raw, _, tags = line.partition("\t")
        provenance = frozenset(t for t in tags.split(",") if t) or frozenset({MANUAL})
        seeds.append(Seed(normalize_url(raw), provenance))
    return seeds
