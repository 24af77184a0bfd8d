"""Deterministic synthetic corpora: sites, mirrors, labels, topology and fixtures."""
from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .mutate import MutationKind, RegionMissing, mutate
from .templates import FAMILIES, THEMES, SiteSpec, random_host, render
from .vocab import CATEGORY_POOLS, LANGUAGES, load_dictionary

__all__ = [
    "InvalidSpec", "SynthSpec", "SynthPage", "SynthCorpus", "DEFAULT_MIX", "DEMO_KEYWORDS",
    "generate", "forum_titles", "benchmark_corpus", "text_corpus", "write_fixture", "write_training", "read_labels", "ORIGINAL", "EXACT",
]

ORIGINAL = "original"
EXACT = "exact"
# relative frequency of mirror modifications, most common first
DEFAULT_MIX = {
    MutationKind.SCHEME_CHANGE.value: 0.30,
    MutationKind.LINK_CHANGE.value: 0.22,
    MutationKind.CONTENT_CHANGE.value: 0.18,
    MutationKind.CURRENCY_CHANGE.value: 0.12,
    MutationKind.CRYPTOWALLET_CHANGE.value: 0.10,
    MutationKind.FIAT_CHANGE.value: 0.04,
    MutationKind.TRANSLATE.value: 0.04,
}
DEMO_KEYWORDS = ("drugs", "free", "hosting", "software", "hacking", "forum", "carding", "counter",
                 "services", "service")
TOPOLOGIES = ("chain", "tree", "clusters")


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    n_uniques: int = 100
    fanout: str = "geometric"          # "fixed" or "geometric"
    fanout_mean: float = 4.0
    exact_fraction: float = 0.5        # share of mirrors that are byte-identical copies
    mutation_mix: dict = field(default_factory=lambda: dict(DEFAULT_MIX))
    max_magnitude: float = 0.10
    topology: str = "tree"
    branching: int = 3
    cluster_size: int = 10
    volatility: float = 0.1            # share of hosts with transient failures
    unreachable: float = 0.0           # share of mirror hosts that never answer
    dead_links: float = 0.05           # chance that a page also links a host that does not exist
    extra_seeds: float = 0.2           # share of uniques that search engines also return
    dead_seeds: int = 3
    rng_seed: int = 42

    def validate(self) -> None:
        if self.n_uniques < 1:
            raise InvalidSpec("n_uniques must be >= 1")
        if self.fanout not in ("fixed", "geometric"):
            raise InvalidSpec(f"unknown fanout {self.fanout!r}")
        if self.fanout_mean < 0:
            raise InvalidSpec("fanout_mean must be >= 0")
        if self.topology not in TOPOLOGIES:
            raise InvalidSpec(f"unknown topology {self.topology!r}")
        if not 0 < self.max_magnitude <= 0.5:
            raise InvalidSpec("max_magnitude must lie in (0, 0.5]")
        unknown = set(self.mutation_mix) - {k.value for k in MutationKind}
        if unknown or not self.mutation_mix or min(self.mutation_mix.values()) < 0:
            raise InvalidSpec(f"bad mutation mix {self.mutation_mix}")
        for name in ("exact_fraction", "volatility", "unreachable", "dead_links", "extra_seeds"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidSpec(f"{name} must lie in [0, 1]")
        if self.branching < 1 or self.cluster_size < 1:
            raise InvalidSpec("branching and cluster_size must be >= 1")


@dataclass
class SynthPage:
    host: str
    html: str
    cluster: int
    kind: str                    # ORIGINAL, EXACT, or a mutation label such as "translate:de"
    category: str = ""
    template: str = ""

    @property
    def mutation_trail(self) -> list[str]:
        return [] if self.kind in (ORIGINAL, EXACT) else [self.kind]


@dataclass
class SynthCorpus:
    pages: list[SynthPage]
    edges: list[tuple[str, str]] = field(default_factory=list)
    schedules: dict[str, list[str]] = field(default_factory=dict)
    manual_seeds: list[str] = field(default_factory=list)
    engine_results: dict[str, list[str]] = field(default_factory=dict)
    pairs: list[tuple[str, str, bool]] = field(default_factory=list)

    @property
    def by_host(self) -> dict[str, SynthPage]:
        return {p.host: p for p in self.pages}

    @property
    def representatives(self) -> list[str]:
        return [p.host for p in self.pages if p.kind == ORIGINAL]

    def mirror_fraction(self) -> float:
        return sum(p.kind != ORIGINAL for p in self.pages) / len(self.pages) if self.pages else 0.0


def _fanout(rng: random.Random, spec: SynthSpec) -> int:
    if spec.fanout == "fixed":
        return int(round(spec.fanout_mean))
    p = 1.0 / (1.0 + spec.fanout_mean)
    k = 0
    while rng.random() > p:
        k += 1
    return k


def _pick_kind(rng: random.Random, mix: dict) -> str:
    kinds = sorted(mix)
    return rng.choices(kinds, weights=[mix[k] for k in kinds])[0]


def _mutant(html: str, rng: random.Random, mix: dict, max_magnitude: float) -> tuple[str, str]:
    """Draw mutation kinds from ``mix`` until one applies to this page."""
    mix = dict(mix)
    while mix:
        kind = _pick_kind(rng, mix)
        magnitude = rng.uniform(0.01, max_magnitude)
        lang = rng.choice(LANGUAGES)
        try:
            out = mutate(html, kind, magnitude, rng, lang=lang)
        except RegionMissing:
            del mix[kind]
            continue
        if out != html:
            label = f"{kind}:{lang}" if kind == MutationKind.TRANSLATE.value else kind
            return out, label
        del mix[kind]
    return html, EXACT


def _topology(spec: SynthSpec, n: int) -> tuple[list[tuple[int, int]], list[int]]:
    """Edges between unique indices and the root of every component."""
    if spec.topology == "chain":
        return [(i, i + 1) for i in range(n - 1)], [0]
    size = n if spec.topology == "tree" else spec.cluster_size
    edges, roots = [], []
    for base in range(0, n, size):
        members = list(range(base, min(base + size, n)))
        roots.append(members[0])
        for j, node in enumerate(members[1:], start=1):
            edges.append((members[(j - 1) // spec.branching], node))
    return edges, roots


def generate(spec: SynthSpec = SynthSpec()) -> SynthCorpus:
    spec.validate()
    rng = random.Random(spec.rng_seed)
    categories = sorted(CATEGORY_POOLS)
    n = spec.n_uniques
    hosts = [random_host(rng) for _ in range(n)]
    fan = [_fanout(rng, spec) for _ in range(n)]
    mirrors = [[random_host(rng) for _ in range(k)] for k in fan]
    edges, roots = _topology(spec, n)
    children: dict[int, list[int]] = {}
    for a, b in edges:
        children.setdefault(a, []).append(b)

    pages: list[SynthPage] = []
    dead: list[str] = []
    for i in range(n):
        partners = [hosts[c] for c in children.get(i, [])]
        if rng.random() < spec.dead_links:
            dead.append(random_host(rng))
            partners.append(dead[-1])
        site = SiteSpec(
            host=hosts[i], family=FAMILIES[rng.randrange(len(FAMILIES))], theme=rng.randrange(THEMES),
            category=rng.choice(categories), seed=rng.randrange(1 << 31),
            mirror_hosts=[hosts[i]] + mirrors[i] if mirrors[i] else [], partner_hosts=partners,
        )
        html = render(site)
        template = f"{site.family}:{site.theme}"
        category = CATEGORY_POOLS[site.category]
        pages.append(SynthPage(hosts[i], html, i, ORIGINAL, category, template))
        for m in mirrors[i]:
            if rng.random() < spec.exact_fraction:
                pages.append(SynthPage(m, html, i, EXACT, category, template))
            else:
                out, label = _mutant(html, rng, spec.mutation_mix, spec.max_magnitude)
                pages.append(SynthPage(m, out, i, label, category, template))

    schedules: dict[str, list[str]] = {}
    mirror_hosts = {p.host for p in pages if p.kind != ORIGINAL}
    for p in pages:
        if p.host in mirror_hosts and rng.random() < spec.unreachable:
            schedules[p.host] = [rng.choice(["timeout", "503"]) for _ in range(5)]
        elif rng.random() < spec.volatility:
            schedules[p.host] = [rng.choice(["timeout", "503"]) for _ in range(rng.randint(1, 3))] + ["ok"]

    # roots are manual seeds; search engines return the roots, some extra uniques and dead hosts
    manual = [hosts[r] for r in roots]
    engine_hosts = list(manual) + [h for h in hosts if h not in manual and rng.random() < spec.extra_seeds]
    engine_hosts += [random_host(rng) for _ in range(spec.dead_seeds)]
    engines: dict[str, list[str]] = {k: [] for k in DEMO_KEYWORDS}
    for h in engine_hosts:
        for term in rng.sample(DEMO_KEYWORDS, rng.randint(1, 2)):
            engines[term].append(f"http://{h}/")
    return SynthCorpus(
        pages=pages,
        edges=[(hosts[a], hosts[b]) for a, b in edges],
        schedules=schedules,
        manual_seeds=[f"http://{h}/" for h in manual],
        engine_results=engines,
    )


def benchmark_corpus(n_mirrors: int = 1000, n_distinct: int = 1000, n_bases: int = 200, seed: int = 7,
                     mutation_mix: dict | None = None, max_magnitude: float = 0.10,
                     same_template_share: float = 0.5) -> SynthCorpus:
    """Labeled pairs: base pages against their mutants, and pairs of unrelated bases.

    Half of the unrelated pairs share a template (family and theme), which
    is where bag-of-words baselines struggle.
    """
    if n_bases < 2 or n_mirrors < 0 or n_distinct < 0:
        raise InvalidSpec("need at least two bases and non-negative pair counts")
    rng = random.Random(seed)
    mix = mutation_mix or DEFAULT_MIX
    categories = sorted(CATEGORY_POOLS)
    bases: list[SynthPage] = []
    for i in range(n_bases):
        host = random_host(rng)
        site = SiteSpec(host, FAMILIES[i % len(FAMILIES)], (i // len(FAMILIES)) % THEMES,
                        rng.choice(categories), rng.randrange(1 << 31),
                        mirror_hosts=[host] + [random_host(rng) for _ in range(rng.randint(1, 4))],
                        partner_hosts=[random_host(rng) for _ in range(rng.randint(1, 5))])
        bases.append(SynthPage(host, render(site), i, ORIGINAL, CATEGORY_POOLS[site.category],
                               f"{site.family}:{site.theme}"))
    pages = list(bases)
    pairs: list[tuple[str, str, bool]] = []
    for j in range(n_mirrors):
        base = bases[j % n_bases]
        mix_j = {k: v for k, v in mix.items()}
        out, label = _mutant(base.html, rng, mix_j, max_magnitude)
        page = SynthPage(random_host(rng), out, base.cluster, label, base.category, base.template)
        pages.append(page)
        pairs.append((base.host, page.host, True))

    by_template: dict[str, list[SynthPage]] = {}
    for b in bases:
        by_template.setdefault(b.template, []).append(b)
    seen: set[tuple[str, str]] = set()
    n_same = int(round(n_distinct * same_template_share))
    attempts = 0
    while len(seen) < n_distinct:
        attempts += 1
        if attempts > 100 * max(n_distinct, 1):
            raise InvalidSpec("not enough bases for the requested number of distinct pairs")
        if len(seen) < n_same:
            group = rng.choice([g for g in by_template.values() if len(g) > 1])
            a, b = rng.sample(group, 2)
        else:
            a, b = rng.sample(bases, 2)
        key = tuple(sorted((a.host, b.host)))
        if key in seen:
            continue
        seen.add(key)
        pairs.append((a.host, b.host, False))
    return SynthCorpus(pages=pages, pairs=pairs)


def text_corpus(n_per_class: int = 200, noise: float = 0.2, length: int = 60,
                seed: int = 42) -> list[tuple[str, str]]:
    """Labeled documents: class-specific vocabulary plus a shared noise vocabulary."""
    rng = random.Random(seed)
    d = load_dictionary()
    shared = d.pool("gen")
    docs = []
    for group, label in sorted(CATEGORY_POOLS.items(), key=lambda kv: kv[1]):
        pool = d.pool(group)
        for _ in range(n_per_class):
            words = [rng.choice(shared) if rng.random() < noise else rng.choice(pool) for _ in range(length)]
            docs.append((" ".join(words), label))
    rng.shuffle(docs)
    return docs


def forum_titles(seed: int = 0) -> list[str]:
    """Underground-forum style thread titles in which the demo keywords dominate.

    Keyword ``i`` of ``DEMO_KEYWORDS`` appears in ``16 - i`` titles; the filler
    comes from the general vocabulary so it rarely repeats.
    """
    rng = random.Random(seed)
    filler = [w for w in load_dictionary().pool("gen") if w not in DEMO_KEYWORDS and "_" not in w]
    titles = []
    for i, kw in enumerate(DEMO_KEYWORDS):
        for _ in range(16 - i):
            words = rng.sample(filler, 3)
            words.insert(rng.randrange(4), kw)
            titles.append(" ".join(words).capitalize())
    rng.shuffle(titles)
    return titles


def write_fixture(corpus: SynthCorpus, out: str | Path) -> Path:
    """Write the fixture tree read by the crawler, the search-engine fixture and labels."""
    out = Path(out)
    root = out / "corpus"
    root.mkdir(parents=True, exist_ok=True)
    for p in corpus.pages:
        (root / p.host).mkdir(exist_ok=True)
        (root / p.host / "index.html").write_text(p.html, encoding="utf-8")
    for host, tokens in sorted(corpus.schedules.items()):
        (root / f"{host}.schedule").write_text(" ".join(tokens) + "\n", encoding="utf-8")
    with open(out / "labels.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["host", "cluster_id", "mutation_kind"])
        for p in corpus.pages:
            w.writerow([p.host, p.cluster, p.kind])
    with open(out / "categories.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["host", "category"])
        for p in corpus.pages:
            w.writerow([p.host, p.category])
    (out / "seeds.txt").write_text("".join(s + "\n" for s in corpus.manual_seeds), encoding="utf-8")
    engines = out / "engines"
    engines.mkdir(exist_ok=True)
    for term, urls in sorted(corpus.engine_results.items()):
        (engines / f"{term}.txt").write_text("".join(u + "\n" for u in urls), encoding="utf-8")
    (out / "edges.tsv").write_text("".join(f"{a}\t{b}\n" for a, b in corpus.edges), encoding="utf-8")
    (out / "titles.txt").write_text("\n".join(forum_titles()) + "\n", encoding="utf-8")
    if corpus.pairs:
        with open(out / "pairs.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["host_a", "host_b", "is_mirror"])
            for a, b, y in corpus.pairs:
                w.writerow([a, b, int(y)])
    return out


def write_training(docs: list[tuple[str, str]], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for text, label in docs:
            fh.write(json.dumps({"text": text, "label": label}, sort_keys=True) + "\n")
    return path


def read_labels(path: str | Path) -> list[tuple[str, int, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [(r["host"], int(r["cluster_id"]), r["mutation_kind"]) for r in csv.DictReader(fh)]
