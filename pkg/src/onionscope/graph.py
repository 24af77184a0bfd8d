"""Mirror-collapsed page graph, weakly connected components and seed ablation.

Nodes are cluster representatives; a link from any member of a cluster
becomes an edge from its representative. Link targets that were never
crawled become ``dangling`` nodes so unreachable seeds still show up as
components of order one.
"""
from __future__ import annotations

import csv
import heapq
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import CrawlState, LinkClass, PageRecord, Surface, normalize_url

__all__ = [
    "PageNode", "PageGraph", "Component", "SubgraphReport", "DanglingLink", "UnknownTag",
    "build_graph", "weakly_connected_components", "reachable", "seed_ablation", "set_difference",
    "ContributionTable", "contribution_table", "write_edge_list", "write_node_csv", "read_edge_list",
    "NODE_COLUMNS", "ALL_KEYWORDS", "MANUAL",
]

log = logging.getLogger(__name__)

MANUAL = "manual"
ALL_KEYWORDS = "*"
NODE_COLUMNS = ["Host", "Title", "Language", "Surface", "Depth", "Timestamp", "Category", "Has_Mirror",
                "Mirrors", "Status"]


class DanglingLink(UserWarning):
    pass


class UnknownTag(KeyError):
    pass


@dataclass
class PageNode:
    host: str
    title: str = ""
    language: str = "und"
    surface: bool = False
    depth: int | None = None
    timestamps: list[str] = field(default_factory=list)
    category: str = ""
    mirrors: list[str] = field(default_factory=list)
    status: str = "fetched"   # fetched | unreachable | pending | dangling

    @property
    def has_mirror(self) -> bool:
        return bool(self.mirrors)


@dataclass
class PageGraph:
    nodes: dict[str, PageNode] = field(default_factory=dict)
    adjacency: dict[str, set[str]] = field(default_factory=dict)

    def add_node(self, node: PageNode) -> None:
        self.nodes[node.host] = node
        self.adjacency.setdefault(node.host, set())

    def add_edge(self, u: str, v: str) -> bool:
        if u == v:
            return False
        if v in self.adjacency[u]:
            return False
        self.adjacency[u].add(v)
        return True

    @property
    def edges(self) -> list[tuple[str, str]]:
        return sorted((u, v) for u, targets in self.adjacency.items() for v in targets)

    def successors(self, u: str) -> set[str]:
        return self.adjacency.get(u, set())

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(t) for t in self.adjacency.values())


def _representatives(records: Sequence[PageRecord], clusters: Mapping[str, Sequence[str]] | None) -> dict[str, str]:
    rep_of: dict[str, str] = {}
    if clusters:
        for rep, mirrors in clusters.items():
            rep_of[rep] = rep
            for m in mirrors:
                rep_of[m] = rep
    for r in records:
        rep_of.setdefault(r.url, r.url)
    return rep_of


def _status(record: PageRecord | None) -> str:
    if record is None:
        return "dangling"
    return {CrawlState.FETCHED: "fetched", CrawlState.UNREACHABLE: "unreachable",
            CrawlState.PENDING: "pending"}[record.status.state]


def build_graph(records: Sequence[PageRecord], clusters: Mapping[str, Sequence[str]] | None = None,
                categories: Mapping[str, str] | None = None) -> PageGraph:
    """Collapse mirrors onto their representatives and wire up external onion links.

    ``clusters`` maps each representative host to its mirrors (the second
    value returned by ``cluster_mirrors``); records missing from it stand
    alone. Surface-web records are not nodes, they only mark their onion
    targets as surface-linked and as depth-one.
    """
    graph = PageGraph()
    by_host = {r.url: r for r in records}
    rep_of = _representatives(records, clusters)
    onion = [r for r in records if not isinstance(r.address, Surface)]
    categories = categories or {}

    for r in onion:
        if rep_of[r.url] != r.url:
            continue
        node = PageNode(
            host=r.url,
            title=r.metadata.get("title", ""),
            language=r.languages[0] if r.languages else "und",
            timestamps=list(r.timestamps),
            category=categories.get(r.url, ""),
            mirrors=list(clusters.get(r.url, ())) if clusters else [],
            status=_status(r),
        )
        graph.add_node(node)

    seeds: dict[str, int] = {}
    dangling: list[tuple[str, str]] = []
    for r in records:
        surface = isinstance(r.address, Surface)
        if r.is_seed and not surface:
            seeds[rep_of[r.url]] = 0
        for url, cls in r.link_list:
            if cls is not LinkClass.EXTERNAL_ONION:
                continue
            target = rep_of.get(url, url)
            if target not in graph.nodes:
                dangling.append((r.url, url))
                graph.add_node(PageNode(host=target, status=_status(by_host.get(target)),
                                        category=categories.get(target, "")))
                rep_of[url] = target
            if surface:
                graph.nodes[target].surface = True
                if r.is_seed:
                    seeds.setdefault(target, 1)
                continue
            graph.add_edge(rep_of[r.url], target)
    for src, dst in dangling:
        log.warning("dangling link %s -> %s (target never crawled)", src, dst)
    for host, depth in _multi_source_bfs(graph, seeds).items():
        graph.nodes[host].depth = depth
    return graph


def _multi_source_bfs(graph: PageGraph, sources: Mapping[str, int]) -> dict[str, int]:
    """Shortest unit-edge distance from sources that start at their own offsets."""
    dist: dict[str, int] = {}
    heap = [(d, h) for h, d in sources.items() if h in graph.nodes]
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if u in dist:
            continue
        dist[u] = d
        for v in graph.successors(u):
            if v not in dist:
                heapq.heappush(heap, (d + 1, v))
    return dist


# -- components ---------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    nodes: tuple[str, ...]
    n_edges: int
    n_surface: int

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


@dataclass
class SubgraphReport:
    components: list[Component]
    n_nodes: int
    n_edges: int
    n_surface: int

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def order_one(self) -> int:
        return sum(c.n_nodes == 1 for c in self.components)

    def rows(self, top: int = 3) -> list[list]:
        out = [[f"Full network ({self.n_components} subgraphs)", self.n_nodes, self.n_edges, self.n_surface]]
        for i, c in enumerate(self.components[:top], 1):
            out.append([f"Subgraph {i}", c.n_nodes, c.n_edges, c.n_surface])
        out.append([f"Subgraphs of order 1", self.order_one, 0, sum(
            c.n_surface for c in self.components if c.n_nodes == 1)])
        return out


class _UnionFind:
    def __init__(self, items: Iterable[str]):
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def weakly_connected_components(graph: PageGraph) -> SubgraphReport:
    uf = _UnionFind(graph.nodes)
    for u, v in graph.edges:
        uf.union(u, v)
    members: dict[str, list[str]] = {}
    for host in graph.nodes:
        members.setdefault(uf.find(host), []).append(host)
    edge_count: dict[str, int] = {}
    for u, _ in graph.edges:
        root = uf.find(u)
        edge_count[root] = edge_count.get(root, 0) + 1
    comps = [
        Component(tuple(sorted(hosts)), edge_count.get(root, 0), sum(graph.nodes[h].surface for h in hosts))
        for root, hosts in members.items()
    ]
    comps.sort(key=lambda c: (-c.n_nodes, c.nodes[0]))
    return SubgraphReport(comps, len(graph), graph.n_edges, sum(n.surface for n in graph.nodes.values()))


# -- seed ablation --------------------------------------------------------------

def reachable(graph: PageGraph, sources: Iterable[str]) -> frozenset[str]:
    """Nodes reachable along directed edges from ``sources`` (sources included)."""
    seen = {s for s in sources if s in graph.nodes}
    frontier = deque(seen)
    while frontier:
        u = frontier.popleft()
        for v in graph.successors(u):
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return frozenset(seen)


def _seed_host(seed) -> str:
    if isinstance(seed, str):
        return normalize_url(seed).host
    return seed.host


def _seed_nodes(graph: PageGraph, seeds, tag: str, rep_of: Mapping[str, str] | None) -> list[str]:
    known = set()
    for s in seeds:
        known |= set(s.provenance)
    if tag != ALL_KEYWORDS and tag not in known:
        raise UnknownTag(tag)
    out = []
    for s in seeds:
        tags = s.provenance
        hit = bool(tags - {MANUAL}) if tag == ALL_KEYWORDS else tag in tags
        if hit:
            host = _seed_host(s)
            out.append(rep_of.get(host, host) if rep_of else host)
    return out


def seed_ablation(graph: PageGraph, seeds, tag: str, rep_of: Mapping[str, str] | None = None) -> frozenset[str]:
    """Nodes reachable from the seeds carrying ``tag``.

    ``tag="manual"`` gives MSS, a keyword gives KS_k and ``ALL_KEYWORDS``
    gives AKS (every seed carrying at least one non-manual tag).
    """
    return reachable(graph, _seed_nodes(graph, seeds, tag, rep_of))


def set_difference(ks: frozenset[str], mss: frozenset[str]) -> frozenset[str]:
    return frozenset(ks - mss)


@dataclass
class ContributionTable:
    keywords: list[str]
    categories: list[str]
    cells: dict[str, dict[str, float]]   # row -> column -> percent of graph nodes
    n_nodes: int

    TOTAL = "TCC"
    ALL = "AKS"

    def to_rows(self) -> list[list]:
        header = [""] + self.keywords + [self.TOTAL]
        rows = [header]
        for row in self.categories + [self.ALL]:
            rows.append([row] + [round(self.cells[row][c], 4) for c in self.keywords + [self.TOTAL]])
        return rows


def contribution_table(graph: PageGraph, seeds, keywords: Sequence[str] | None = None,
                       rep_of: Mapping[str, str] | None = None) -> ContributionTable:
    """Share of graph nodes that each keyword adds over the manual seeds.

    Cells are non-accumulative: a node reached by several keywords counts for
    each of them. Category rows restrict SD to nodes of that category; the
    total column uses the all-keywords subgraph.
    """
    if keywords is None:
        tags = set()
        for s in seeds:
            tags |= set(s.provenance)
        keywords = sorted(tags - {MANUAL})
    try:
        mss = seed_ablation(graph, seeds, MANUAL, rep_of)
    except UnknownTag:
        mss = frozenset()
    n = len(graph) or 1
    sd = {k: set_difference(seed_ablation(graph, seeds, k, rep_of), mss) for k in keywords}
    sd_all = set_difference(seed_ablation(graph, seeds, ALL_KEYWORDS, rep_of), mss)
    categories = sorted({node.category for node in graph.nodes.values() if node.category})
    cells: dict[str, dict[str, float]] = {}
    for cat in categories:
        members = {h for h, node in graph.nodes.items() if node.category == cat}
        cells[cat] = {k: 100.0 * len(sd[k] & members) / n for k in keywords}
        cells[cat][ContributionTable.TOTAL] = 100.0 * len(sd_all & members) / n
    cells[ContributionTable.ALL] = {k: 100.0 * len(sd[k]) / n for k in keywords}
    cells[ContributionTable.ALL][ContributionTable.TOTAL] = 100.0 * len(sd_all) / n
    order = sorted(keywords, key=lambda k: (-cells[ContributionTable.ALL][k], k))
    return ContributionTable(order, categories, cells, len(graph))


# -- export -------------------------------------------------------------------------

def write_edge_list(graph: PageGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in graph.edges:
            fh.write(f"{u}\t{v}\n")


def read_edge_list(path: str | Path) -> list[tuple[str, str]]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            u, v = line.split("\t")
            out.append((u, v))
    return out


def write_node_csv(graph: PageGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(NODE_COLUMNS)
        for host in sorted(graph.nodes):
            n = graph.nodes[host]
            w.writerow([host, n.title, n.language, n.surface, "" if n.depth is None else n.depth,
                        ";".join(n.timestamps), n.category, n.has_mirror, ";".join(n.mirrors), n.status])
