import csv
import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from onionscope.corpus import CrawlState, CrawlStatus, LinkClass, PageRecord, normalize_url
from onionscope.graph import (ALL_KEYWORDS, MANUAL, NODE_COLUMNS, PageGraph, PageNode, UnknownTag, build_graph,
                              contribution_table, read_edge_list, reachable, seed_ablation, set_difference,
                              weakly_connected_components, write_edge_list, write_node_csv)
from onionscope.seeder import Seed
from conftest import v3

EXT = LinkClass.EXTERNAL_ONION


def rec(host, links=(), depth=1, state=CrawlState.FETCHED, surface_links=(), title=""):
    link_list = [(t, EXT) for t in links] + [(t, LinkClass.SURFACE) for t in surface_links]
    return PageRecord(url=host, link_list=link_list, depth=depth, metadata={"title": title} if title else {},
                      status=CrawlStatus(state, 1))


def seed(host, *tags):
    return Seed(normalize_url(host), frozenset(tags))


def random_graph(rng, n, p):
    g = PageGraph()
    hosts = [v3(i) for i in range(n)]
    for h in hosts:
        g.add_node(PageNode(h))
    m = int(p * n)
    for _ in range(m):
        g.add_edge(rng.choice(hosts), rng.choice(hosts))
    return g


def as_nx(g):
    d = nx.DiGraph()
    d.add_nodes_from(g.nodes)
    d.add_edges_from(g.edges)
    return d


def dfs(g, sources):
    # iterative DFS over the exported edge list, independent of the library's BFS
    adj = {}
    for u, v in g.edges:
        adj.setdefault(u, []).append(v)
    seen, stack = set(), [s for s in sources if s in g.nodes]
    while stack:
        u = stack.pop()
        if u not in seen:
            seen.add(u)
            stack.extend(adj.get(u, ()))
    return seen


# -- construction ----------------------------------------------------------------

def test_chain():
    s, a, b = v3(0), v3(1), v3(2)
    g = build_graph([rec(s, [a], depth=0), rec(a, [b]), rec(b, depth=2)])
    assert len(g) == 3 and g.n_edges == 2
    assert [g.nodes[h].depth for h in (s, a, b)] == [0, 1, 2]


def test_mirrors_collapse_to_single_edge():
    s, a, a2, b = v3(0), v3(1), v3(2), v3(3)
    records = [rec(s, [a, a2], depth=0), rec(a, [b]), rec(a2, [b]), rec(b, depth=2)]
    g = build_graph(records, {a: [a2]})
    assert a2 not in g.nodes
    assert g.edges == sorted([(s, a), (a, b)])
    assert g.nodes[a].has_mirror and g.nodes[a].mirrors == [a2]
    assert not g.nodes[b].has_mirror


def test_empty():
    g = build_graph([])
    assert len(g) == 0 and g.n_edges == 0
    assert weakly_connected_components(g).n_components == 0


def test_self_loops_and_parallel_edges_dropped():
    a, b = v3(1), v3(2)
    g = build_graph([rec(a, [a, b, b], depth=0), rec(b)])
    assert g.edges == [(a, b)]


def test_dangling_target_becomes_marked_node(caplog):
    a, ghost = v3(1), v3(99)
    with caplog.at_level("WARNING"):
        g = build_graph([rec(a, [ghost], depth=0)])
    assert g.nodes[ghost].status == "dangling"
    assert "dangling" in caplog.text


def test_unreachable_seed_is_order_one():
    a, b, dead = v3(1), v3(2), v3(3)
    g = build_graph([rec(a, [b], depth=0), rec(b), rec(dead, depth=0, state=CrawlState.UNREACHABLE)])
    rep = weakly_connected_components(g)
    assert rep.order_one == 1 and g.nodes[dead].status == "unreachable"


def test_surface_records_mark_targets():
    a, b = v3(1), v3(2)
    surface = rec("example.org", [a], depth=0)
    g = build_graph([surface, rec(a, [b]), rec(b)])
    assert "example.org" not in g.nodes
    assert g.nodes[a].surface and not g.nodes[b].surface
    assert (g.nodes[a].depth, g.nodes[b].depth) == (1, 2)


def test_node_features():
    a = v3(1)
    r = rec(a, depth=0, title="Market")
    r.languages = ["de"]
    r.add_timestamp(1.6e9)
    g = build_graph([r], categories={a: "Drugs"})
    n = g.nodes[a]
    assert (n.title, n.language, n.category, n.timestamps) == ("Market", "de", "Drugs", r.timestamps)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.integers(1, 80))
def test_depth_matches_bfs_oracle(s, n):
    rng = random.Random(s)
    hosts = [v3(i) for i in range(n)]
    links = {h: rng.sample(hosts, rng.randint(0, min(3, n))) for h in hosts}
    seeds = set(rng.sample(hosts, rng.randint(1, min(3, n))))
    records = [rec(h, links[h], depth=0 if h in seeds else 1) for h in hosts]
    g = build_graph(records)
    lengths = nx.multi_source_dijkstra_path_length(as_nx(g), seeds)
    assert {h: nd.depth for h, nd in g.nodes.items() if nd.depth is not None} == lengths


# -- components -------------------------------------------------------------------

def test_two_triangles():
    g = PageGraph()
    hosts = [v3(i) for i in range(6)]
    for h in hosts:
        g.add_node(PageNode(h))
    for tri in (hosts[:3], hosts[3:]):
        for i in range(3):
            g.add_edge(tri[i], tri[(i + 1) % 3])
    rep = weakly_connected_components(g)
    assert [(c.n_nodes, c.n_edges) for c in rep.components] == [(3, 3), (3, 3)]


def test_single_node():
    g = PageGraph()
    g.add_node(PageNode(v3(0)))
    rep = weakly_connected_components(g)
    assert rep.n_components == 1 and rep.order_one == 1


def test_report_rows():
    g = random_graph(random.Random(0), 50, 0.8)
    rep = weakly_connected_components(g)
    rows = rep.rows(top=3)
    assert rows[0][1:3] == [50, g.n_edges]
    assert rows[-1][1] == rep.order_one
    assert sum(c.n_nodes for c in rep.components) == len(g)
    assert [c.n_nodes for c in rep.components] == sorted((c.n_nodes for c in rep.components), reverse=True)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(1, 500), st.floats(0.1, 2.0))
def test_components_match_networkx(s, n, p):
    g = random_graph(random.Random(s), n, p)
    rep = weakly_connected_components(g)
    want = {frozenset(c) for c in nx.weakly_connected_components(as_nx(g))}
    assert {frozenset(c.nodes) for c in rep.components} == want
    assert sum(c.n_edges for c in rep.components) == g.n_edges


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(2, 60))
def test_collapsing_never_disconnects(s, n):
    rng = random.Random(s)
    hosts = [v3(i) for i in range(n)]
    links = {h: rng.sample(hosts, rng.randint(0, min(3, n))) for h in hosts}
    records = [rec(h, links[h], depth=0 if i == 0 else 1) for i, h in enumerate(hosts)]
    reps = rng.sample(hosts, rng.randint(1, n))
    clusters = {r: [] for r in reps}
    rep_of = {r: r for r in reps}
    for h in hosts:
        if h not in rep_of:
            r = rng.choice(reps)
            clusters[r].append(h)
            rep_of[h] = r
    before = weakly_connected_components(build_graph(records))
    after = weakly_connected_components(build_graph(records, clusters))
    comp_after = {h: i for i, c in enumerate(after.components) for h in c.nodes}
    for c in before.components:
        assert len({comp_after[rep_of[h]] for h in c.nodes}) == 1
    assert set(comp_after) == set(reps)


# -- seed ablation ---------------------------------------------------------------

def _ablation_world():
    # manual -> m1 -> m2 ; kw "drugs" seeds d -> m1 ; kw "hosting" seeds m2 (already manual-reached)
    m, m1, m2, d, x = (v3(i) for i in range(5))
    g = PageGraph()
    for h in (m, m1, m2, d, x):
        g.add_node(PageNode(h, category="Drugs" if h in (d, x) else "Forum"))
    g.add_edge(m, m1), g.add_edge(m1, m2), g.add_edge(d, m1), g.add_edge(d, x)
    seeds = [seed(m, MANUAL), seed(d, "drugs"), seed(m2, "hosting", MANUAL)]
    return g, seeds, (m, m1, m2, d, x)


def test_keyword_reaching_only_manual_nodes_contributes_nothing():
    g, seeds, (m, m1, m2, d, x) = _ablation_world()
    mss = seed_ablation(g, seeds, MANUAL)
    assert mss == {m, m1, m2}
    assert set_difference(seed_ablation(g, seeds, "hosting"), mss) == frozenset()
    assert set_difference(seed_ablation(g, seeds, "drugs"), mss) == {d, x}
    table = contribution_table(g, seeds)
    assert table.cells["AKS"]["hosting"] == 0.0
    assert table.cells["AKS"]["drugs"] == pytest.approx(40.0)
    assert table.cells["Drugs"]["drugs"] == pytest.approx(40.0)
    assert table.cells["Forum"]["drugs"] == 0.0
    assert table.cells["AKS"]["TCC"] == pytest.approx(40.0)
    assert table.to_rows()[0] == ["", "drugs", "hosting", "TCC"]


def test_mss_subset_of_aks():
    g, _, (m, m1, m2, d, x) = _ablation_world()
    seeds = [seed(m, MANUAL, "drugs"), seed(d, "drugs")]
    mss, aks = seed_ablation(g, seeds, MANUAL), seed_ablation(g, seeds, ALL_KEYWORDS)
    assert mss <= aks
    assert set_difference(aks, mss) == aks - mss
    assert set_difference(mss, aks) == frozenset()


def test_unknown_tag():
    g, seeds, _ = _ablation_world()
    with pytest.raises(UnknownTag):
        seed_ablation(g, seeds, "weapons")


def test_ablation_uses_representatives():
    g, seeds, (m, m1, m2, d, x) = _ablation_world()
    mirror = v3(50)
    got = seed_ablation(g, [seed(mirror, "market")], "market", rep_of={mirror: d})
    assert got == {d, m1, m2, x}


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(1, 300))
def test_ablation_matches_dfs_oracle(s, n):
    rng = random.Random(s)
    g = random_graph(rng, n, 1.2)
    hosts = sorted(g.nodes)
    tags = ["a", "b", "c", MANUAL]
    seeds = [seed(h, *rng.sample(tags, rng.randint(1, 2))) for h in rng.sample(hosts, min(n, 8))]
    mss = seed_ablation(g, seeds, MANUAL) if any(MANUAL in x.provenance for x in seeds) else frozenset()
    assert mss == frozenset(dfs(g, [x.host for x in seeds if MANUAL in x.provenance]))
    for t in {t for x in seeds for t in x.provenance} - {MANUAL}:
        ks = seed_ablation(g, seeds, t)
        assert ks == frozenset(dfs(g, [x.host for x in seeds if t in x.provenance]))
        sd = set_difference(ks, mss)
        assert not sd & mss
        assert ks <= seed_ablation(g, seeds, ALL_KEYWORDS)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(1, 200))
def test_reachability_monotone(s, n):
    rng = random.Random(s)
    g = random_graph(rng, n, 1.0)
    hosts = sorted(g.nodes)
    small = rng.sample(hosts, rng.randint(0, n))
    big = small + rng.sample(hosts, rng.randint(0, n))
    assert reachable(g, small) <= reachable(g, big)


# -- export --------------------------------------------------------------------------

def test_edge_list_roundtrip(tmp_path):
    g = random_graph(random.Random(1), 30, 1.5)
    write_edge_list(g, tmp_path / "edges.tsv")
    assert read_edge_list(tmp_path / "edges.tsv") == g.edges


def test_node_csv_columns(tmp_path):
    s, a, a2 = v3(0), v3(1), v3(2)
    g = build_graph([rec(s, [a], depth=0, title="Home"), rec(a), rec(a2)], {a: [a2]})
    write_node_csv(g, tmp_path / "nodes.csv")
    with open(tmp_path / "nodes.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == NODE_COLUMNS
    by_host = {r["Host"]: r for r in rows}
    assert by_host[a]["Has_Mirror"] == "True" and by_host[a]["Mirrors"] == a2
    assert by_host[s]["Title"] == "Home" and by_host[s]["Depth"] == "0"
