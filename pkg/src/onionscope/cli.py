"""Command-line entry point: one subcommand per pipeline stage.

Every subcommand writes only into its ``--out`` directory and appends one
line to ``<out>/manifest.jsonl`` with the effective-config hash and the
hashes of its inputs and outputs. Paths default to fixed locations below
``--workdir`` so the stages chain without arguments.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import configparser
import copy
import csv
import hashlib
import json
import logging
import random
import sys
import time
from dataclasses import asdict, fields
from pathlib import Path
from typing import Callable

from . import __version__

log = logging.getLogger("onionscope")

DEFAULTS: dict[str, dict] = {
    "paths": {"workdir": "."},
    "seed": {"keywords": 10},
    "crawl": {"workers": 4, "timeout": 30.0, "max_attempts": 5, "transport": "fixture",
              "proxy_endpoint": "127.0.0.1:9050"},
    "mirror": {"scheme_weight": 0.3, "content_weight": 0.7, "threshold": 0.90},
    "classify": {"penalty": "l1", "C": 1.0, "l1_ratio": 0.5, "cap": 200, "folds": 10, "beta": 1.0,
                 "holdout": 0.2, "mode": "standard", "multi_class": "multinomial", "max_iter": 1000,
                 "grid": True, "rng_seed": 42},
    "synth": {"rng_seed": 42, "n_uniques": 100, "text_per_class": 200},
}


class UsageError(Exception):
    pass


# -- config ---------------------------------------------------------------------------

def _coerce(value: str, default):
    if isinstance(default, bool):
        low = value.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value.strip()


def load_config(path: str | None) -> dict:
    """Defaults overlaid with an INI file (sections mirror ``DEFAULTS``)."""
    cfg = copy.deepcopy(DEFAULTS)
    if not path:
        return cfg
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(path, encoding="utf-8"):
        raise UsageError(f"--config: cannot read {path}")
    for section in parser.sections():
        if section not in cfg:
            raise UsageError(f"--config: unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in cfg[section]:
                raise UsageError(f"--config: unknown key {section}.{key}")
            try:
                cfg[section][key] = _coerce(value, DEFAULTS[section][key])
            except ValueError as exc:
                raise UsageError(f"--config: {section}.{key}: {exc}") from exc
    return cfg


def config_hash(cfg: dict) -> str:
    """Hash of every setting except locations, so relocated runs compare equal."""
    settings = {k: v for k, v in cfg.items() if k != "paths"}
    return hashlib.sha256(json.dumps(settings, sort_keys=True).encode("utf-8")).hexdigest()


def _log_overrides(cfg: dict) -> None:
    for section, values in cfg.items():
        for key, value in values.items():
            if DEFAULTS[section][key] != value:
                log.info("config override %s.%s = %r (default %r)", section, key, value, DEFAULTS[section][key])


def parse_weights(text: str) -> tuple[float, float]:
    """``W_s,W_c`` with non-negative parts summing to one."""
    try:
        ws, wc = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    if ws < 0 or wc < 0 or abs(ws + wc - 1.0) > 1e-9:
        raise argparse.ArgumentTypeError(f"weights must be non-negative and sum to 1, got {ws}+{wc}")
    return ws, wc


def _fraction(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


# -- manifest ---------------------------------------------------------------------------

def _file_hash(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _tree_hash(path: Path) -> str:
    """Files are hashed with their relative path; directories recursively."""
    if path.is_file():
        return _file_hash(path)
    h = hashlib.sha256()
    for f in sorted(p for p in path.rglob("*") if p.is_file() and p.name != "manifest.jsonl"):
        h.update(f.relative_to(path).as_posix().encode("utf-8") + b"\0" + _file_hash(f).encode("ascii"))
    return h.hexdigest()


def write_manifest(out: Path, command: str, cfg: dict, params: dict, inputs: dict[str, Path],
                   outputs: list[str]) -> dict:
    entry = {
        "command": command,
        "version": __version__,
        "config_hash": config_hash(cfg),
        "params": params,
        "inputs": {k: _tree_hash(Path(v)) for k, v in sorted(inputs.items()) if v is not None},
        "outputs": {name: _tree_hash(out / name) for name in sorted(outputs)},
    }
    with open(out / "manifest.jsonl", "a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return entry


# -- helpers -------------------------------------------------------------------------------

def _work(cfg: dict, *parts: str) -> Path:
    return Path(cfg["paths"]["workdir"]).joinpath(*parts)


def _resolve(value: str | None, default: Path, inner: str | None = None) -> Path:
    """An explicit path wins; a directory is resolved to its ``inner`` file."""
    path = Path(value) if value else default
    if inner and path.is_dir():
        path = path / inner
    return path


def _require(path: Path, flag: str) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"{flag}: {path} does not exist")
    return path


def _out_dir(args, cfg: dict, stage: str) -> Path:
    out = Path(args.out) if args.out else _work(cfg, stage)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _mirror_weights(args, cfg: dict):
    from .mirror.detect import MirrorWeights

    ws, wc = args.weights if args.weights else (cfg["mirror"]["scheme_weight"], cfg["mirror"]["content_weight"])
    threshold = args.threshold if args.threshold is not None else cfg["mirror"]["threshold"]
    cfg["mirror"].update(scheme_weight=ws, content_weight=wc, threshold=threshold)
    try:
        return MirrorWeights(ws, wc, threshold)
    except ValueError as exc:
        raise UsageError(f"--weights/--threshold: {exc}") from exc


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def save_clusters(mirror_map: dict[str, list[str]], path: Path) -> None:
    """``representative<TAB>mirror,mirror`` per unique page, in crawl order."""
    path.write_text("".join(f"{rep}\t{','.join(m)}\n" for rep, m in mirror_map.items()), encoding="utf-8")


def load_clusters(path: Path) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rep, _, mirrors = line.partition("\t")
            out[rep] = [m for m in mirrors.split(",") if m]
    return out


def _load_predictions(path: Path | None) -> dict[str, str]:
    if path is None or not path.exists():
        return {}
    return {r["host"]: r["category"] for r in _read_csv(path)}


# -- subcommands -------------------------------------------------------------------------

def cmd_synthgen(args, cfg):
    from .synth import SynthSpec, benchmark_corpus, generate, text_corpus, write_fixture, write_training

    out = _out_dir(args, cfg, "synth")
    seed = args.rng_seed if args.rng_seed is not None else cfg["synth"]["rng_seed"]
    cfg["synth"]["rng_seed"] = seed
    params: dict = {"kind": args.kind, "rng_seed": seed}
    if args.kind == "benchmark":
        corpus = benchmark_corpus(n_mirrors=args.n_mirrors, n_distinct=args.n_distinct, seed=seed)
        params.update(n_mirrors=args.n_mirrors, n_distinct=args.n_distinct)
    else:
        overrides = {}
        if args.spec and args.spec != "default":
            overrides = json.loads(Path(_require(Path(args.spec), "--spec")).read_text(encoding="utf-8"))
            unknown = set(overrides) - {f.name for f in fields(SynthSpec)}
            if unknown:
                raise UsageError(f"--spec: unknown fields {sorted(unknown)}")
        overrides.setdefault("rng_seed", seed)
        n = args.n_uniques if args.n_uniques is not None else overrides.get("n_uniques", cfg["synth"]["n_uniques"])
        overrides["n_uniques"] = n
        if args.topology:
            overrides["topology"] = args.topology
        spec = SynthSpec(**overrides)
        spec.validate()
        corpus = generate(spec)
        params.update(asdict(spec))
    write_fixture(corpus, out)
    per_class = cfg["synth"]["text_per_class"]
    write_training(text_corpus(n_per_class=per_class, seed=seed), out / "training.jsonl")
    outputs = sorted(p.name for p in out.iterdir() if p.name != "manifest.jsonl")
    write_manifest(out, "synthgen", cfg, params, {}, outputs)
    print(f"synthgen: {len(corpus.pages)} pages, mirror fraction {corpus.mirror_fraction():.3f} -> {out}")


def cmd_seed(args, cfg):
    from .seeder import (FixtureSearchClient, HttpSearchClient, extract_keywords, merge_seeds, query_engines,
                         save_seeds)

    out = _out_dir(args, cfg, "seed")
    titles = _require(_resolve(args.titles, _work(cfg, "synth", "titles.txt")), "--titles")
    engines_dirs = args.engines or [str(_work(cfg, "synth", "engines"))]
    manual = _resolve(args.manual, _work(cfg, "synth", "seeds.txt"))
    k = args.k if args.k is not None else cfg["seed"]["keywords"]
    cfg["seed"]["keywords"] = k
    lines = [l for l in titles.read_text(encoding="utf-8").splitlines() if l.strip()]
    keywords = extract_keywords(lines, k)
    clients = [FixtureSearchClient(_require(Path(d), "--engines"), Path(d).name) for d in engines_dirs]
    for spec in args.engine_url or []:
        name, _, template = spec.partition("=")
        if not template:
            raise UsageError(f"--engine-url: expected NAME=URL_TEMPLATE, got {spec!r}")
        clients.append(HttpSearchClient(name, template, proxy=cfg["crawl"]["proxy_endpoint"]))
    result = query_engines(keywords, clients)
    manual_lines = manual.read_text(encoding="utf-8").splitlines() if manual.exists() else []
    seeds = merge_seeds(result.seeds, manual_lines)
    save_seeds(seeds, out / "seeds.tsv")
    _write_csv(out / "keywords.csv", ["term", "score"], [[kw.term, f"{kw.score:.12g}"] for kw in keywords])
    write_manifest(out, "seed", cfg, {"k": k}, {"titles": titles, "manual": manual if manual.exists() else None,
                                              **{f"engines:{Path(d).name}": Path(d) for d in engines_dirs}},
                   ["seeds.tsv", "keywords.csv"])
    print(f"seed: {len(keywords)} keywords, {len(seeds)} seeds ({result.failed_engines} engines failed) -> {out}")


def _default_seeds(cfg) -> Path:
    auto = _work(cfg, "seed", "seeds.tsv")
    return auto if auto.exists() else _work(cfg, "synth", "seeds.txt")


def cmd_crawl(args, cfg):
    from .corpus import load_snapshot, save_snapshot
    from .scheduler import CrawlConfig, FixtureTransport, ProxyTransport, TransportFatal, run_crawl
    from .seeder import load_seeds

    out = _out_dir(args, cfg, "crawl")
    c = cfg["crawl"]
    for key in ("workers", "timeout", "max_attempts", "transport", "proxy_endpoint"):
        value = getattr(args, key)
        if value is not None:
            c[key] = value
    seeds_path = _require(_resolve(args.seeds, _default_seeds(cfg), "seeds.tsv"), "--seeds")
    seeds = load_seeds(seeds_path)
    inputs: dict[str, Path | None] = {"seeds": seeds_path}
    clock = None
    if c["transport"] == "fixture":
        corpus = _require(_resolve(args.corpus, _work(cfg, "synth", "corpus")), "--corpus")
        transport = FixtureTransport(corpus)
        inputs["corpus"] = corpus
    elif c["transport"] == "proxy":
        transport = ProxyTransport(c["proxy_endpoint"])
        clock = time.time
    else:
        raise UsageError(f"--transport: unknown transport {c['transport']!r}")
    resume = load_snapshot(_require(Path(args.resume), "--resume")) if args.resume else None
    config = CrawlConfig(workers=c["workers"], timeout=c["timeout"], max_attempts=c["max_attempts"])
    try:
        result = run_crawl(seeds, transport, workers=c["workers"], config=config, clock=clock, resume_from=resume)
    except TransportFatal as exc:
        save_snapshot(exc.records, out / "snapshot.partial.jsonl")
        raise RuntimeError(f"transport failed: {exc}; resumable snapshot in {out / 'snapshot.partial.jsonl'}")
    save_snapshot(result.records, out / "snapshot.jsonl")
    from .corpus import CrawlState
    stats = {"records": len(result.records), "windows": result.windows, "fetches": result.fetches,
             **{s.value: result.count(s) for s in CrawlState}}
    (out / "crawl.json").write_text(json.dumps(stats, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    write_manifest(out, "crawl", cfg, {"resume": bool(resume)}, inputs, ["snapshot.jsonl", "crawl.json"])
    print(f"crawl: {stats['fetched']} fetched, {stats['unreachable']} unreachable, "
          f"{result.windows} windows -> {out}")


def _snapshot_path(args, cfg) -> Path:
    return _require(_resolve(args.snapshot, _work(cfg, "crawl", "snapshot.jsonl"), "snapshot.jsonl"), "--snapshot")


def cmd_dedup(args, cfg):
    from .corpus import load_snapshot
    from .mirror.detect import cluster_mirrors, fingerprint

    weights = _mirror_weights(args, cfg)
    out = _out_dir(args, cfg, "dedup")
    snap = _snapshot_path(args, cfg)
    records = [r for r in load_snapshot(snap) if r.html]
    uniques, mirror_map = cluster_mirrors([fingerprint(r) for r in records], weights)
    save_clusters(mirror_map, out / "clusters.tsv")
    n_mirrors = sum(len(m) for m in mirror_map.values())
    summary = {"pages": len(records), "uniques": len(uniques), "mirrors": n_mirrors,
               "mirror_fraction": n_mirrors / len(records) if records else 0.0}
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    write_manifest(out, "dedup", cfg, {}, {"snapshot": snap}, ["clusters.tsv", "summary.json"])
    print(f"dedup: {summary['uniques']} unique, {n_mirrors} mirrors "
          f"({100 * summary['mirror_fraction']:.1f}%) -> {out}")


def _build(args, cfg, categories: dict[str, str] | None = None):
    from .corpus import load_snapshot
    from .graph import build_graph
    from .seeder import load_seeds

    snap = _snapshot_path(args, cfg)
    clusters_path = _require(_resolve(args.clusters, _work(cfg, "dedup", "clusters.tsv"), "clusters.tsv"),
                             "--clusters")
    seeds_path = _resolve(args.seeds, _default_seeds(cfg), "seeds.tsv")
    clusters = load_clusters(clusters_path)
    graph = build_graph(load_snapshot(snap), clusters, categories)
    seeds = load_seeds(seeds_path) if seeds_path.exists() else []
    rep_of = {m: rep for rep, ms in clusters.items() for m in ms}
    inputs = {"snapshot": snap, "clusters": clusters_path, "seeds": seeds_path if seeds_path.exists() else None}
    return graph, seeds, rep_of, inputs


def cmd_graph(args, cfg):
    from .graph import contribution_table, weakly_connected_components, write_edge_list, write_node_csv

    out = _out_dir(args, cfg, "graph")
    graph, seeds, rep_of, inputs = _build(args, cfg)
    report = weakly_connected_components(graph)
    write_edge_list(graph, out / "edges.tsv")
    write_node_csv(graph, out / "nodes.csv")
    _write_csv(out / "components.csv", ["Subgraph", "Nodes", "Edges", "LS"], report.rows(top=3))
    outputs = ["edges.tsv", "nodes.csv", "components.csv"]
    if seeds:
        table = contribution_table(graph, seeds, rep_of=rep_of)
        rows = table.to_rows()
        _write_csv(out / "contribution.csv", rows[0], rows[1:])
        outputs.append("contribution.csv")
    write_manifest(out, "graph", cfg, {}, inputs, outputs)
    for row in report.rows(top=3):
        print("graph: " + " | ".join(str(x) for x in row))


def _classifier_config(args, cfg):
    from .classify import ClassifierConfig

    c = cfg["classify"]
    for key in ("penalty", "C", "folds", "cap", "mode", "max_iter", "rng_seed"):
        value = getattr(args, key, None)
        if value is not None:
            c[key] = value
    if args.no_grid:
        c["grid"] = False
    return ClassifierConfig(**c)


def _read_docs(path: Path) -> tuple[list[str], list[str]]:
    docs, labels = [], []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        obj = json.loads(line)
        if "text" not in obj or "label" not in obj:
            raise ValueError(f"{path}:{lineno}: each line needs 'text' and 'label'")
        docs.append(obj["text"])
        labels.append(obj["label"])
    return docs, labels


def cmd_classify_train(args, cfg):
    from .classify import report_csv, save_model, train

    config = _classifier_config(args, cfg)
    out = _out_dir(args, cfg, "model")
    data = _require(_resolve(args.data, _work(cfg, "synth", "training.jsonl")), "--data")
    docs, labels = _read_docs(data)
    model = train(config, docs, labels)
    save_model(model, out / "model.txt")
    (out / "report.csv").write_text(report_csv(model), encoding="utf-8")
    write_manifest(out, "classify-train", cfg, {}, {"data": data}, ["model.txt", "report.csv"])
    mean = model.report.get("mean", {})
    print(f"classify-train: {model.config.penalty} C={model.config.C} "
          f"accuracy={mean.get('accuracy', float('nan')):.4f} -> {out}")


def cmd_classify_predict(args, cfg):
    import numpy as np

    from .classify import load_model, reliability
    from .corpus import load_snapshot
    from .extractor import extract_text

    out = _out_dir(args, cfg, "classify")
    model_path = _require(_resolve(args.model, _work(cfg, "model", "model.txt"), "model.txt"), "--model")
    snap = _snapshot_path(args, cfg)
    model = load_model(model_path)
    clf = model.to_classifier()
    records = [r for r in load_snapshot(snap) if r.html]
    rows = []
    if records:
        texts = [extract_text(r.html) for r in records]
        proba = clf.predict_proba(texts)
        rel = reliability(proba)
        for r, p, q in zip(records, proba, np.atleast_1d(rel)):
            rows.append([r.url, clf.classes_[int(np.argmax(p))], f"{float(np.max(p)):.6f}", f"{float(q):.6f}"])
    _write_csv(out / "predictions.csv", ["host", "category", "probability", "reliability"], rows)
    write_manifest(out, "classify-predict", cfg, {}, {"model": model_path, "snapshot": snap}, ["predictions.csv"])
    print(f"classify-predict: {len(rows)} pages -> {out}")


def cmd_detect(args, cfg):
    from .corpus import load_snapshot
    from .extractor import extract_text
    from .prohibit import classify_site, load_lexicon

    out = _out_dir(args, cfg, "detect")
    lexicon_path = _require(Path(args.lexicon), "--lexicon")
    lexicon = load_lexicon(lexicon_path)
    snap = _snapshot_path(args, cfg)
    preds_path = None
    if args.category:
        preds_path = _require(_resolve(args.predictions, _work(cfg, "classify", "predictions.csv"),
                                       "predictions.csv"), "--predictions")
    categories = _load_predictions(preds_path)
    rows = []
    for r in load_snapshot(snap):
        if not r.html or (args.category and categories.get(r.url) != args.category):
            continue
        verdict = classify_site(extract_text(r.html), lexicon)
        rules = sorted({rule for _, rule in verdict.matched_sentences if rule is not None})
        rows.append([r.url, verdict.verdict.value, " ".join(map(str, rules))])
    _write_csv(out / "verdicts.csv", ["host", "verdict", "rules"], rows)
    write_manifest(out, "detect", cfg, {"category": args.category},
                   {"lexicon": lexicon_path, "snapshot": snap, "predictions": preds_path}, ["verdicts.csv"])
    counts = {v: sum(r[1] == v for r in rows) for v in ("Allows", "Forbids", "NoSignal")}
    print(f"detect: {counts} -> {out}")


def _pairs_from_labels(path: Path, rng_seed: int) -> list[tuple[str, str, bool]]:
    """Mirror pairs (original, member) and as many random pairs of originals."""
    from .synth import ORIGINAL, read_labels

    rows = read_labels(path)
    originals = {c: h for h, c, kind in rows if kind == ORIGINAL}
    positives = [(originals[c], h, True) for h, c, kind in rows if kind != ORIGINAL and c in originals]
    reps = sorted(originals.values())
    rng = random.Random(rng_seed)
    wanted = min(len(positives), len(reps) * (len(reps) - 1) // 2)
    negatives: set[tuple[str, str]] = set()
    while len(negatives) < wanted:
        a, b = sorted(rng.sample(reps, 2))
        negatives.add((a, b))
    return positives + [(a, b, False) for a, b in sorted(negatives)]


def cmd_bench_hash(args, cfg):
    from .mirror.bench import (bench_dedup, hybrid_method, minhash_method, rows_to_csv,
                               simhash_method, threshold_sweep)

    weights = _mirror_weights(args, cfg)
    out = _out_dir(args, cfg, "bench")
    pairs_path = _require(_resolve(args.pairs, _work(cfg, "synth", "pairs.csv")), "--pairs")
    corpus = _require(_resolve(args.corpus, pairs_path.parent / "corpus"), "--corpus")
    header = pairs_path.read_text(encoding="utf-8").split("\n", 1)[0]
    if header.startswith("host_a"):
        pairs = [(r["host_a"], r["host_b"], r["is_mirror"] in ("1", "true", "True")) for r in _read_csv(pairs_path)]
    elif header.startswith("host,cluster_id"):
        pairs = _pairs_from_labels(pairs_path, cfg["synth"]["rng_seed"])
    else:
        raise UsageError(f"--pairs: {pairs_path} is neither a pairs file nor a labels file")
    hosts = {h for a, b, _ in pairs for h in (a, b)}
    pages = {}
    for h in hosts:
        pages[h] = _require(corpus / h / "index.html", "--corpus").read_bytes()
    methods = [hybrid_method(weights), simhash_method(), minhash_method()]
    rows = bench_dedup(pages, pairs, methods=methods)
    (out / "bench.csv").write_text(rows_to_csv(rows), encoding="utf-8")
    outputs = ["bench.csv"]
    if args.sweep:
        (out / "sweep.csv").write_text(rows_to_csv(threshold_sweep(pages, pairs, methods), sweep=True),
                                       encoding="utf-8")
        outputs.append("sweep.csv")
    write_manifest(out, "bench-hash", cfg, {"sweep": args.sweep}, {"pairs": pairs_path, "corpus": corpus}, outputs)
    sys.stdout.write(rows_to_csv(rows))


def cmd_report(args, cfg):
    from collections import Counter

    from .graph import contribution_table, weakly_connected_components

    out = _out_dir(args, cfg, "report")
    preds_path = _resolve(args.predictions, _work(cfg, "classify", "predictions.csv"), "predictions.csv")
    categories = _load_predictions(preds_path)
    graph, seeds, rep_of, inputs = _build(args, cfg, categories)
    inputs["predictions"] = preds_path if preds_path.exists() else None
    comps = weakly_connected_components(graph)
    dedup_summary = _work(cfg, "dedup", "summary.json")
    summary = {
        "nodes": len(graph),
        "edges": graph.n_edges,
        "components": comps.rows(top=3),
        "order_one": comps.order_one,
        "categories": dict(sorted(Counter(n.category for n in graph.nodes.values() if n.category).items())),
        "mirrors": sum(len(n.mirrors) for n in graph.nodes.values()),
        "nodes_with_mirrors": sum(n.has_mirror for n in graph.nodes.values()),
    }
    lines = ["# Crawl report", "", f"Nodes: {summary['nodes']}, edges: {summary['edges']}, "
             f"mirrors collapsed: {summary['mirrors']}", "", "| Subgraph | Nodes | Edges | LS |", "|---|---|---|---|"]
    lines += [f"| {a} | {b} | {c} | {d} |" for a, b, c, d in summary["components"]]
    if summary["categories"]:
        lines += ["", "| Category | Nodes |", "|---|---|"]
        lines += [f"| {c} | {n} |" for c, n in summary["categories"].items()]
    if seeds:
        table = contribution_table(graph, seeds, rep_of=rep_of)
        rows = table.to_rows()
        summary["contribution"] = rows
        lines += ["", "| " + " | ".join(rows[0]) + " |", "|" + "---|" * len(rows[0])]
        lines += ["| " + " | ".join([str(r[0])] + [f"{x:.2f}%" for x in r[1:]]) + " |" for r in rows[1:]]
    (out / "report.json").write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    (out / "report.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_manifest(out, "report", cfg, {}, {**inputs, "dedup_summary": dedup_summary if dedup_summary.exists()
                                            else None}, ["report.json", "report.md"])
    print("\n".join(lines))


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="onionscope", description=__doc__.split("\n", 1)[0])
    p.add_argument("--config", help="INI file with [paths] [seed] [crawl] [mirror] [classify] [synth]")
    p.add_argument("--workdir", help="root for default input/output locations")
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    p.add_argument("--version", action="version", version=f"onionscope {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="output directory")
        sp.set_defaults(func=func)
        return sp

    sp = add("synthgen", cmd_synthgen, "write a synthetic fixture corpus")
    sp.add_argument("--spec", default="default", help="'default' or a JSON file of generator fields")
    sp.add_argument("--kind", choices=["fixture", "benchmark"], default="fixture")
    sp.add_argument("--n-uniques", type=_positive_int)
    sp.add_argument("--topology", choices=["chain", "tree", "clusters"])
    sp.add_argument("--n-mirrors", type=int, default=1000)
    sp.add_argument("--n-distinct", type=int, default=1000)
    sp.add_argument("--rng-seed", type=int)

    sp = add("seed", cmd_seed, "extract keywords, query engines, merge with manual seeds")
    sp.add_argument("--titles")
    sp.add_argument("--engines", action="append", help="fixture engine directory (repeatable)")
    sp.add_argument("--engine-url", action="append", help="NAME=URL_TEMPLATE with {term} (repeatable)")
    sp.add_argument("--manual")
    sp.add_argument("-k", type=_positive_int)

    sp = add("crawl", cmd_crawl, "windowed breadth-first crawl")
    sp.add_argument("--seeds")
    sp.add_argument("--transport", choices=["fixture", "proxy"])
    sp.add_argument("--corpus", help="fixture corpus directory")
    sp.add_argument("--workers", type=_positive_int)
    sp.add_argument("--timeout", type=float)
    sp.add_argument("--max-attempts", type=_positive_int)
    sp.add_argument("--proxy-endpoint")
    sp.add_argument("--resume", help="snapshot to resume from")

    for name, func, help_ in (("dedup", cmd_dedup, "cluster mirrors"),
                              ("bench-hash", cmd_bench_hash, "benchmark hybrid vs SimHash vs MinHash")):
        sp = add(name, func, help_)
        sp.add_argument("--weights", type=parse_weights, help="W_s,W_c summing to 1")
        sp.add_argument("--threshold", type=_fraction)
        if name == "dedup":
            sp.add_argument("--snapshot")
        else:
            sp.add_argument("--pairs", help="pairs.csv (host_a,host_b,is_mirror) or labels.csv")
            sp.add_argument("--corpus")
            sp.add_argument("--sweep", action="store_true")

    for name, func, help_ in (("graph", cmd_graph, "build the page graph and component report"),
                              ("report", cmd_report, "summary report with categories")):
        sp = add(name, func, help_)
        sp.add_argument("--snapshot")
        sp.add_argument("--clusters")
        sp.add_argument("--seeds")
        if name == "report":
            sp.add_argument("--predictions")

    sp = add("classify-train", cmd_classify_train, "train the content classifier")
    sp.add_argument("--data", help="JSONL with text and label fields")
    sp.add_argument("--penalty", choices=["none", "l1", "l2", "elasticnet"])
    sp.add_argument("--C", type=float)
    sp.add_argument("--folds", type=int)
    sp.add_argument("--cap", type=_positive_int)
    sp.add_argument("--mode", choices=["standard", "paper-literal"])
    sp.add_argument("--max-iter", type=_positive_int)
    sp.add_argument("--seed", dest="rng_seed", type=int, help="seed for bootstrap, holdout and folds")
    sp.add_argument("--no-grid", action="store_true", help="skip the penalty/C grid search")

    sp = add("classify-predict", cmd_classify_predict, "classify crawled pages")
    sp.add_argument("--model")
    sp.add_argument("--snapshot")

    sp = add("detect", cmd_detect, "prohibition-structure detection")
    sp.add_argument("--lexicon", required=True)
    sp.add_argument("--snapshot")
    sp.add_argument("--category", help="only pages predicted in this category")
    sp.add_argument("--predictions")
    return p


DOMAIN_ERRORS = (ValueError, LookupError, OSError, RuntimeError)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        if args.workdir:
            cfg["paths"]["workdir"] = args.workdir
        _log_overrides(cfg)
        args.func(args, cfg)
    except UsageError as exc:
        print(f"onionscope {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(f"onionscope {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
