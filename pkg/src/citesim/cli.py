"""Command-line front door.

One invocation, one command, file in, files out:

    citesim compute   --graph g.tsv --measure crank --out scores.csv
    citesim topk      --graph g.tsv --measure simrank --query ID --out top.csv
    citesim eval      --graph g.tsv --corpus fields.txt --out precision.csv
    citesim histogram --graph g.tsv --measure crank --out hist.csv
    citesim trace     --graph g.tsv --measure crank --kmax 10 --out trace.csv
    citesim cases     --graph g.tsv --pairs pairs.tsv --out cases.csv
    citesim validate  --graph g.tsv [--measure crank --out scores.csv]

Every command that writes a CSV also writes `<out>.summary.json` capturing
the config, graph shape, and iteration report, so a run can be reproduced
from its outputs alone.  `validate` without a measure checks and summarizes
the graph; with a measure plus --out it recomputes the matrix and verifies
the named CSV byte-for-byte against it.

Exit status: 0 success, 1 usage or parameter problem, 2 unreadable or
inconsistent data.

The pairs file for `cases` is tab-separated `p<TAB>q<TAB>tag` with `#`
comments; tags are P1 (old-old pair), P2 (recent-recent), P3 (old-recent).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from typing import Optional

from . import evaluate
from .engine import (
    MEASURES,
    NORMALIZATIONS,
    MeasureConfig,
    compute,
    top_k,
    write_iteration_csv,
)
from .errors import ConfigError, DataError
from .graph import load_graph_files
from .matrix import SCORE_FORMAT, read_matrix_csv, write_matrix_csv

DEFAULT_M = (10, 20, 30, 40, 50)


@dataclass(frozen=True)
class RunSpec:
    """Everything one invocation needs, validated at parse time."""

    command: str
    graph: str
    meta: Optional[str] = None
    out: Optional[str] = None
    measure: Optional[str] = None
    normalization: Optional[str] = None
    C: float = 0.8
    lam: float = 0.5
    k_max: int = 10
    epsilon: float = 1e-4
    query: Optional[str] = None
    count: int = 10
    m_values: tuple = DEFAULT_M
    corpus: Optional[str] = None
    pairs: Optional[str] = None
    threads: int = 1

    def config(self, measure: Optional[str] = None) -> MeasureConfig:
        return MeasureConfig(
            measure=measure or self.measure,
            normalization=self.normalization if measure is None else None,
            C=self.C,
            lam=self.lam,
            k_max=self.k_max,
            epsilon=self.epsilon,
        )

    def all_configs(self) -> list:
        # one config per measure, each in its default normalization
        return [self.config(measure=m) for m in MEASURES]


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1 (argparse defaults to 2, which this tool
    # reserves for data errors)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _m_list(text: str) -> tuple:
    try:
        values = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        ) from None
    if not values:
        raise argparse.ArgumentTypeError("at least one m value required")
    return values


def _build_parser() -> _Parser:
    parser = _Parser(prog="citesim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p, out_required=True, measure_required=False):
        p.add_argument("--graph", required=True, help="edge-list file, citing<TAB>cited")
        p.add_argument("--meta", help="optional CSV: external_id,title,year")
        p.add_argument("--measure", choices=MEASURES, required=measure_required)
        p.add_argument("--normalization", choices=NORMALIZATIONS)
        p.add_argument("--C", type=float, default=0.8, help="decay factor in [0,1]")
        p.add_argument("--lambda", dest="lam", type=float, default=0.5,
                       help="in-link vs out-link weight in [0,1]")
        p.add_argument("--kmax", dest="k_max", type=int, default=10)
        p.add_argument("--epsilon", type=float, default=1e-4)
        p.add_argument("--out", required=out_required, help="output CSV path")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("compute", help="write the full similarity matrix")
    add_common(p, measure_required=True)

    p = sub.add_parser("topk", help="best partners for one query paper")
    add_common(p, measure_required=True)
    p.add_argument("--query", required=True, help="external id of the query paper")
    p.add_argument("--count", type=int, default=10)

    p = sub.add_parser("eval", help="mean precision@m against reference fields")
    add_common(p)
    p.add_argument("--corpus", required=True, help="[field] sections of external ids")
    p.add_argument("--m", dest="m_values", type=_m_list,
                   default=DEFAULT_M, help="comma-separated m values")

    p = sub.add_parser("histogram", help="score distribution with N/A bucket")
    add_common(p, measure_required=True)

    p = sub.add_parser("trace", help="top-score mean after each iteration up to --kmax")
    add_common(p, measure_required=True)

    p = sub.add_parser("cases", help="score tagged hard pairs under every measure")
    add_common(p)
    p.add_argument("--pairs", required=True, help="p<TAB>q<TAB>tag lines")

    p = sub.add_parser("validate", help="check a graph file, or verify a matrix CSV")
    add_common(p, out_required=False)

    return parser


def parse_args(argv) -> RunSpec:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    spec = RunSpec(
        command=ns.command,
        graph=ns.graph,
        meta=ns.meta,
        out=ns.out,
        measure=ns.measure,
        normalization=ns.normalization,
        C=ns.C,
        lam=ns.lam,
        k_max=ns.k_max,
        epsilon=ns.epsilon,
        query=getattr(ns, "query", None),
        count=getattr(ns, "count", 10),
        m_values=tuple(getattr(ns, "m_values", DEFAULT_M)),
        corpus=getattr(ns, "corpus", None),
        pairs=getattr(ns, "pairs", None),
        threads=ns.threads,
    )
    if spec.threads < 1:
        parser.error("--threads must be >= 1")
    if spec.count < 1:
        parser.error("--count must be >= 1")
    try:
        if spec.measure is not None:
            spec.config()
        else:
            # no measure chosen: still vet the numeric flags
            MeasureConfig("crank", C=spec.C, lam=spec.lam,
                          k_max=spec.k_max, epsilon=spec.epsilon)
    except ConfigError as exc:
        parser.error(str(exc))
    if spec.measure is None and spec.normalization is not None:
        parser.error("--normalization requires --measure")
    if spec.command == "validate" and spec.measure is not None and spec.out is None:
        parser.error("matrix verification requires --out naming the CSV to check")
    return spec


# -- execution ---------------------------------------------------------------


def _graph_payload(g, load_report) -> dict:
    s = g.stats()
    return {
        "nodes": s.n,
        "edges": s.edge_count,
        "mean_in_degree": s.d1,
        "mean_out_degree": s.d2,
        "sources": s.sources,
        "sinks": s.sinks,
        "duplicate_edges_dropped": load_report.duplicate_edges,
        "self_loops_dropped": load_report.self_loops,
    }


def _config_payload(cfg: MeasureConfig) -> dict:
    return {
        "measure": cfg.measure,
        "normalization": cfg.normalization,
        "C": cfg.C,
        "lambda": cfg.lam,
        "k_max": cfg.k_max,
        "epsilon": cfg.epsilon,
    }


def _report_payload(report) -> Optional[dict]:
    if report is None:
        return None
    return {
        "iterations_run": report.iterations_run,
        "converged": report.converged,
        "max_delta_per_iteration": list(report.max_delta_per_iteration),
    }


def _write_summary(out_path: str, payload: dict):
    with open(f"{out_path}.summary.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_pairs(path, g) -> list:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 'p<TAB>q<TAB>tag'")
            p_ext, q_ext, tag = parts
            if tag not in evaluate.CASE_TAGS:
                raise DataError(
                    f"{path}:{lineno}: unknown tag {tag!r} "
                    f"(expected one of {', '.join(evaluate.CASE_TAGS)})"
                )
            pairs.append((g.id_of(p_ext), g.id_of(q_ext), tag))
    if not pairs:
        raise DataError(f"{path}: no case pairs found")
    return pairs


def _dispatch(spec: RunSpec) -> int:
    g, load_report = load_graph_files(spec.graph, spec.meta)
    base = {
        "command": spec.command,
        "graph_file": spec.graph,
        "meta_file": spec.meta,
        "threads": spec.threads,
        "graph": _graph_payload(g, load_report),
    }

    if spec.command == "compute":
        cfg = spec.config()
        mat, report = compute(g, cfg, spec.threads)
        write_matrix_csv(mat, spec.out)
        _write_summary(spec.out, {**base, "config": _config_payload(cfg),
                                  "iteration": _report_payload(report),
                                  "k": mat.k, "na_pairs": mat.na_count()})
        return 0

    if spec.command == "topk":
        cfg = spec.config()
        mat, report = compute(g, cfg, spec.threads)
        qid = g.id_of(spec.query)
        entries = top_k(mat, qid, spec.count)
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rank", "external_id", "score", "zero_fill", "title"])
            for rank, entry in enumerate(entries, start=1):
                meta = g.meta[entry.paper]
                writer.writerow([rank, meta.external_id, SCORE_FORMAT % entry.score,
                                 int(entry.zero_fill), meta.title])
        _write_summary(spec.out, {**base, "config": _config_payload(cfg),
                                  "iteration": _report_payload(report),
                                  "query": spec.query, "count": spec.count,
                                  "returned": len(entries)})
        return 0

    if spec.command == "eval":
        corpus, corpus_report = evaluate.load_corpus(spec.corpus, g)
        configs = [spec.config()] if spec.measure else spec.all_configs()
        table = evaluate.run_benchmark(g, corpus, configs, spec.m_values, spec.threads)
        evaluate.write_precision_csv(table, spec.out)
        _write_summary(spec.out, {
            **base,
            "configs": [_config_payload(c) for c in configs],
            "corpus_file": spec.corpus,
            "fields": {k: len(v) for k, v in sorted(corpus.fields.items())},
            "unresolved_ids": {k: list(v) for k, v in sorted(corpus_report.unresolved.items())},
            "dropped_fields": list(corpus_report.dropped_fields),
            "m_values": list(spec.m_values),
            "query_count": table.query_count,
        })
        return 0

    if spec.command == "histogram":
        cfg = spec.config()
        mat, report = compute(g, cfg, spec.threads)
        hist = evaluate.score_histogram(mat)
        evaluate.write_histogram_csv(hist, spec.out)
        _write_summary(spec.out, {**base, "config": _config_payload(cfg),
                                  "iteration": _report_payload(report),
                                  "na_pairs": hist.na, "total_pairs": hist.total_pairs})
        return 0

    if spec.command == "trace":
        cfg = spec.config()
        points = evaluate.convergence_trace(g, cfg, spec.k_max, spec.threads)
        evaluate.write_trace_csv(points, spec.out)
        _write_summary(spec.out, {**base, "config": _config_payload(cfg),
                                  "pairs_used": points[-1].pairs_used if points else 0})
        return 0

    if spec.command == "cases":
        pairs = _read_pairs(spec.pairs, g)
        configs = [spec.config()] if spec.measure else spec.all_configs()
        table = evaluate.case_analysis(g, pairs, configs, spec.threads)
        evaluate.write_cases_csv(table, g, spec.out)
        _write_summary(spec.out, {**base, "pairs_file": spec.pairs,
                                  "configs": [_config_payload(c) for c in configs],
                                  "pairs": len(pairs)})
        return 0

    if spec.command == "validate":
        if spec.measure is None:
            payload = {**base}
            text = json.dumps(payload, indent=2, sort_keys=True)
            print(text)
            if spec.out:
                with open(spec.out, "w", encoding="utf-8") as fh:
                    fh.write(text + "\n")
            return 0
        return _verify_matrix(spec, g, base)

    raise ConfigError(f"unknown command {spec.command!r}")


def _verify_matrix(spec: RunSpec, g, base: dict) -> int:
    """Recompute the matrix and compare a CSV export entry-for-entry."""
    cfg = spec.config()
    mat, _ = compute(g, cfg, spec.threads)
    expected = {(p, q): s for p, q, s in mat.entries_above(0.0)}
    actual = {}
    for p, q, s in read_matrix_csv(spec.out):
        if not (0 <= p <= q < g.n):
            raise DataError(f"{spec.out}: pair ({p}, {q}) out of range for n={g.n}")
        if (p, q) in actual:
            raise DataError(f"{spec.out}: duplicate pair ({p}, {q})")
        actual[(p, q)] = s

    missing = sorted(set(expected) - set(actual))
    extra = sorted(set(actual) - set(expected))
    changed = sorted(
        pq for pq in set(expected) & set(actual) if expected[pq] != actual[pq]
    )
    ok = not (missing or extra or changed)
    print(json.dumps({
        **base,
        "config": _config_payload(cfg),
        "matrix_file": spec.out,
        "entries_checked": len(actual),
        "missing_pairs": len(missing),
        "unexpected_pairs": len(extra),
        "mismatched_scores": len(changed),
        "verified": ok,
    }, indent=2, sort_keys=True))
    if not ok:
        for p, q in (missing + extra + changed)[:10]:
            print(f"mismatch at pair ({p}, {q})", file=sys.stderr)
        return 2
    return 0


def run(spec: RunSpec) -> int:
    try:
        return _dispatch(spec)
    except ConfigError as exc:
        print(f"citesim: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"citesim: error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    try:
        spec = parse_args(sys.argv[1:] if argv is None else list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(spec)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
