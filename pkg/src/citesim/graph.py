"""Directed citation graph: loading, validation, and the three neighbor views.

Papers are identified by dense 0-based integer ids (``PaperId``), assigned in
order of first appearance while loading.  Every measure in :mod:`citesim.engine`
consumes one of three neighbor views of a paper ``p``:

* ``in``          -- I(p), the papers that cite p
* ``out``         -- O(p), the papers p cites
* ``undirected``  -- L(p) = I(p) | O(p), direction discarded
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import DataError

PaperId = int

YEAR_MIN, YEAR_MAX = 1900, 2100


@dataclass(frozen=True)
class PaperMeta:
    """Source-side identity of a paper (key, optional title and year)."""

    external_id: str
    title: str = ""
    year: Optional[int] = None

    def __post_init__(self):
        if not self.external_id:
            raise DataError("external_id must be a non-empty string")
        if self.year is not None and not (YEAR_MIN <= self.year <= YEAR_MAX):
            raise DataError(
                f"year {self.year} for {self.external_id!r} outside "
                f"[{YEAR_MIN}, {YEAR_MAX}]"
            )


@dataclass(frozen=True)
class LoadReport:
    """Counts of rows discarded while loading an edge stream."""

    duplicate_edges: int = 0
    self_loops: int = 0


@dataclass(frozen=True)
class GraphStats:
    n: int
    edge_count: int
    d1: float  # mean in-degree
    d2: float  # mean out-degree
    sources: int  # nodes with no in-links
    sinks: int  # nodes with no out-links


class CitationGraph:
    """Immutable directed citation graph with precomputed neighbor indexes.

    Construct through :func:`load_graph` (external-id streams) or
    :meth:`from_edges` (already-dense integer ids).  Instances never change
    after construction, so all read methods are safe for concurrent use.
    """

    def __init__(self, n: int, edges: frozenset, in_index, out_index, meta):
        self.n = n
        self.edges = edges
        self.in_index = in_index  # tuple of frozensets, I(p)
        self.out_index = out_index  # tuple of frozensets, O(p)
        self.und_index = tuple(i | o for i, o in zip(in_index, out_index))
        self.meta = meta
        self._ext_to_id = {m.external_id: p for p, m in enumerate(meta)}
        if len(self._ext_to_id) != n:
            raise DataError("external ids are not unique")

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        meta: Optional[Sequence[PaperMeta]] = None,
    ) -> "CitationGraph":
        """Build a graph over nodes ``0..n-1`` from integer edge pairs.

        Rejects self-loops, duplicates, and out-of-range endpoints; use
        :func:`load_graph` for streams that still need cleaning.
        """
        edge_set = set()
        ins = [set() for _ in range(n)]
        outs = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise DataError(f"edge ({u}, {v}) outside node range [0, {n})")
            if u == v:
                raise DataError(f"self-loop at node {u}")
            if (u, v) in edge_set:
                raise DataError(f"duplicate edge ({u}, {v})")
            edge_set.add((u, v))
            outs[u].add(v)
            ins[v].add(u)
        if meta is None:
            meta = tuple(PaperMeta(external_id=str(p)) for p in range(n))
        else:
            meta = tuple(meta)
            if len(meta) != n:
                raise DataError(f"expected {n} meta records, got {len(meta)}")
        return cls(
            n,
            frozenset(edge_set),
            tuple(frozenset(s) for s in ins),
            tuple(frozenset(s) for s in outs),
            meta,
        )

    # -- lookups -----------------------------------------------------------

    def id_of(self, external_id: str) -> PaperId:
        try:
            return self._ext_to_id[external_id]
        except KeyError:
            raise DataError(f"unknown paper id {external_id!r}") from None

    def external_id(self, p: PaperId) -> str:
        return self.meta[p].external_id

    def has_edge(self, u: PaperId, v: PaperId) -> bool:
        return (u, v) in self.edges

    def neighbors(self, p: PaperId, view: str = "undirected") -> frozenset:
        """Return I(p), O(p), or L(p); mutual citations collapse to one
        undirected neighbor."""
        if not 0 <= p < self.n:
            raise ValueError(f"paper id {p} out of range [0, {self.n})")
        if view == "in":
            return self.in_index[p]
        if view == "out":
            return self.out_index[p]
        if view == "undirected":
            return self.und_index[p]
        raise ValueError(f"unknown view {view!r}")

    def stats(self) -> GraphStats:
        if self.n == 0:
            return GraphStats(0, 0, 0.0, 0.0, 0, 0)
        e = len(self.edges)
        return GraphStats(
            n=self.n,
            edge_count=e,
            d1=e / self.n,
            d2=e / self.n,
            sources=sum(1 for s in self.in_index if not s),
            sinks=sum(1 for s in self.out_index if not s),
        )

    # -- dense views consumed by the engine --------------------------------

    def adjacency(self) -> np.ndarray:
        """Dense edge indicator E with E[u, v] = 1 iff u cites v."""
        e = np.zeros((self.n, self.n))
        for u, v in self.edges:
            e[u, v] = 1.0
        return e

    def undirected_adjacency(self) -> np.ndarray:
        """Symmetric indicator U with U[p, q] = 1 iff q in L(p)."""
        u = np.zeros((self.n, self.n))
        for a, b in self.edges:
            u[a, b] = 1.0
            u[b, a] = 1.0
        return u


def classify_connector(
    g: CitationGraph, x: PaperId, p: PaperId, q: PaperId
) -> frozenset:
    """Classify the role(s) of ``x`` for the pair ``(p, q)``.

    Returns a subset of ``{"OP", "IP", "BP"}``: OP when both p and q cite x,
    IP when x cites both, BP when x lies on a citation chain between them
    (p cites x and x cites q, or the mirror).  Empty set means no role.
    """
    if len({x, p, q}) != 3:
        raise ValueError("x, p, q must be three distinct papers")
    for node in (x, p, q):
        if not 0 <= node < g.n:
            raise ValueError(f"paper id {node} out of range [0, {g.n})")
    roles = set()
    p_x = g.has_edge(p, x)
    q_x = g.has_edge(q, x)
    x_p = g.has_edge(x, p)
    x_q = g.has_edge(x, q)
    if p_x and q_x:
        roles.add("OP")
    if x_p and x_q:
        roles.add("IP")
    if (p_x and x_q) or (q_x and x_p):
        roles.add("BP")
    return frozenset(roles)


def load_graph(
    edge_stream: Iterable[tuple[str, str]],
    meta_stream: Optional[Iterable[PaperMeta]] = None,
) -> tuple[CitationGraph, LoadReport]:
    """Build a validated graph from a stream of (citing, cited) external ids.

    External ids map to dense 0-based ids in order of first appearance
    (citing endpoint before cited, then meta-only papers).  Duplicate edges
    are dropped, as are self-citations; both endpoints of a dropped edge
    still become nodes.  The report carries the drop counts.
    """
    ids: dict[str, int] = {}

    def intern(ext: str) -> int:
        if not ext:
            raise DataError("empty paper id in edge stream")
        if ext not in ids:
            ids[ext] = len(ids)
        return ids[ext]

    edge_set: set[tuple[int, int]] = set()
    duplicates = 0
    self_loops = 0
    for citing, cited in edge_stream:
        u = intern(citing)
        v = intern(cited)
        if u == v:
            self_loops += 1
            continue
        if (u, v) in edge_set:
            duplicates += 1
            continue
        edge_set.add((u, v))

    meta_by_ext: dict[str, PaperMeta] = {}
    if meta_stream is not None:
        for rec in meta_stream:
            if rec.external_id in meta_by_ext:
                raise DataError(f"duplicate metadata for {rec.external_id!r}")
            meta_by_ext[rec.external_id] = rec
            intern(rec.external_id)  # isolated node if not an edge endpoint

    n = len(ids)
    meta = [None] * n
    for ext, p in ids.items():
        meta[p] = meta_by_ext.get(ext, PaperMeta(external_id=ext))
    graph = CitationGraph.from_edges(n, edge_set, meta)
    return graph, LoadReport(duplicate_edges=duplicates, self_loops=self_loops)


# -- file formats ----------------------------------------------------------


def read_edge_list(path) -> Iterator[tuple[str, str]]:
    """Yield (citing, cited) pairs from a tab-separated edge-list file.

    One edge per line, ``citing<TAB>cited``; ``#`` lines are comments and
    blank lines are skipped.  Anything else raises with the line number.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise DataError(
                    f"{path}:{lineno}: expected 'citing<TAB>cited', got {line!r}"
                )
            yield parts[0], parts[1]


def read_metadata(path) -> list[PaperMeta]:
    """Read a metadata CSV with header ``external_id,title,year``."""
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["external_id", "title", "year"]:
            raise DataError(
                f"{path}: expected header 'external_id,title,year', got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            ext, title, year_text = row
            year = None
            if year_text.strip():
                try:
                    year = int(year_text)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: year {year_text!r} is not an integer"
                    ) from None
            try:
                records.append(PaperMeta(external_id=ext, title=title, year=year))
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return records


def load_graph_files(graph_path, meta_path=None) -> tuple[CitationGraph, LoadReport]:
    """Load a graph from an edge-list file plus optional metadata CSV."""
    meta = read_metadata(meta_path) if meta_path else None
    return load_graph(read_edge_list(graph_path), meta)
