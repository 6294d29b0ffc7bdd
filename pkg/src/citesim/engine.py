"""Seven link-based similarity measures over a citation graph.

Non-iterative measures count shared neighbors (common citers, common
references, and their weighted blend); iterative measures propagate scores
through neighbor pairs until a fixed point:

* in-link recursion: score flows through the papers citing p and q
* out-link recursion: through the papers p and q cite
* blended recursion: weighted sum of the two, weight ``lam``
* undirected recursion: through L(p) = I(p) | O(p), either with pairwise
  normalization (divide by |L(p)|*|L(q)|) or with the Jaccard update that
  adds the shared-neighbor ratio and weights the two cross sums by
  1/(|L(p) u L(q)|*|L(q)|) and 1/(|L(p) u L(q)|*|L(p)|)

All iterative updates are double-buffered: iteration k+1 reads only the
frozen iteration-k matrix, so the pair space can be partitioned across
threads freely.  Results are bit-identical for any ``threads`` value; matrix
products run block-by-block with a fixed block size so the float summation
order never depends on the schedule.

Pairs whose required neighbor set is empty cannot be scored by the directed
recursions; they are marked N/A (and read as 0.0).  The undirected Jaccard
recursion scores every pair: an empty union just yields 0.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .errors import ConfigError
from .graph import CitationGraph
from .matrix import SCORE_FORMAT, SimilarityMatrix

MEASURES = (
    "cocitation",
    "coupling",
    "amsler",
    "simrank",
    "rvs_simrank",
    "prank",
    "crank",
)

NORMALIZATIONS = ("raw_count", "jaccard", "pairwise")

ITERATIVE_MEASURES = ("simrank", "rvs_simrank", "prank", "crank")

_ALLOWED_NORMS = {
    "cocitation": ("raw_count", "jaccard"),
    "coupling": ("raw_count", "jaccard"),
    "amsler": ("raw_count", "jaccard"),
    "simrank": ("pairwise",),
    "rvs_simrank": ("pairwise",),
    "prank": ("pairwise",),
    "crank": ("jaccard", "pairwise"),
}

# Counting measures default to the raw set-intersection reading; the
# undirected recursion defaults to its Jaccard form.
_DEFAULT_NORM = {
    "cocitation": "raw_count",
    "coupling": "raw_count",
    "amsler": "raw_count",
    "simrank": "pairwise",
    "rvs_simrank": "pairwise",
    "prank": "pairwise",
    "crank": "jaccard",
}


@dataclass(frozen=True)
class MeasureConfig:
    """Measure choice plus decay C, weight lam, budget k_max, tolerance epsilon.

    ``normalization=None`` resolves to the measure's default mode.  Invalid
    combinations raise :class:`ConfigError` at construction.
    """

    measure: str
    normalization: Optional[str] = None
    C: float = 0.8
    lam: float = 0.5
    k_max: int = 10
    epsilon: float = 1e-4

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ConfigError(f"unknown measure {self.measure!r}")
        if self.normalization is None:
            object.__setattr__(self, "normalization", _DEFAULT_NORM[self.measure])
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        if self.normalization not in _ALLOWED_NORMS[self.measure]:
            raise ConfigError(
                f"{self.measure} does not support {self.normalization} "
                f"normalization (allowed: {', '.join(_ALLOWED_NORMS[self.measure])})"
            )
        if not 0.0 <= self.C <= 1.0:
            raise ConfigError(f"C must be in [0,1], got {self.C}")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda must be in [0,1], got {self.lam}")
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise ConfigError(f"k_max must be an integer >= 1, got {self.k_max}")
        if not self.epsilon > 0.0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")

    @property
    def iterative(self) -> bool:
        return self.measure in ITERATIVE_MEASURES

    @property
    def bounded(self) -> bool:
        return self.normalization != "raw_count"

    def label(self) -> str:
        return f"{self.measure}:{self.normalization}"


@dataclass(frozen=True)
class IterationReport:
    iterations_run: int
    converged: bool
    max_delta_per_iteration: tuple


# -- deterministic linear algebra ------------------------------------------

# Matrix products are evaluated in fixed row blocks via einsum's
# non-optimized path.  Each output row then has one summation order that
# depends only on the operand shapes, never on how many workers ran, which
# is what makes results bit-identical across thread counts.
_BLOCK_ROWS = 64


def _matmul(a: np.ndarray, b: np.ndarray, threads: int = 1) -> np.ndarray:
    n = a.shape[0]
    if n <= _BLOCK_ROWS:
        return np.einsum("ij,jk->ik", a, b, optimize=False)
    out = np.empty((n, b.shape[1]))

    def block(r0: int):
        r1 = min(r0 + _BLOCK_ROWS, n)
        np.einsum("ij,jk->ik", a[r0:r1], b, out=out[r0:r1], optimize=False)

    starts = range(0, n, _BLOCK_ROWS)
    if threads <= 1:
        for r0 in starts:
            block(r0)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(block, starts))
    return out


def _mirror(a: np.ndarray) -> np.ndarray:
    # One canonical float per unordered pair: the upper-triangle value wins.
    # The two float expressions for (p,q) and (q,p) agree only to rounding,
    # and the storage contract is exact symmetry.
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def _guarded_inverse(denom: np.ndarray) -> np.ndarray:
    pos = denom > 0.0
    return np.where(pos, 1.0 / np.where(pos, denom, 1.0), 0.0)


# -- non-iterative measures -------------------------------------------------


def _shared_neighbor_scores(g, view: str, normalization: str, threads: int):
    E = g.adjacency()
    A = E.T if view == "in" else E  # row p holds the indicator of the view set
    counts = _matmul(np.ascontiguousarray(A), A.T, threads)
    if normalization == "raw_count":
        scores = counts
    else:
        deg = A.sum(axis=1)
        union = deg[:, None] + deg[None, :] - counts
        scores = counts * _guarded_inverse(union)
    np.fill_diagonal(scores, 1.0)
    return _mirror(scores)


def _require(cfg: MeasureConfig, measure: str):
    if cfg.measure != measure:
        raise ConfigError(f"config is for {cfg.measure}, expected {measure}")


def cocitation(g: CitationGraph, cfg: MeasureConfig, threads: int = 1) -> SimilarityMatrix:
    """Shared-citer counts |I(p) & I(q)|, raw or Jaccard-normalized."""
    _require(cfg, "cocitation")
    scores = _shared_neighbor_scores(g, "in", cfg.normalization, threads)
    return SimilarityMatrix.from_square(scores, k=0, bounded=cfg.bounded)


def coupling(g: CitationGraph, cfg: MeasureConfig, threads: int = 1) -> SimilarityMatrix:
    """Shared-reference counts |O(p) & O(q)|, raw or Jaccard-normalized."""
    _require(cfg, "coupling")
    scores = _shared_neighbor_scores(g, "out", cfg.normalization, threads)
    return SimilarityMatrix.from_square(scores, k=0, bounded=cfg.bounded)


def amsler(g: CitationGraph, cfg: MeasureConfig, threads: int = 1) -> SimilarityMatrix:
    """lam * shared-citer score + (1 - lam) * shared-reference score."""
    _require(cfg, "amsler")
    s_in = _shared_neighbor_scores(g, "in", cfg.normalization, threads)
    s_out = _shared_neighbor_scores(g, "out", cfg.normalization, threads)
    scores = cfg.lam * s_in + (1.0 - cfg.lam) * s_out
    np.fill_diagonal(scores, 1.0)
    return SimilarityMatrix.from_square(_mirror(scores), k=0, bounded=cfg.bounded)


# -- N/A structure ----------------------------------------------------------


def na_mask(g: CitationGraph, cfg: MeasureConfig) -> np.ndarray:
    """Square bool mask of pairs the measure cannot score.

    The mask depends only on graph structure (which neighbor sets are
    empty), so it is constant across iterations.  The diagonal is never
    N/A.  The blended recursion is N/A only where both the in-link and the
    out-link recursions are; the undirected Jaccard recursion scores
    everything.
    """
    n = g.n
    din = np.array([len(s) for s in g.in_index], dtype=float)
    dout = np.array([len(s) for s in g.out_index], dtype=float)

    def empty_pairs(deg):
        e = deg == 0
        return e[:, None] | e[None, :]

    if cfg.measure == "simrank":
        mask = empty_pairs(din)
    elif cfg.measure == "rvs_simrank":
        mask = empty_pairs(dout)
    elif cfg.measure == "prank":
        mask = empty_pairs(din) & empty_pairs(dout)
    elif cfg.measure == "crank" and cfg.normalization == "pairwise":
        dund = np.array([len(s) for s in g.und_index], dtype=float)
        mask = empty_pairs(dund)
    else:
        mask = np.zeros((n, n), dtype=bool)
    np.fill_diagonal(mask, False)
    return mask


# -- iterative measures ------------------------------------------------------


def _make_step(g: CitationGraph, cfg: MeasureConfig, threads: int) -> Callable:
    """Build the double-buffered update: new square scores from frozen old."""
    C = cfg.C
    if cfg.measure == "crank" and cfg.normalization == "jaccard":
        U = g.undirected_adjacency()
        deg = U.sum(axis=1)
        inter = _matmul(U, U, threads)  # |L(p) & L(q)|
        union = deg[:, None] + deg[None, :] - inter
        inv_union = _guarded_inverse(union)
        jac = inter * inv_union
        inv_deg = _guarded_inverse(deg)
        w1 = inv_union * inv_deg[None, :]  # 1 / (|L u| * |L(q)|)
        w2 = inv_union * inv_deg[:, None]  # 1 / (|L u| * |L(p)|)
        comp = 1.0 - U

        def step(prev: np.ndarray) -> np.ndarray:
            # G[x, q] sums prev over q' in L(q); masking G's rows by "x not
            # in L(q)" before the second product restricts the outer sum to
            # L(p) \ L(q).  The second cross sum is the transpose of the
            # first by symmetry of prev, so one product serves both.
            G = _matmul(prev, U, threads)
            S1 = _matmul(U, comp * G, threads)
            T = C * (jac + (w1 * S1 + w2 * S1.T))
            np.fill_diagonal(T, 1.0)
            return _mirror(T)

        return step

    if cfg.measure == "simrank":
        terms = [(g.adjacency().T, 1.0)]
    elif cfg.measure == "rvs_simrank":
        terms = [(g.adjacency(), 1.0)]
    elif cfg.measure == "prank":
        E = g.adjacency()
        terms = [(E.T, cfg.lam), (E, 1.0 - cfg.lam)]
    elif cfg.measure == "crank":
        terms = [(g.undirected_adjacency(), 1.0)]
    else:
        raise ConfigError(f"{cfg.measure} has no iterative form")

    prepared = []
    for A, w in terms:
        A = np.ascontiguousarray(A)
        deg = A.sum(axis=1)
        inv = _guarded_inverse(np.outer(deg, deg))
        prepared.append((A, w, inv))

    def step(prev: np.ndarray) -> np.ndarray:
        out = np.zeros((g.n, g.n))
        for A, w, inv in prepared:
            S = _matmul(_matmul(A, prev, threads), A.T, threads)
            out += w * (C * S * inv)
        np.fill_diagonal(out, 1.0)
        return _mirror(out)

    return step


def iteration_scores(
    g: CitationGraph,
    cfg: MeasureConfig,
    threads: int = 1,
    initial: Optional[np.ndarray] = None,
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (k, square scores after iteration k) for k = 1..k_max.

    Runs the full budget with no epsilon stop; callers wanting early
    termination break out themselves.  ``initial`` replaces the identity
    start (its diagonal is forced to 1); the yielded arrays are fresh per
    iteration and safe to keep.
    """
    if not cfg.iterative:
        raise ConfigError(f"{cfg.measure} is not an iterative measure")
    step = _make_step(g, cfg, threads)
    if initial is None:
        prev = np.eye(g.n)
    else:
        prev = np.array(initial, dtype=float)
        if prev.shape != (g.n, g.n):
            raise ValueError(f"initial scores must be {g.n}x{g.n}")
        np.fill_diagonal(prev, 1.0)
        prev = _mirror(prev)
    for k in range(1, cfg.k_max + 1):
        cur = step(prev)
        yield k, cur
        prev = cur


def _run_iterations(g, cfg, threads):
    na = na_mask(g, cfg)
    deltas = []
    converged = False
    prev = np.eye(g.n)
    cur = prev
    for _, cur in iteration_scores(g, cfg, threads):
        delta = float(np.max(np.abs(cur - prev))) if cur.size else 0.0
        deltas.append(delta)
        prev = cur
        if delta < cfg.epsilon:
            converged = True
            break
    k_run = len(deltas)
    m = SimilarityMatrix.from_square(cur, na=na, k=k_run, bounded=True)
    return m, IterationReport(k_run, converged, tuple(deltas))


def iterate_pairwise(
    g: CitationGraph, cfg: MeasureConfig, threads: int = 1
) -> tuple[SimilarityMatrix, IterationReport]:
    """Run a pairwise-normalized recursion until k_max or max delta < epsilon.

    Start is the identity; each iteration divides the double sum of
    previous-iteration scores over the neighbor-set product by
    |X(p)|*|X(q)| and scales by C.  Pairs with an empty required neighbor
    set stay numerically 0 and are marked N/A off the diagonal.
    """
    if cfg.normalization != "pairwise":
        raise ConfigError(
            f"pairwise iteration requires pairwise normalization, got {cfg.normalization}"
        )
    return _run_iterations(g, cfg, threads)


def crank_jaccard(
    g: CitationGraph, cfg: MeasureConfig, threads: int = 1
) -> tuple[SimilarityMatrix, IterationReport]:
    """Run the undirected Jaccard recursion until k_max or delta < epsilon.

    Update per pair: C times [shared-neighbor ratio, plus the two cross
    sums over L(p) \\ L(q) x L(q) and L(p) x L(q) \\ L(p), weighted by
    1/(|union| |L(q)|) and 1/(|union| |L(p)|)].  New scores are computed
    wholly from the previous iteration's store, then swapped in.  Every
    pair gets a number: an empty union scores 0, never N/A.
    """
    _require(cfg, "crank")
    if cfg.normalization != "jaccard":
        raise ConfigError("crank_jaccard requires jaccard normalization")
    return _run_iterations(g, cfg, threads)


def converge(
    g: CitationGraph, cfg: MeasureConfig, threads: int = 1
) -> tuple[SimilarityMatrix, IterationReport]:
    """Dispatch to the iterative driver for cfg, with k_max as a hard cap."""
    if not cfg.iterative:
        raise ConfigError(f"{cfg.measure} does not iterate; call compute instead")
    if cfg.C == 1.0:
        warnings.warn(
            "C=1 gives no decay: the fixed point need not be unique and "
            "convergence is not guaranteed",
            RuntimeWarning,
            stacklevel=2,
        )
    if cfg.measure == "crank" and cfg.normalization == "jaccard":
        return crank_jaccard(g, cfg, threads)
    return iterate_pairwise(g, cfg, threads)


def compute(
    g: CitationGraph, cfg: MeasureConfig, threads: int = 1
) -> tuple[SimilarityMatrix, Optional[IterationReport]]:
    """Run any configured measure; the report is None for one-shot measures."""
    if cfg.measure == "cocitation":
        return cocitation(g, cfg, threads), None
    if cfg.measure == "coupling":
        return coupling(g, cfg, threads), None
    if cfg.measure == "amsler":
        return amsler(g, cfg, threads), None
    return converge(g, cfg, threads)


# -- ranking ----------------------------------------------------------------


@dataclass(frozen=True)
class TopKEntry:
    paper: int
    score: float
    zero_fill: bool = False


def top_k(
    m: SimilarityMatrix, query: int, count: int, zero_fill: bool = True
) -> list:
    """Up to ``count`` best partners for ``query``, best first.

    The query itself and N/A pairs are never candidates.  Ties break by
    ascending paper id.  Exact-zero scores appear only as flagged filler
    when fewer than ``count`` positive partners exist, and only if
    ``zero_fill`` is on.
    """
    if not 0 <= query < m.n:
        raise ValueError(f"query id {query} out of range [0, {m.n})")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    scores = m.row_scores(query)
    na = m.row_na(query)
    positive = []
    zeros = []
    for q in range(m.n):
        if q == query or na[q]:
            continue
        s = float(scores[q])
        if s > 0.0:
            positive.append((q, s))
        elif s == 0.0:
            zeros.append(q)
    positive.sort(key=lambda t: (-t[1], t[0]))
    result = [TopKEntry(q, s) for q, s in positive[:count]]
    if zero_fill:
        for q in zeros:
            if len(result) >= count:
                break
            result.append(TopKEntry(q, 0.0, zero_fill=True))
    return result


# -- measure-identity checks -------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    max_abs_diff: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class ReductionReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


def reduction_check(g: CitationGraph, threads: int = 1, tolerance: float = 1e-12) -> ReductionReport:
    """Verify the collapse identities tying the recursions together.

    (a) blended recursion at k=1, C=1, lam=1 equals the in-link recursion at
        k=1, C=1, and both equal the pairwise-normalized shared-citer counts
        |I(p) & I(q)| / (|I(p)| |I(q)|);
    (b) same at lam=0 against the out-link recursion;
    (c) blended recursion with lam=1 equals the in-link recursion at any k;
    (d) with lam=0, the out-link recursion at any k.

    N/A pairs compare by their numeric value 0.
    """
    # epsilon far below any representable delta: runs stop only at k_max,
    # so both sides of each identity see the same iteration count
    def run(measure, lam, k):
        cfg = MeasureConfig(measure, "pairwise", C=1.0 if k == 1 else 0.8,
                            lam=lam, k_max=k, epsilon=1e-300)
        mat, _ = iterate_pairwise(g, cfg, threads)
        return mat.dense_scores()

    E = g.adjacency()
    A = np.ascontiguousarray(E.T)
    counts = _matmul(A, A.T, threads)
    deg = A.sum(axis=1)
    denom = np.outer(deg, deg)
    pos = denom > 0.0
    ref = np.where(pos, counts / np.where(pos, denom, 1.0), 0.0)
    np.fill_diagonal(ref, 1.0)

    sim1 = run("simrank", 0.5, 1)
    rvs1 = run("rvs_simrank", 0.5, 1)
    checks = [
        _chain_check(
            "blend(k=1,C=1,lam=1) = in-link(k=1,C=1) = normalized shared-citer counts",
            [run("prank", 1.0, 1), sim1, ref],
            tolerance,
        ),
        _chain_check(
            "blend(k=1,C=1,lam=0) = out-link(k=1,C=1)",
            [run("prank", 0.0, 1), rvs1],
            tolerance,
        ),
        _chain_check(
            "blend(lam=1,k=5) = in-link(k=5)",
            [run("prank", 1.0, 5), run("simrank", 0.5, 5)],
            tolerance,
        ),
        _chain_check(
            "blend(lam=0,k=5) = out-link(k=5)",
            [run("prank", 0.0, 5), run("rvs_simrank", 0.5, 5)],
            tolerance,
        ),
    ]
    return ReductionReport(tuple(checks))


def _chain_check(name, mats, tol):
    diff = 0.0
    for a, b in zip(mats, mats[1:]):
        d = float(np.max(np.abs(a - b))) if a.size else 0.0
        diff = max(diff, d)
    return IdentityCheck(name, diff, tol, diff <= tol)


def write_iteration_csv(report: IterationReport, path):
    """Write `iteration,max_delta` rows, iterations numbered from 1."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("iteration,max_delta\n")
        for i, d in enumerate(report.max_delta_per_iteration, start=1):
            fh.write(f"{i},{SCORE_FORMAT % d}\n")
