"""Property-based checks for the iterative similarity engine.

Graphs are drawn small (n <= 9) so the brute-force reference stays cheap;
the bounds being exercised do not depend on scale.
"""

import numpy as np
from hypothesis import given, settings, strategies as st

from citesim.engine import (
    MeasureConfig,
    crank_jaccard,
    iterate_pairwise,
    iteration_scores,
    na_mask,
    top_k,
)

import oracles
from citesim.graph import CitationGraph


@st.composite
def graphs(draw, min_n=2, max_n=9):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    edges = draw(st.sets(st.sampled_from(pairs), max_size=3 * n))
    return CitationGraph.from_edges(n, sorted(edges))


@settings(max_examples=40, deadline=None)
@given(graphs(), st.floats(min_value=0.1, max_value=0.95))
def test_undirected_jaccard_invariants(g, C):
    cfg = MeasureConfig("crank", "jaccard", C=C, k_max=6)
    prev = None
    for _, square in iteration_scores(g, cfg):
        assert np.array_equal(square, square.T)
        assert np.all(np.diag(square) == 1.0)
        off = square[~np.eye(g.n, dtype=bool)]
        assert np.all(off >= 0.0)
        assert np.all(off <= C + 1e-12)
        if prev is not None:
            assert np.min(square - prev) >= -1e-12
        prev = square


@settings(max_examples=25, deadline=None)
@given(graphs(max_n=6), st.integers(min_value=1, max_value=2))
def test_all_iterative_forms_match_brute_force(g, k):
    runs = [
        (iterate_pairwise, MeasureConfig("simrank", k_max=k, epsilon=1e-300),
         oracles.pairwise_scores(g, "in", 0.8, k)),
        (iterate_pairwise, MeasureConfig("rvs_simrank", k_max=k, epsilon=1e-300),
         oracles.pairwise_scores(g, "out", 0.8, k)),
        (iterate_pairwise, MeasureConfig("prank", lam=0.5, k_max=k, epsilon=1e-300),
         oracles.blend_scores(g, 0.8, 0.5, k)),
        (iterate_pairwise, MeasureConfig("crank", "pairwise", k_max=k, epsilon=1e-300),
         oracles.pairwise_scores(g, "undirected", 0.8, k)),
        (crank_jaccard, MeasureConfig("crank", "jaccard", k_max=k, epsilon=1e-300),
         oracles.undirected_jaccard_scores(g, 0.8, k)),
    ]
    for driver, cfg, reference in runs:
        matrix, _ = driver(g, cfg)
        assert oracles.max_abs_diff(matrix, reference) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(graphs())
def test_iteration_always_converges(g):
    cfg = MeasureConfig("crank", "jaccard", C=0.5, epsilon=1e-6, k_max=200)
    _, report = crank_jaccard(g, cfg)
    assert report.converged
    assert report.max_delta_per_iteration[-1] < 1e-6


@settings(max_examples=20, deadline=None)
@given(graphs())
def test_fixed_point_is_independent_of_start(g):
    cfg = MeasureConfig("crank", "jaccard", C=0.8, epsilon=1e-8, k_max=400)
    reference, report = crank_jaccard(g, cfg)
    assert report.converged
    start = np.full((g.n, g.n), 0.9)
    prev = None
    square = np.eye(g.n)
    for _, square in iteration_scores(g, cfg, initial=start):
        if prev is not None and np.max(np.abs(square - prev)) < 1e-8:
            break
        prev = square
    assert np.max(np.abs(square - reference.dense_scores())) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(graphs())
def test_blend_gaps_are_intersection_of_directed_gaps(g):
    sim = na_mask(g, MeasureConfig("simrank"))
    rvs = na_mask(g, MeasureConfig("rvs_simrank"))
    blend = na_mask(g, MeasureConfig("prank"))
    assert np.array_equal(blend, sim & rvs)
    assert not na_mask(g, MeasureConfig("crank", "jaccard")).any()


@settings(max_examples=30, deadline=None)
@given(graphs(min_n=3), st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2))
def test_top_k_shape_and_order(g, count, query):
    matrix, _ = crank_jaccard(g, MeasureConfig("crank", "jaccard", k_max=4))
    entries = top_k(matrix, query, count)
    assert len(entries) <= min(count, g.n - 1)
    assert all(e.paper != query for e in entries)
    keys = [(-e.score, e.paper) for e in entries]
    assert keys == sorted(keys)
    for e in entries:
        assert e.zero_fill == (e.score == 0.0)
        assert not matrix.is_na(query, e.paper)
