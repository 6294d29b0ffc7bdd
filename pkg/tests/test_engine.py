import warnings

import numpy as np
import pytest

from citesim import fixtures
from citesim.engine import (
    MeasureConfig,
    amsler,
    cocitation,
    compute,
    converge,
    coupling,
    crank_jaccard,
    iterate_pairwise,
    iteration_scores,
    na_mask,
    reduction_check,
    top_k,
    write_iteration_csv,
)
from citesim.errors import ConfigError
from citesim.graph import CitationGraph
from citesim.matrix import SimilarityMatrix

import oracles


# -- configuration -----------------------------------------------------------


def test_config_defaults():
    cfg = MeasureConfig("crank")
    assert (cfg.C, cfg.lam, cfg.k_max, cfg.epsilon) == (0.8, 0.5, 10, 1e-4)
    assert cfg.normalization == "jaccard"
    assert MeasureConfig("simrank").normalization == "pairwise"
    assert MeasureConfig("cocitation").normalization == "raw_count"
    assert MeasureConfig("crank").label() == "crank:jaccard"


def test_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        MeasureConfig("pagerank")
    with pytest.raises(ConfigError):
        MeasureConfig("simrank", "jaccard")
    with pytest.raises(ConfigError):
        MeasureConfig("crank", "raw_count")
    with pytest.raises(ConfigError):
        MeasureConfig("cocitation", "pairwise")
    with pytest.raises(ConfigError):
        MeasureConfig("crank", C=1.5)
    with pytest.raises(ConfigError):
        MeasureConfig("crank", C=-0.1)
    with pytest.raises(ConfigError):
        MeasureConfig("prank", lam=2.0)
    with pytest.raises(ConfigError):
        MeasureConfig("crank", k_max=0)
    with pytest.raises(ConfigError):
        MeasureConfig("crank", epsilon=0.0)


def test_boundary_parameters_allowed():
    assert MeasureConfig("simrank", C=1.0).C == 1.0
    assert MeasureConfig("simrank", C=0.0).C == 0.0
    assert MeasureConfig("prank", lam=0.0).lam == 0.0
    assert MeasureConfig("prank", lam=1.0).lam == 1.0


# -- one-shot measures -------------------------------------------------------


def test_shared_citer_counts(shared_graph):
    g = shared_graph
    m = cocitation(g, MeasureConfig("cocitation", "raw_count"))
    assert m.get(g.id_of("e"), g.id_of("f")) == 1.0
    assert m.get(g.id_of("a"), g.id_of("c")) == 0.0
    assert m.get(g.id_of("d"), g.id_of("g")) == 1.0
    assert not m.bounded
    mj = cocitation(g, MeasureConfig("cocitation", "jaccard"))
    assert mj.get(g.id_of("e"), g.id_of("f")) == 1.0
    assert mj.get(g.id_of("a"), g.id_of("c")) == 0.0
    assert mj.bounded


def test_shared_reference_counts(shared_graph):
    g = shared_graph
    m = coupling(g, MeasureConfig("coupling", "raw_count"))
    assert m.get(g.id_of("e"), g.id_of("f")) == 1.0
    mj = coupling(g, MeasureConfig("coupling", "jaccard"))
    assert mj.get(g.id_of("e"), g.id_of("f")) == 1.0


def test_diagonal_is_one_even_for_raw_counts(shared_graph):
    # node i cites two papers; its raw self-intersection count would be 2
    m = coupling(shared_graph, MeasureConfig("coupling", "raw_count"))
    for p in range(shared_graph.n):
        assert m.get(p, p) == 1.0


def test_blend_collapses_to_its_ends(shared_graph):
    g = shared_graph
    m = amsler(g, MeasureConfig("amsler", "raw_count"))
    assert m.get(g.id_of("e"), g.id_of("f")) == 1.0
    for mode in ("raw_count", "jaccard"):
        all_in = amsler(g, MeasureConfig("amsler", mode, lam=1.0))
        assert all_in.same_bits(cocitation(g, MeasureConfig("cocitation", mode)))
        all_out = amsler(g, MeasureConfig("amsler", mode, lam=0.0))
        assert all_out.same_bits(coupling(g, MeasureConfig("coupling", mode)))


def test_one_shot_measures_match_oracle(gap_graph):
    g = gap_graph
    for mode in ("raw_count", "jaccard"):
        m = cocitation(g, MeasureConfig("cocitation", mode))
        assert oracles.max_abs_diff(m, oracles.shared_count_scores(g, "in", mode)) == 0.0
        m = coupling(g, MeasureConfig("coupling", mode))
        assert oracles.max_abs_diff(m, oracles.shared_count_scores(g, "out", mode)) == 0.0
        m = amsler(g, MeasureConfig("amsler", mode, lam=0.25))
        assert (
            oracles.max_abs_diff(m, oracles.blend_count_scores(g, 0.25, mode)) <= 1e-15
        )


def test_measure_config_mismatch_rejected(shared_graph):
    with pytest.raises(ConfigError):
        cocitation(shared_graph, MeasureConfig("coupling"))
    with pytest.raises(ConfigError):
        crank_jaccard(shared_graph, MeasureConfig("crank", "pairwise"))
    with pytest.raises(ConfigError):
        iterate_pairwise(shared_graph, MeasureConfig("crank", "jaccard"))
    with pytest.raises(ConfigError):
        converge(shared_graph, MeasureConfig("cocitation"))


# -- iterative measures ------------------------------------------------------


def test_first_iteration_shared_ratio(shared_graph):
    g = shared_graph
    cfg = MeasureConfig("crank", "jaccard", C=0.8, k_max=1, epsilon=1e-300)
    m, report = crank_jaccard(g, cfg)
    assert m.get(g.id_of("e"), g.id_of("f")) == 0.8
    assert report.iterations_run == 1
    assert oracles.max_abs_diff(m, oracles.first_step_closed_form(g, 0.8)) == 0.0


def test_star_normalization_contrast():
    for k in (2, 4, 8):
        g = fixtures.star_graph(k)
        cfg = MeasureConfig("simrank", "pairwise", C=1.0, k_max=1, epsilon=1e-300)
        m, _ = iterate_pairwise(g, cfg)
        assert m.get(0, 1) == 1.0 / k
        mj = cocitation(g, MeasureConfig("cocitation", "jaccard"))
        assert mj.get(0, 1) == 1.0


def test_single_step_in_link_closed_form(shared_graph):
    g = shared_graph
    cfg = MeasureConfig("simrank", "pairwise", C=1.0, k_max=1, epsilon=1e-300)
    m, _ = iterate_pairwise(g, cfg)
    for p in range(g.n):
        for q in range(g.n):
            ip = g.neighbors(p, "in")
            iq = g.neighbors(q, "in")
            if p == q:
                want = 1.0
            elif not ip or not iq:
                want = 0.0
            else:
                want = len(ip & iq) / (len(ip) * len(iq))
            assert m.get(p, q) == pytest.approx(want, abs=1e-15)


def test_iterative_measures_match_oracle(gap_graph):
    g = gap_graph
    for k in (1, 3):
        m, _ = iterate_pairwise(g, MeasureConfig("simrank", k_max=k, epsilon=1e-300))
        assert oracles.max_abs_diff(m, oracles.pairwise_scores(g, "in", 0.8, k)) <= 1e-12
        m, _ = iterate_pairwise(g, MeasureConfig("rvs_simrank", k_max=k, epsilon=1e-300))
        assert oracles.max_abs_diff(m, oracles.pairwise_scores(g, "out", 0.8, k)) <= 1e-12
        m, _ = iterate_pairwise(
            g, MeasureConfig("prank", lam=0.3, k_max=k, epsilon=1e-300)
        )
        assert oracles.max_abs_diff(m, oracles.blend_scores(g, 0.8, 0.3, k)) <= 1e-12
        m, _ = iterate_pairwise(
            g, MeasureConfig("crank", "pairwise", k_max=k, epsilon=1e-300)
        )
        assert (
            oracles.max_abs_diff(m, oracles.pairwise_scores(g, "undirected", 0.8, k))
            <= 1e-12
        )
        m, _ = crank_jaccard(g, MeasureConfig("crank", "jaccard", k_max=k, epsilon=1e-300))
        assert (
            oracles.max_abs_diff(m, oracles.undirected_jaccard_scores(g, 0.8, k))
            <= 1e-12
        )


def test_diagonal_stays_one_through_iterations(gap_graph):
    cfg = MeasureConfig("crank", "jaccard", k_max=6, epsilon=1e-300)
    for _, square in iteration_scores(gap_graph, cfg):
        assert np.all(np.diag(square) == 1.0)


def test_report_semantics(shared_graph):
    cfg = MeasureConfig("crank", "jaccard", epsilon=2.0, k_max=50)
    m, report = crank_jaccard(shared_graph, cfg)
    assert report.iterations_run == 1 and report.converged
    assert m.k == 1
    cfg = MeasureConfig("crank", "jaccard", epsilon=1e-300, k_max=3)
    m, report = crank_jaccard(shared_graph, cfg)
    assert report.iterations_run == 3 and not report.converged
    assert len(report.max_delta_per_iteration) == 3
    cfg = MeasureConfig("crank", "jaccard", epsilon=1e-6, k_max=200)
    _, report = crank_jaccard(shared_graph, cfg)
    assert report.converged
    assert report.max_delta_per_iteration[-1] < 1e-6


def test_convergence_warns_only_at_no_decay(shared_graph):
    with pytest.warns(RuntimeWarning):
        converge(shared_graph, MeasureConfig("simrank", C=1.0, k_max=2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        iterate_pairwise(shared_graph, MeasureConfig("simrank", C=1.0, k_max=2))
        converge(shared_graph, MeasureConfig("simrank", C=0.8, k_max=2))


def test_converge_dispatch_matches_direct_calls(shared_graph):
    cfg = MeasureConfig("crank", "jaccard", k_max=4, epsilon=1e-300)
    via_converge, _ = converge(shared_graph, cfg)
    direct, _ = crank_jaccard(shared_graph, cfg)
    assert via_converge.same_bits(direct)
    cfg = MeasureConfig("simrank", k_max=4, epsilon=1e-300)
    via_converge, _ = converge(shared_graph, cfg)
    direct, _ = iterate_pairwise(shared_graph, cfg)
    assert via_converge.same_bits(direct)


def test_compute_covers_every_measure(shared_graph):
    from citesim.engine import MEASURES

    for name in MEASURES:
        m, report = compute(shared_graph, MeasureConfig(name))
        assert m.n == shared_graph.n
        if name in ("cocitation", "coupling", "amsler"):
            assert report is None and m.k == 0
        else:
            assert report is not None and m.k == report.iterations_run


def test_custom_start_forces_diagonal(shared_graph):
    cfg = MeasureConfig("crank", "jaccard", k_max=1)
    start = np.full((shared_graph.n, shared_graph.n), 0.9)
    k, square = next(iteration_scores(shared_graph, cfg, initial=start))
    assert k == 1
    assert np.all(np.diag(square) == 1.0)
    assert np.array_equal(square, square.T)


def test_empty_and_single_node_graphs():
    empty = CitationGraph.from_edges(0, [])
    m, report = crank_jaccard(empty, MeasureConfig("crank", "jaccard"))
    assert m.n == 0 and report.converged
    single = CitationGraph.from_edges(1, [])
    m, report = iterate_pairwise(single, MeasureConfig("simrank"))
    assert m.get(0, 0) == 1.0 and report.converged
    assert reduction_check(empty).passed


# -- N/A structure -----------------------------------------------------------


def test_na_pair_counts_on_fixtures(shared_graph, gap_graph):
    def count(g, name, norm=None):
        mask = na_mask(g, MeasureConfig(name, norm))
        return int(np.triu(mask, 1).sum())

    assert count(shared_graph, "simrank") == 17
    assert count(shared_graph, "rvs_simrank") == 24
    assert count(shared_graph, "prank") == 6
    assert count(shared_graph, "crank", "pairwise") == 0
    assert count(shared_graph, "crank", "jaccard") == 0
    assert count(gap_graph, "simrank") == 38
    assert count(gap_graph, "rvs_simrank") == 21
    assert count(gap_graph, "prank") == 8
    assert count(gap_graph, "crank", "jaccard") == 0


def test_na_masks_match_oracle(gap_graph):
    for name in ("simrank", "rvs_simrank", "prank"):
        mask = na_mask(gap_graph, MeasureConfig(name))
        got = {
            (p, q)
            for p in range(gap_graph.n)
            for q in range(p + 1, gap_graph.n)
            if mask[p, q]
        }
        assert got == oracles.na_pairs(gap_graph, name)


def test_na_never_on_diagonal():
    g = fixtures.random_graph(6, 0.0, seed=0)  # every node isolated
    upper = np.triu_indices(g.n, 1)
    for name in ("simrank", "rvs_simrank", "prank"):
        mask = na_mask(g, MeasureConfig(name))
        assert not mask.diagonal().any()
        assert mask[upper].all()  # all off-diagonal pairs unmeasurable
    mask = na_mask(g, MeasureConfig("crank", "pairwise"))
    assert mask[upper].all()


def test_na_matrix_entries_flagged(gap_graph, gap_ids):
    m, _ = iterate_pairwise(gap_graph, MeasureConfig("simrank"))
    assert m.is_na(gap_ids["k"], gap_ids["l"])
    assert m.get(gap_ids["k"], gap_ids["l"]) == 0.0
    assert m.na_count() == 38


# -- ranking -----------------------------------------------------------------


def _toy_matrix():
    m = SimilarityMatrix(5)
    m.set(0, 1, 0.9)
    m.set(0, 2, 0.5)
    # (0, 3) stays 0.0; (0, 4) is unmeasurable
    m.set_na(0, 4)
    return m


def test_top_k_ordering_and_fill():
    m = _toy_matrix()
    got = top_k(m, 0, 10)
    assert [(e.paper, e.score, e.zero_fill) for e in got] == [
        (1, 0.9, False),
        (2, 0.5, False),
        (3, 0.0, True),
    ]
    bare = top_k(m, 0, 10, zero_fill=False)
    assert [(e.paper, e.score) for e in bare] == [(1, 0.9), (2, 0.5)]
    assert top_k(m, 0, 1)[0].paper == 1


def test_top_k_breaks_ties_by_ascending_id():
    m = SimilarityMatrix(5)
    for q in (1, 2, 3, 4):
        m.set(0, q, 0.5)
    assert [e.paper for e in top_k(m, 0, 3)] == [1, 2, 3]


def test_top_k_rejects_bad_arguments():
    m = _toy_matrix()
    with pytest.raises(ValueError):
        top_k(m, 5, 3)
    with pytest.raises(ValueError):
        top_k(m, 0, 0)


def test_top_k_matches_brute_force_sort(shared_graph):
    g = shared_graph
    cfg = MeasureConfig("crank", "jaccard", k_max=10, epsilon=1e-300)
    m, _ = crank_jaccard(g, cfg)
    oracle = oracles.undirected_jaccard_scores(g, 0.8, 10)
    query = g.id_of("e")
    want = sorted(
        ((q, s) for (p, q), s in oracle.items() if p == query and q != query and s > 0),
        key=lambda t: (-t[1], t[0]),
    )[:3]
    got = [(e.paper, e.score) for e in top_k(m, query, 3, zero_fill=False)]
    assert [p for p, _ in got] == [p for p, _ in want]
    assert got[0][1] == pytest.approx(want[0][1], abs=1e-12)


# -- collapse identities and determinism -------------------------------------


def test_reduction_identities_on_fixtures(shared_graph, gap_graph):
    for g in (shared_graph, gap_graph, fixtures.star_graph(4)):
        report = reduction_check(g)
        assert len(report.checks) == 4
        assert report.passed, report.failures()
        for check in report.checks:
            assert check.max_abs_diff <= check.tolerance == 1e-12


def test_identical_runs_are_bit_identical():
    g = fixtures.random_graph(90, 0.05, seed=11)
    cfg = MeasureConfig("crank", "jaccard", k_max=6, epsilon=1e-300)
    a, _ = crank_jaccard(g, cfg)
    b, _ = crank_jaccard(g, cfg)
    assert a.same_bits(b)


def test_thread_count_does_not_change_bits():
    g = fixtures.random_graph(150, 0.03, seed=12)
    for name, norm in (("crank", "jaccard"), ("simrank", None), ("prank", None)):
        cfg = MeasureConfig(name, norm, k_max=5, epsilon=1e-300)
        base, _ = compute(g, cfg, threads=1)
        for threads in (2, 5):
            other, _ = compute(g, cfg, threads=threads)
            assert base.same_bits(other), (name, threads)
    one = cocitation(g, MeasureConfig("cocitation"), threads=1)
    four = cocitation(g, MeasureConfig("cocitation"), threads=4)
    assert one.same_bits(four)


def test_iteration_csv(tmp_path, shared_graph):
    cfg = MeasureConfig("crank", "jaccard", k_max=3, epsilon=1e-300)
    _, report = crank_jaccard(shared_graph, cfg)
    path = tmp_path / "trace.csv"
    write_iteration_csv(report, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,max_delta"
    assert len(lines) == 4
    assert float(lines[1].split(",")[1]) == report.max_delta_per_iteration[0]
