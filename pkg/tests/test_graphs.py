import itertools
import math

import numpy as np
import pytest

from gbsdock.exceptions import ValidationError
from gbsdock.graphs import (
    WeightedGraph,
    as_vertex_set,
    clique_weight,
    complete_graph,
    degree,
    degrees,
    from_edges,
    graph_from_dict,
    graph_to_dict,
    induced_subgraph,
    is_clique,
    laplacian,
    load_graph,
    max_weighted_clique_bruteforce,
    max_weighted_clique_with_runner_up,
    save_graph,
    to_dimacs,
)

from conftest import random_graph


def clique_by_double_loop(g, s):
    """Independent clique predicate: check every unordered pair directly."""
    s = list(s)
    for a, b in itertools.combinations(s, 2):
        if g.adjacency[a, b] != 1.0:
            return False
    return True


class TestWeightedGraph:
    def test_rejects_asymmetric(self):
        a = np.zeros((3, 3))
        a[0, 1] = 1.0
        with pytest.raises(ValidationError):
            WeightedGraph(a, np.ones(3))

    def test_rejects_self_loops(self):
        a = np.eye(3)
        with pytest.raises(ValidationError):
            WeightedGraph(a, np.ones(3))

    def test_rejects_non_binary_entries(self):
        a = np.zeros((2, 2))
        a[0, 1] = a[1, 0] = 0.5
        with pytest.raises(ValidationError):
            WeightedGraph(a, np.ones(2))

    def test_rejects_negative_weights(self):
        with pytest.raises(ValidationError):
            from_edges(2, [[0, 1]], [1.0, -0.1])

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            WeightedGraph(np.zeros((0, 0)), np.zeros(0))

    def test_arrays_are_immutable(self):
        g = complete_graph(3)
        with pytest.raises(ValueError):
            g.adjacency[0, 1] = 0.0
        with pytest.raises(ValueError):
            g.vertex_weights[0] = 2.0

    def test_neighbor_masks(self):
        g = from_edges(4, [[0, 1], [1, 3]])
        assert g.neighbor_masks() == (0b0010, 0b1001, 0b0000, 0b0010)


class TestVertexSet:
    def test_sorted_distinct(self):
        assert as_vertex_set([3, 1, 1, 2], 5) == (1, 2, 3)

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            as_vertex_set([0, 5], 5)
        with pytest.raises(ValidationError):
            as_vertex_set([-1], 5)


class TestCliquePredicates:
    def test_small_sets_are_cliques(self):
        g = from_edges(3, [])
        assert is_clique(g, [])
        assert is_clique(g, [2])

    def test_triangle(self):
        g = from_edges(3, [[0, 1], [1, 2], [0, 2]])
        assert is_clique(g, [0, 1, 2])
        g2 = from_edges(3, [[0, 1], [1, 2]])
        assert not is_clique(g2, [0, 1, 2])

    def test_matches_double_loop_oracle(self, rng):
        for _ in range(300):
            n = int(rng.integers(2, 12))
            g = random_graph(rng, n, density=rng.random())
            k = int(rng.integers(0, n + 1))
            s = rng.choice(n, size=k, replace=False)
            assert is_clique(g, s) == clique_by_double_loop(g, s)

    def test_clique_weight_sums_members(self):
        g = from_edges(4, [[0, 1]], [0.5, 1.5, 2.0, 3.0])
        assert clique_weight(g, [0, 1]) == pytest.approx(2.0)
        assert clique_weight(g, []) == 0.0

    def test_is_clique_iff_subgraph_edge_count(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 10))
            g = random_graph(rng, n, density=0.5)
            k = int(rng.integers(1, n + 1))
            s = as_vertex_set(rng.choice(n, size=k, replace=False), n)
            sub = induced_subgraph(g, s)
            assert is_clique(g, s) == (sub.n_edges == k * (k - 1) // 2)


class TestSubgraph:
    def test_preserves_weights_and_edges(self):
        g = from_edges(5, [[0, 1], [1, 2], [3, 4]], [1, 2, 3, 4, 5])
        sub = induced_subgraph(g, [1, 2, 4])
        assert sub.n == 3
        assert sub.vertex_weights.tolist() == [2.0, 3.0, 5.0]
        assert sub.adjacency[0, 1] == 1.0 and sub.adjacency[0, 2] == 0.0

    def test_empty_selection_rejected(self):
        g = complete_graph(3)
        with pytest.raises(ValidationError):
            induced_subgraph(g, [])


class TestDegreesLaplacian:
    def test_degree(self):
        g = from_edges(4, [[0, 1], [0, 2], [0, 3]])
        assert degree(g, 0) == 3
        assert degree(g, 2) == 1
        assert degrees(g).tolist() == [3.0, 1.0, 1.0, 1.0]

    def test_degree_range_check(self):
        g = complete_graph(3)
        with pytest.raises(ValidationError):
            degree(g, 3)

    def test_laplacian_rows_sum_to_zero(self, rng):
        g = random_graph(rng, 8)
        L = laplacian(g)
        np.testing.assert_allclose(L.sum(axis=1), 0.0, atol=1e-12)

    def test_laplacian_psd(self, rng):
        for _ in range(50):
            g = random_graph(rng, int(rng.integers(2, 15)), density=rng.random())
            evals = np.linalg.eigvalsh(laplacian(g))
            assert evals.min() >= -1e-9


class TestBruteforce:
    def test_triangle_equal_weights(self):
        g = from_edges(3, [[0, 1], [1, 2], [0, 2]], [1, 1, 1])
        assert max_weighted_clique_bruteforce(g) == (0, 1, 2)

    def test_two_disjoint_edges(self):
        g = from_edges(4, [[0, 1], [2, 3]], [3, 3, 1, 1])
        assert max_weighted_clique_bruteforce(g) == (0, 1)

    def test_tie_breaks_lexicographically(self):
        g = from_edges(4, [[0, 1], [2, 3]], [1, 1, 1, 1])
        assert max_weighted_clique_bruteforce(g) == (0, 1)
        g2 = from_edges(4, [[2, 3], [0, 1]], [2, 2, 2, 2])
        assert max_weighted_clique_bruteforce(g2) == (0, 1)

    def test_all_zero_weights_returns_empty(self):
        g = complete_graph(3, weights=[0, 0, 0])
        assert max_weighted_clique_bruteforce(g) == ()

    def test_runner_up_tracks_second_best(self):
        g = from_edges(4, [[0, 1], [2, 3]], [3, 3, 1, 1])
        best, w, second = max_weighted_clique_with_runner_up(g)
        assert (best, w) == ((0, 1), 6.0)
        assert second == pytest.approx(3.0)

    def test_runner_up_equals_best_on_weight_tie(self):
        g = from_edges(4, [[0, 1], [2, 3]], [1, 1, 1, 1])
        _, w, second = max_weighted_clique_with_runner_up(g)
        assert w == second == 2.0

    def test_guard_on_large_n(self):
        g = complete_graph(31)
        with pytest.raises(ValidationError):
            max_weighted_clique_bruteforce(g)

    def test_output_is_clique_and_dominates_sampled_cliques(self, rng):
        for _ in range(30):
            n = int(rng.integers(3, 13))
            g = random_graph(rng, n, density=0.6)
            best, w, _ = max_weighted_clique_with_runner_up(g)
            assert is_clique(g, best)
            assert clique_weight(g, best) == pytest.approx(w)
            for _ in range(50):
                k = int(rng.integers(1, n + 1))
                s = rng.choice(n, size=k, replace=False)
                if is_clique(g, s):
                    assert clique_weight(g, s) <= w + 1e-9


class TestSerialization:
    def test_json_round_trip(self, tmp_path, rng):
        g = random_graph(rng, 9, density=0.4)
        path = tmp_path / "g.json"
        save_graph(g, path)
        g2 = load_graph(path)
        np.testing.assert_array_equal(g.adjacency, g2.adjacency)
        np.testing.assert_allclose(g.vertex_weights, g2.vertex_weights)

    def test_dict_requires_keys(self):
        with pytest.raises(ValidationError):
            graph_from_dict({"n": 3, "edges": []})

    def test_meta_passthrough(self):
        g = complete_graph(2, [1, 2])
        d = graph_to_dict(g, meta={"tau": 1.0})
        assert d["meta"]["tau"] == 1.0
        g2 = graph_from_dict(d)
        assert g2.n == 2

    def test_dimacs_lines(self):
        g = from_edges(3, [[0, 2]], [1.0, 0.25, 2.0])
        text = to_dimacs(g)
        lines = text.strip().split("\n")
        assert lines[0] == "p edge 3 1"
        assert "c w 2 0.25" in lines
        assert lines[-1] == "e 1 3"

    def test_bad_json_file(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        with pytest.raises(ValidationError):
            load_graph(p)
