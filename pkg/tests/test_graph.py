"""Tests for graph construction and the custom graph format."""

import numpy as np
import pytest

from src.models.graph import (
    Graph,
    GraphFamily,
    build_graph,
    from_edge_list,
    load_graph,
    parse_edge_text,
)
from src.shared.exceptions import ConfigurationError


def test_build_named_families():
    """Test edge sets of the named families."""
    assert build_graph(GraphFamily.EMPTY, 3).num_edges == 0
    assert set(build_graph("chain-pbc", 5).edges) == {(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)}
    assert build_graph("complete", 4).num_edges == 6
    assert build_graph("chain", 5).edges == ((0, 1), (1, 2), (2, 3), (3, 4))


@pytest.mark.parametrize(
    "family,n",
    [("empty", 0), ("chain", 2), ("chain-pbc", 2), ("complete", -1)],
)
def test_build_graph_rejects_bad_sizes(family, n):
    """Test that too-small graphs are rejected."""
    with pytest.raises(ConfigurationError):
        build_graph(family, n)


def test_build_graph_rejects_custom():
    with pytest.raises(ConfigurationError, match="from_edge_list"):
        build_graph(GraphFamily.CUSTOM, 5)


def test_edge_list_deduplicates_unordered_pairs():
    """Test that (i, j) and (j, i) collapse to one edge."""
    assert from_edge_list(3, [(0, 1)]).num_edges == 1
    graph = from_edge_list(3, [(0, 1), (1, 0)])
    assert graph.edges == ((0, 1),)
    assert graph.has_edge(1, 0)


def test_edge_list_rejects_self_loops_and_out_of_range():
    with pytest.raises(ConfigurationError, match="self-loop"):
        from_edge_list(2, [(0, 0)])
    with pytest.raises(ConfigurationError, match="outside"):
        from_edge_list(3, [(0, 3)])


def test_graphs_with_same_edge_set_compare_equal():
    assert from_edge_list(4, [(2, 3), (1, 0)]) == from_edge_list(4, [(0, 1), (3, 2)])


def test_family_invariants_are_checked():
    """Test that a family label must match its edges."""
    with pytest.raises(ConfigurationError):
        Graph(3, ((0, 1),), GraphFamily.EMPTY)
    with pytest.raises(ConfigurationError):
        Graph(4, ((0, 1), (1, 2)), GraphFamily.CHAIN)
    with pytest.raises(ConfigurationError):
        Graph(3, ((0, 1), (1, 2)), GraphFamily.COMPLETE)


def test_adjacency_neighbors_and_degree():
    graph = build_graph("chain-pbc", 5)
    a = graph.adjacency()
    assert a.shape == (5, 5)
    assert np.array_equal(a, a.T)
    assert np.all(np.diag(a) == 0)
    assert a.sum() == 2 * graph.num_edges
    assert graph.neighbors()[0] == [1, 4]
    assert all(graph.degree(i) == 2 for i in range(5))


def test_complete_graph_edges_stay_implicit():
    """Test that a large complete graph answers structural queries without listing its edges."""
    n = 100_001
    graph = build_graph("complete", n)
    assert graph.is_implicit
    assert graph.num_edges == n * (n - 1) // 2
    assert graph.degree(17) == n - 1
    assert graph.has_edge(0, n - 1)
    assert not graph.has_edge(3, 3)
    assert "edges" not in vars(graph)


def test_implicit_complete_graph_matches_explicit_edges():
    implicit = build_graph("complete", 5)
    explicit = Graph(5, tuple((i, j) for i in range(5) for j in range(i + 1, 5)), GraphFamily.COMPLETE)
    assert implicit == explicit
    assert hash(implicit) == hash(explicit)
    assert implicit.edges == explicit.edges
    assert np.array_equal(implicit.adjacency(), explicit.adjacency())
    assert implicit.neighbors() == explicit.neighbors()


def test_parse_family_specifiers():
    assert GraphFamily.parse("chain-pbc") == (GraphFamily.CHAIN_PBC, None)
    assert GraphFamily.parse("custom:graphs/a.txt") == (GraphFamily.CUSTOM, "graphs/a.txt")
    with pytest.raises(ConfigurationError, match="Unknown graph family"):
        GraphFamily.parse("lattice")
    with pytest.raises(ConfigurationError, match="requires a path"):
        GraphFamily.parse("custom")
    with pytest.raises(ConfigurationError, match="takes no path"):
        GraphFamily.parse("chain:x.txt")


def test_parse_edge_text_skips_comments_and_blank_lines():
    text = "# header\n\n4  # vertices\n0 1\n\n2 3 # second edge\n"
    graph = parse_edge_text(text)
    assert graph.n == 4
    assert graph.edges == ((0, 1), (2, 3))
    assert graph.family is GraphFamily.CUSTOM


def test_parse_edge_text_reports_line_numbers():
    """Test that malformed lines are reported with their line number."""
    with pytest.raises(ConfigurationError, match="line 3"):
        parse_edge_text("3\n0 1\n0 x\n")
    with pytest.raises(ConfigurationError, match="line 1"):
        parse_edge_text("3 4\n")
    with pytest.raises(ConfigurationError, match="vertex count"):
        parse_edge_text("# nothing here\n")


def test_load_graph(custom_graph_path, tmp_path):
    graph = load_graph(custom_graph_path)
    assert graph.n == 5
    assert graph.num_edges == 5
    assert graph.degree(2) == 3

    with pytest.raises(ConfigurationError, match="cannot read"):
        load_graph(tmp_path / "missing.txt")
