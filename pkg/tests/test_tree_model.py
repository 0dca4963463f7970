"""
tests/test_tree_model.py
========================
Validation, tree families, frequency sampling and structural quantities.
"""

import math

import networkx as nx
import numpy as np
import pytest
from pydantic import ValidationError

from errors import BadParameters, LengthMismatch, NonFiniteFrequency, NotATree
from tree_model import (
    NormalDistribution,
    RootedTree,
    UniformDistribution,
    build_graph,
    build_tree,
    dfs_order,
    diameter,
    edge_partitions,
    generate_topology,
    generate_tree,
    max_partition_size,
    parse_distribution,
    parse_kind,
    sample_frequencies,
    stream_rng,
)


def _tree(kind, n, seed=0):
    return build_tree(n, generate_topology(kind, n, seed), np.zeros(n))


# ------------------ Validation ------------------


def test_smallest_tree_is_valid():
    tree = build_tree(2, [(0, 1)], [0.0, 1.0])
    assert tree.n == 2
    assert tree.edges == ((0, 1),)
    assert tree.mean_frequency == 0.5


def test_cycle_is_rejected():
    with pytest.raises(NotATree):
        build_tree(3, [(0, 1), (1, 2), (2, 0)], [0.0, 0.5, 1.0])


def test_disconnected_edge_list_is_rejected():
    with pytest.raises(NotATree):
        build_tree(4, [(0, 1), (2, 3)], [0.0, 0.0, 0.0, 0.0])
    with pytest.raises(NotATree):
        build_tree(4, [(0, 1), (1, 2), (0, 2)], [0.0, 0.0, 0.0, 0.0])


@pytest.mark.parametrize(
    "edges",
    [
        [(0, 1), (1, 3)],  # vertex out of range
        [(0, 1), (1, 1)],  # self-loop
        [(0, 1), (1, 0)],  # repeated edge
        [(0, 1, 2), (1, 2)],  # not a pair
    ],
)
def test_malformed_edges_are_rejected(edges):
    with pytest.raises(NotATree):
        build_tree(3, edges, [0.0, 0.0, 0.0])


def test_frequency_vector_must_match_and_be_finite():
    with pytest.raises(LengthMismatch):
        build_tree(3, [(0, 1), (1, 2)], [0.0, 1.0])
    with pytest.raises(NonFiniteFrequency):
        build_tree(3, [(0, 1), (1, 2)], [0.0, math.nan, 1.0])
    with pytest.raises(NonFiniteFrequency):
        build_tree(3, [(0, 1), (1, 2)], [0.0, math.inf, 1.0])
    with pytest.raises(LengthMismatch):
        build_tree(3, [(0, 1), (1, 2)], [0.0, 0.5, 1.0], labels=["a", "b"])


def test_edge_order_is_preserved():
    tree = build_tree(4, [(2, 3), (0, 1), (1, 2)], [0.0, 0.1, 0.2, 0.3])
    assert tree.edges == ((2, 3), (0, 1), (1, 2))


def test_frequencies_are_read_only():
    tree = build_tree(2, [(0, 1)], [0.0, 1.0])
    with pytest.raises(ValueError):
        tree.freqs[0] = 3.0


def test_with_frequencies_keeps_topology(chain3):
    other = chain3.with_frequencies([1.0, 2.0, 3.0])
    assert other.edges == chain3.edges
    assert other.mean_frequency == 2.0
    with pytest.raises(LengthMismatch):
        chain3.with_frequencies([1.0, 2.0])


def test_build_graph_allows_cycles_but_not_disconnection():
    graph = build_graph(3, [(0, 1), (1, 2), (2, 0)], [0.0, 0.5, 1.0])
    assert len(graph.edges) == 3
    with pytest.raises(BadParameters):
        build_graph(4, [(0, 1), (2, 3)], [0.0] * 4)


# ------------------ Families ------------------


def test_parse_kind():
    assert parse_kind("chain") == ("chain", None)
    assert parse_kind("tadpole(8)") == ("tadpole", 8)
    for bad in ["hexagon", "tadpole", "chain(3)", ""]:
        with pytest.raises(BadParameters):
            parse_kind(bad)


def test_chain_edges_and_diameter():
    assert generate_topology("chain", 4) == [(0, 1), (1, 2), (2, 3)]
    assert diameter(_tree("chain", 60)) == 59


def test_star_shape():
    tree = _tree("star", 60)
    assert diameter(tree) == 2
    assert max(len(nbrs) for nbrs in tree.neighbors) == 59
    assert max_partition_size(tree) == 1


def test_dumbbell_shape():
    edges = generate_topology("dumbbell", 6)
    assert edges == [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)]
    tree = _tree("dumbbell", 100)
    assert diameter(tree) == 3
    assert max_partition_size(tree) == 50
    with pytest.raises(BadParameters):
        generate_topology("dumbbell", 7)


def test_binary_tree_of_255_vertices():
    tree = _tree("binary", 255)
    assert len(tree.edges) == 254
    depth = np.zeros(255, dtype=int)
    rooted = tree.rooted
    for v in rooted.order[1:]:
        depth[v] = depth[rooted.parent[v]] + 1
    assert depth.max() == 7
    assert all(p == (c - 1) // 2 for p, c in tree.edges)


@pytest.mark.parametrize("n", [9, 17, 40, 100])
def test_tadpole_has_its_diameter(n):
    assert diameter(_tree("tadpole(8)", n)) == 8


def test_tadpole_partition_size():
    assert max_partition_size(_tree("tadpole(8)", 14)) == 7
    assert max_partition_size(_tree("tadpole(8)", 60)) == 7
    with pytest.raises(BadParameters):
        generate_topology("tadpole(8)", 8)
    with pytest.raises(BadParameters):
        generate_topology("tadpole(2)", 10)


@pytest.mark.parametrize("kind", ["random_uniform", "scale_free"])
def test_random_families_are_seeded_trees(kind):
    for n in [2, 3, 10, 57]:
        edges = generate_topology(kind, n, seed=11)
        assert len(edges) == n - 1
        assert nx.is_tree(nx.Graph(edges)) if n > 2 else edges == [(0, 1)]
        assert generate_topology(kind, n, seed=11) == edges


def test_random_topology_depends_on_seed():
    assert generate_topology("random_uniform", 30, seed=1) != generate_topology(
        "random_uniform", 30, seed=2
    )


def test_uniform_random_trees_have_a_leaf_fraction_near_one_over_e():
    n = 300
    fractions = []
    for seed in range(200):
        degrees = np.bincount(np.array(generate_topology("random_uniform", n, seed=seed)).ravel(), minlength=n)
        fractions.append(np.count_nonzero(degrees == 1) / n)
    assert np.mean(fractions) == pytest.approx(math.exp(-1.0), rel=0.02)


def test_generator_rejects_tiny_trees():
    with pytest.raises(BadParameters):
        generate_topology("chain", 1)


# ------------------ Frequencies ------------------


def test_stream_rng_is_deterministic_and_split():
    a = stream_rng(7, 3).random(5)
    b = stream_rng(7, 3).random(5)
    c = stream_rng(7, 4).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_same_seed_gives_same_frequencies():
    dist = UniformDistribution()
    assert np.array_equal(sample_frequencies(dist, 50, 9), sample_frequencies(dist, 50, 9))


def test_uniform_sample_mean():
    freqs = sample_frequencies(UniformDistribution(), 1_000_000, 0)
    assert abs(freqs.mean() - 0.5) < 0.002
    assert freqs.min() >= 0.0 and freqs.max() < 1.0


def test_normal_defaults_match_uniform_moments():
    freqs = sample_frequencies(NormalDistribution(), 1_000_000, 0)
    assert abs(freqs.mean() - 0.5) < 0.002
    assert freqs.var() == pytest.approx(1.0 / 12.0, rel=0.01)


def test_distribution_parameters_are_validated():
    with pytest.raises(ValidationError):
        UniformDistribution(lo=1.0, hi=0.0)
    with pytest.raises(ValidationError):
        NormalDistribution(sd=0.0)
    with pytest.raises(BadParameters):
        parse_distribution("cauchy")
    assert parse_distribution("uniform", lo=None, hi=2.0).hi == 2.0
    with pytest.raises(BadParameters):
        sample_frequencies(UniformDistribution(), 0, 0)


def test_generate_tree_uses_one_seed_for_both_parts():
    a = generate_tree("random_uniform", 20, UniformDistribution(), seed=5)
    b = generate_tree("random_uniform", 20, UniformDistribution(), seed=5)
    assert a.edges == b.edges
    assert np.array_equal(a.freqs, b.freqs)


# ------------------ Structure ------------------


def test_chain3_partitions():
    parts = edge_partitions(_tree("chain", 3))
    assert [p.edge for p in parts] == [(0, 1), (1, 2)]
    assert [set(p.side) for p in parts] == [{0}, {2}]
    assert [p.size for p in parts] == [1, 1]


def test_star_partitions_are_leaves():
    parts = edge_partitions(_tree("star", 5))
    assert len(parts) == 4
    assert sorted(tuple(p.side) for p in parts) == [(1,), (2,), (3,), (4,)]


def test_dumbbell_partition_sizes():
    parts = edge_partitions(_tree("dumbbell", 6))
    assert sorted(p.size for p in parts) == [1, 1, 1, 1, 3]


def test_partition_sides_match_networkx_components():
    tree = _tree("random_uniform", 40, seed=3)
    for part in edge_partitions(tree):
        g = tree.graph.copy()
        g.remove_edge(*part.edge)
        sizes = sorted(len(c) for c in nx.connected_components(g))
        assert part.size == sizes[0]
        assert sizes[0] + sizes[1] == tree.n


@pytest.mark.parametrize("n", [4, 10, 61])
def test_chain_partition_size(n):
    assert max_partition_size(_tree("chain", n)) == n // 2


def test_diameter_matches_networkx():
    for seed in range(10):
        tree = _tree("random_uniform", 30, seed=seed)
        assert diameter(tree) == nx.diameter(tree.graph)


def test_dfs_order_of_example_tree(trees_dir):
    from schemas import read_tree

    tree = read_tree(trees_dir / "dfs_example_8.json")
    assert dfs_order(tree).tolist() == [0, 1, 3, 4, 2, 5, 6, 7]


def test_dfs_order_on_chain_from_an_end():
    assert dfs_order(_tree("chain", 6), 0).tolist() == [0, 1, 2, 3, 4, 5]
    assert dfs_order(_tree("chain", 6), 5).tolist() == [5, 4, 3, 2, 1, 0]


@pytest.mark.parametrize("kind,n", [("random_uniform", 50), ("binary", 31), ("scale_free", 40)])
def test_dfs_order_makes_every_subtree_contiguous(kind, n):
    tree = _tree(kind, n, seed=4)
    for root in [0, n - 1]:
        order = dfs_order(tree, root)
        position = np.empty(n, dtype=int)
        position[order] = np.arange(n)
        assert sorted(order.tolist()) == list(range(n))
        for part in edge_partitions(tree):
            # one side of every cut occupies a contiguous block of positions
            for side in (part.side, set(range(n)) - part.side):
                idx = sorted(position[list(side)])
                if idx[-1] - idx[0] + 1 == len(idx):
                    break
            else:
                pytest.fail(f"edge {part.edge} splits the order into scattered blocks")


def test_dfs_order_rejects_bad_root(chain3):
    with pytest.raises(BadParameters):
        dfs_order(chain3, 3)


def test_rooted_tree_sizes_and_sums():
    tree = _tree("binary", 7)
    rooted = RootedTree(tree.neighbors, root=0)
    assert rooted.sizes.tolist() == [7, 3, 3, 1, 1, 1, 1]
    values = np.arange(7, dtype=float)
    sums = rooted.subtree_sums(values)
    assert sums[0] == values.sum()
    assert sums[1] == 1 + 3 + 4
    batch = rooted.subtree_sums(np.stack([values, 2 * values], axis=1))
    assert np.array_equal(batch[:, 1], 2 * sums)
    assert np.allclose(rooted.subtree_sums(values, compensated=True), sums)
