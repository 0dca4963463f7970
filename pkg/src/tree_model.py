"""
Kuramoto trees and graphs.

A Kuramoto tree is a tree on vertices 0..n-1 with a natural frequency on each
vertex. This module validates them, generates the standard tree families,
samples frequencies and exposes the structural quantities the coupling
formulas need: edge partitions, diameter, maximum partition size and the
depth-first numbering used by the rearrangement.
"""
from __future__ import annotations

import math
import re
from collections import deque
from functools import cached_property
from typing import Annotated, FrozenSet, List, Literal, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from constants import SIGMA_UNIFORM, TOPOLOGY_STREAM, TREE_FAMILIES
from errors import BadParameters, LengthMismatch, NonFiniteFrequency, NotATree

Edge = Tuple[int, int]

SEED_MASK = (1 << 64) - 1


def stream_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    Independent random stream keyed by (seed, *stream).

    Args:
        seed: 64-bit master seed (negative values are reduced mod 2**64)
        stream: Non-negative stream indices, e.g. a sample block number

    Returns:
        numpy Generator over PCG64
    """
    sequence = np.random.SeedSequence(
        int(seed) & SEED_MASK, spawn_key=tuple(int(s) for s in stream)
    )
    return np.random.Generator(np.random.PCG64(sequence))


# ------------------ Frequency distributions ------------------


class UniformDistribution(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["uniform"] = "uniform"
    lo: float = 0.0
    hi: float = 1.0

    @model_validator(mode="after")
    def _check_interval(self) -> "UniformDistribution":
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.hi > self.lo:
            raise ValueError(f"uniform distribution needs hi > lo, got [{self.lo}, {self.hi}]")
        return self

    @property
    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def sigma(self) -> float:
        return (self.hi - self.lo) / math.sqrt(12.0)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size)


class NormalDistribution(BaseModel):
    """Gaussian frequencies; defaults match the mean and variance of Uniform[0,1]."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["normal"] = "normal"
    mean: float = 0.5
    sd: float = SIGMA_UNIFORM

    @model_validator(mode="after")
    def _check_sd(self) -> "NormalDistribution":
        if not math.isfinite(self.mean) or not (math.isfinite(self.sd) and self.sd > 0):
            raise ValueError(f"normal distribution needs finite mean and sd > 0, got sd={self.sd}")
        return self

    @property
    def sigma(self) -> float:
        return self.sd

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        # numpy's Generator.normal is a ziggurat sampler
        return rng.normal(self.mean, self.sd, size)


FrequencyDistribution = Annotated[
    Union[UniformDistribution, NormalDistribution], Field(discriminator="kind")
]


def parse_distribution(name: str, **params: float) -> Union[UniformDistribution, NormalDistribution]:
    """Build a distribution from a short name ('uniform' or 'normal') plus optional parameters."""
    params = {k: v for k, v in params.items() if v is not None}
    if name == "uniform":
        return UniformDistribution(**params)
    if name == "normal":
        return NormalDistribution(**params)
    raise BadParameters(f"unknown distribution '{name}' (expected 'uniform' or 'normal')")


def sample_frequencies(dist, n: int, seed: int) -> np.ndarray:
    """n i.i.d. frequencies; deterministic for fixed (dist, n, seed)."""
    if n < 1:
        raise BadParameters(f"need n >= 1 frequencies, got {n}")
    return dist.sample(stream_rng(seed), n)


# ------------------ Graph and tree types ------------------


class KuramotoGraph:
    """Connected simple graph with a natural frequency on every vertex."""

    def __init__(
        self,
        n: int,
        edges: Sequence[Sequence[int]],
        freqs: Sequence[float],
        labels: Optional[Sequence[str]] = None,
    ):
        self.n = int(n)
        self.edges: Tuple[Edge, ...] = tuple((int(u), int(v)) for u, v in edges)
        freqs = np.array(freqs, dtype=float)
        freqs.setflags(write=False)
        self.freqs = freqs
        self.labels: Optional[Tuple[str, ...]] = (
            tuple(str(label) for label in labels) if labels is not None else None
        )

    @property
    def mean_frequency(self) -> float:
        return math.fsum(self.freqs) / self.n

    @property
    def deviations(self) -> np.ndarray:
        return self.freqs - self.mean_frequency

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, edges={len(self.edges)}, mean={self.mean_frequency:.6g})"


class KuramotoTree(KuramotoGraph):
    """Kuramoto graph whose edges form a spanning tree. Build through build_tree()."""

    @cached_property
    def neighbors(self) -> Tuple[Tuple[int, ...], ...]:
        adjacency: List[List[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adjacency[u].append(v)
            adjacency[v].append(u)
        return tuple(tuple(sorted(a)) for a in adjacency)

    @cached_property
    def rooted(self) -> "RootedTree":
        return RootedTree(self.neighbors, root=0)

    @cached_property
    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    def with_frequencies(self, freqs: Sequence[float]) -> "KuramotoTree":
        """Same topology, new frequencies; structural caches are shared."""
        freqs = np.asarray(freqs, dtype=float)
        _check_frequencies(self.n, freqs)
        tree = KuramotoTree(self.n, self.edges, freqs, self.labels)
        for name in ("neighbors", "rooted", "edge_array", "graph"):
            if name in self.__dict__:
                tree.__dict__[name] = self.__dict__[name]
        return tree


class RootedTree:
    """
    A tree hung from a root vertex.

    Holds the parent of every vertex (-1 for the root), a breadth-first
    order starting at the root and the subtree size below every vertex.
    Reversing the order visits children before parents, which is all the
    subtree-sum pass needs.
    """

    def __init__(self, neighbors: Sequence[Sequence[int]], root: int = 0):
        n = len(neighbors)
        parent = [-1] * n
        order = [root]
        seen = [False] * n
        seen[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in neighbors[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    order.append(w)
                    queue.append(w)

        self.n = n
        self.root = root
        self.parent = np.array(parent, dtype=np.int64)
        self.order = np.array(order, dtype=np.int64)
        self._parent_list = parent
        self._bottom_up = order[:0:-1]
        self.sizes = self.subtree_sums(np.ones(n)).astype(np.int64)

    @property
    def children(self) -> np.ndarray:
        """Every non-root vertex, in breadth-first order; each names the edge to its parent."""
        return self.order[1:]

    def subtree_sums(self, values, compensated: bool = False) -> np.ndarray:
        """
        Sum values over the subtree below every vertex in one pass.

        Args:
            values: Vector of length n, or an (n, batch) matrix summed column-wise
            compensated: Use Neumaier compensation (vectors only)

        Returns:
            Array of the same shape as values
        """
        values = np.asarray(values, dtype=float)
        parent = self._parent_list

        if values.ndim == 1 and compensated:
            return self._compensated_sums(values.tolist())

        if values.ndim == 1:
            sums = values.tolist()
            for v in self._bottom_up:
                sums[parent[v]] += sums[v]
            return np.array(sums)

        sums = values.copy()
        for v in self._bottom_up:
            sums[parent[v]] += sums[v]
        return sums

    def _compensated_sums(self, sums: List[float]) -> np.ndarray:
        parent = self._parent_list
        carry = [0.0] * len(sums)
        for v in self._bottom_up:
            p = parent[v]
            x = sums[v]
            total = sums[p] + x
            if abs(sums[p]) >= abs(x):
                carry[p] += (sums[p] - total) + x
            else:
                carry[p] += (x - total) + sums[p]
            sums[p] = total
            carry[p] += carry[v]
        return np.array([s + c for s, c in zip(sums, carry)])


class EdgePartition(BaseModel):
    """The smaller component of the tree with one edge removed."""

    model_config = ConfigDict(frozen=True)

    edge: Edge
    side: FrozenSet[int]
    size: int


# ------------------ Validation ------------------


def _check_frequencies(n: int, freqs: np.ndarray) -> None:
    if freqs.ndim != 1 or len(freqs) != n:
        raise LengthMismatch(f"expected {n} frequencies, got {freqs.size}")
    if not np.all(np.isfinite(freqs)):
        bad = int(np.flatnonzero(~np.isfinite(freqs))[0])
        raise NonFiniteFrequency(f"frequency of vertex {bad} is {freqs[bad]}")


def _check_edges(n: int, edges: Sequence[Sequence[int]], error) -> List[Edge]:
    checked: List[Edge] = []
    seen = set()
    for position, pair in enumerate(edges):
        if len(pair) != 2:
            raise error(f"edge #{position} is not a vertex pair: {pair!r}")
        u, v = (int(x) for x in pair)
        if not (0 <= u < n and 0 <= v < n):
            raise error(f"edge #{position} ({u}, {v}) references a vertex outside 0..{n - 1}")
        if u == v:
            raise error(f"edge #{position} is a self-loop on vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise error(f"edge ({u}, {v}) appears more than once")
        seen.add(key)
        checked.append((u, v))
    return checked


def _check_common(n, freqs, labels) -> np.ndarray:
    if int(n) < 2:
        raise NotATree(f"a Kuramoto tree needs at least 2 vertices, got n={n}")
    freqs = np.asarray(freqs, dtype=float)
    _check_frequencies(int(n), freqs)
    if labels is not None and len(labels) != int(n):
        raise LengthMismatch(f"expected {n} labels, got {len(labels)}")
    return freqs


def build_tree(
    n: int,
    edges: Sequence[Sequence[int]],
    freqs: Sequence[float],
    labels: Optional[Sequence[str]] = None,
) -> KuramotoTree:
    """
    Validate and build a Kuramoto tree.

    Args:
        n: Vertex count (>= 2)
        edges: n-1 vertex pairs; order is preserved
        freqs: Natural frequency per vertex
        labels: Optional display name per vertex

    Returns:
        KuramotoTree

    Raises:
        NotATree: wrong edge count, cycle, disconnection, bad vertex index
        LengthMismatch: freqs or labels of the wrong length
        NonFiniteFrequency: NaN or infinite frequency
    """
    freqs = _check_common(n, freqs, labels)
    n = int(n)
    checked = _check_edges(n, edges, NotATree)
    if len(checked) != n - 1:
        raise NotATree(f"a tree on {n} vertices has {n - 1} edges, got {len(checked)}")
    tree = KuramotoTree(n, checked, freqs, labels)
    if not nx.is_connected(tree.graph):
        raise NotATree("edge list does not connect all vertices")
    return tree


def build_graph(
    n: int,
    edges: Sequence[Sequence[int]],
    freqs: Sequence[float],
    labels: Optional[Sequence[str]] = None,
) -> KuramotoGraph:
    """Validate and build a connected simple Kuramoto graph (cycles allowed)."""
    freqs = _check_common(n, freqs, labels)
    n = int(n)
    checked = _check_edges(n, edges, BadParameters)
    graph = KuramotoGraph(n, checked, freqs, labels)
    if not nx.is_connected(graph.graph):
        raise BadParameters("graph is not connected")
    return graph


# ------------------ Generators ------------------

_KIND_PATTERN = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*(\d+)\s*\))?\s*$")


def parse_kind(kind: str) -> Tuple[str, Optional[int]]:
    """Split a topology kind such as 'tadpole(8)' into ('tadpole', 8)."""
    match = _KIND_PATTERN.match(kind or "")
    if not match or match.group(1) not in TREE_FAMILIES:
        raise BadParameters(
            f"unknown tree kind '{kind}' (expected one of {', '.join(TREE_FAMILIES)}; tadpole as tadpole(D))"
        )
    name, parameter = match.group(1), match.group(2)
    if name == "tadpole" and parameter is None:
        raise BadParameters("tadpole needs its diameter, e.g. tadpole(8)")
    if name != "tadpole" and parameter is not None:
        raise BadParameters(f"kind '{name}' takes no parameter")
    return name, int(parameter) if parameter is not None else None


def _sorted_edges(g: nx.Graph) -> List[Edge]:
    return sorted((min(u, v), max(u, v)) for u, v in g.edges())


def generate_topology(kind: str, n: int, seed: int = 0) -> List[Edge]:
    """
    Edge list of one of the tree families.

    Args:
        kind: chain, star, dumbbell, binary, tadpole(D), random_uniform or scale_free
        n: Vertex count
        seed: Used by the random families only

    Returns:
        List of n-1 edges on vertices 0..n-1
    """
    name, parameter = parse_kind(kind)
    n = int(n)
    if n < 2:
        raise BadParameters(f"a tree needs n >= 2, got {n}")

    if name == "chain":
        return [(i, i + 1) for i in range(n - 1)]

    if name == "star":
        return [(0, i) for i in range(1, n)]

    if name == "dumbbell":
        if n < 4 or n % 2:
            raise BadParameters(f"dumbbell needs an even n >= 4, got {n}")
        half = n // 2
        return [(0, 1)] + [(0, i) for i in range(2, half + 1)] + [(1, i) for i in range(half + 1, n)]

    if name == "binary":
        # children of i are 2i+1 and 2i+2
        return [((c - 1) // 2, c) for c in range(1, n)]

    if name == "tadpole":
        d = parameter
        if d <= 2:
            raise BadParameters(f"tadpole needs D > 2, got {d}")
        if n < d + 1:
            raise BadParameters(f"tadpole({d}) needs n >= {d + 1}, got {n}")
        # tail 0-1-...-(D-1) hangs off the star center 0
        return [(i, i + 1) for i in range(d - 1)] + [(0, j) for j in range(d, n)]

    rng = stream_rng(seed, TOPOLOGY_STREAM)

    if name == "random_uniform":
        if n == 2:
            return [(0, 1)]
        sequence = rng.integers(0, n, size=n - 2).tolist()
        return _sorted_edges(nx.from_prufer_sequence(sequence))

    # scale_free: each new vertex attaches to one existing vertex with probability proportional to degree
    return _sorted_edges(nx.barabasi_albert_graph(n, 1, seed=int(rng.integers(2**63))))


def generate_tree(kind: str, n: int, dist, seed: int = 0) -> KuramotoTree:
    """Topology from generate_topology plus frequencies from sample_frequencies, same seed."""
    edges = generate_topology(kind, n, seed)
    return build_tree(n, edges, sample_frequencies(dist, n, seed))


# ------------------ Structure ------------------


def dfs_order(tree: KuramotoTree, root: int = 0) -> np.ndarray:
    """
    Depth-first preorder from root, children in ascending index order.

    Entry i is the vertex receiving DFS index i. Every subtree occupies a
    contiguous block of indices, so for every edge one side of the cut is
    contiguous.
    """
    if not 0 <= root < tree.n:
        raise BadParameters(f"root {root} outside 0..{tree.n - 1}")

    neighbors = tree.neighbors
    visited = [False] * tree.n
    order: List[int] = []
    stack = [root]
    while stack:
        v = stack.pop()
        if visited[v]:
            continue
        visited[v] = True
        order.append(v)
        for w in reversed(neighbors[v]):
            if not visited[w]:
                stack.append(w)
    return np.array(order, dtype=np.int64)


def _child_of(rooted: RootedTree, u: int, v: int) -> int:
    return v if rooted.parent[v] == u else u


def edge_partitions(tree: KuramotoTree) -> List[EdgePartition]:
    """One EdgePartition per edge, in edge-list order."""
    rooted = tree.rooted
    preorder = dfs_order(tree, rooted.root)
    position = np.empty(tree.n, dtype=np.int64)
    position[preorder] = np.arange(tree.n)
    everything = frozenset(range(tree.n))

    partitions = []
    for u, v in tree.edges:
        child = _child_of(rooted, u, v)
        size = int(rooted.sizes[child])
        start = int(position[child])
        below = frozenset(preorder[start : start + size].tolist())
        # the subtree below the edge never holds the root 0, so it wins ties
        if size <= tree.n - size:
            side = below
        else:
            side = everything - below
        partitions.append(EdgePartition(edge=(min(u, v), max(u, v)), side=side, size=len(side)))
    return partitions


def diameter(tree: KuramotoTree) -> int:
    """Edges on the longest path, by two breadth-first sweeps."""
    first = nx.single_source_shortest_path_length(tree.graph, 0)
    far = max(first, key=first.get)
    second = nx.single_source_shortest_path_length(tree.graph, far)
    return int(max(second.values()))


def max_partition_size(tree: KuramotoTree) -> int:
    """P: the largest smaller-side size over all edges."""
    rooted = tree.rooted
    sizes = rooted.sizes[rooted.children]
    return int(np.minimum(sizes, tree.n - sizes).max())
