"""
Closed-form critical coupling of Kuramoto trees, plus the cut-vertex and
cut-edge reductions that split a general graph into pieces.

For a tree, k_c is the largest partition sum |sum over T_e of (w_i - mean)|
taken over every edge e, where T_e is one component of the tree with e
removed. One rooted pass accumulating subtree sums gives every partition sum
at once.
"""
from __future__ import annotations

import math
from typing import Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from constants import COMPENSATED_SUM_THRESHOLD
from errors import BadParameters, LengthMismatch, NotACutEdge, NotACutVertex
from tree_model import (
    Edge,
    EdgePartition,
    KuramotoGraph,
    KuramotoTree,
    diameter,
    edge_partitions,
    max_partition_size,
)


class CouplingReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    k_c: float
    argmax_edge: Edge
    omegas: List[Tuple[Edge, float]] = Field(alias="edge_omegas")
    diameter: int
    max_partition: int

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


def _normalized(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def partition_sum(tree: KuramotoTree, part: EdgePartition) -> float:
    """Omega(T_e) = |sum over the partition side of (w_i - mean)|."""
    side = np.fromiter(part.side, dtype=np.int64)
    if side.size == 0 or side.min() < 0 or side.max() >= tree.n:
        raise BadParameters(f"partition of edge {part.edge} does not belong to this tree")
    deviations = tree.deviations[side]
    if tree.n > COMPENSATED_SUM_THRESHOLD:
        return abs(math.fsum(deviations))
    return abs(float(deviations.sum()))


def critical_coupling(tree: KuramotoTree) -> CouplingReport:
    """
    Exact critical coupling of a tree in O(n).

    Args:
        tree: Valid Kuramoto tree

    Returns:
        CouplingReport with k_c, the argmax edge (smallest edge on ties), the
        partition sum of every edge in edge-list order, D and P
    """
    rooted = tree.rooted
    sums = rooted.subtree_sums(
        tree.deviations, compensated=tree.n > COMPENSATED_SUM_THRESHOLD
    )

    parent = rooted.parent
    omegas = []
    for u, v in tree.edges:
        child = v if parent[v] == u else u
        omegas.append((_normalized(u, v), abs(float(sums[child]))))

    k_c = max(omega for _, omega in omegas)
    argmax_edge = min(edge for edge, omega in omegas if omega == k_c)

    return CouplingReport(
        k_c=k_c,
        argmax_edge=argmax_edge,
        omegas=omegas,
        diameter=diameter(tree),
        max_partition=max_partition_size(tree),
    )


def critical_coupling_naive(tree: KuramotoTree) -> float:
    """O(n^2) reference: recompute every partition sum from scratch."""
    return max(partition_sum(tree, part) for part in edge_partitions(tree))


def batch_critical_coupling(tree: KuramotoTree, freq_matrix) -> np.ndarray:
    """
    k_c for many frequency assignments on one topology.

    Args:
        tree: Supplies the topology; its own frequencies are ignored
        freq_matrix: (batch, n) array, one assignment per row

    Returns:
        Vector of batch critical couplings
    """
    freqs = np.asarray(freq_matrix, dtype=float)
    if freqs.ndim == 1:
        freqs = freqs[None, :]
    if freqs.shape[1] != tree.n:
        raise LengthMismatch(f"expected {tree.n} frequency columns, got {freqs.shape[1]}")

    deviations = freqs - freqs.mean(axis=1, keepdims=True)
    sums = tree.rooted.subtree_sums(deviations.T)
    return np.abs(sums[tree.rooted.children]).max(axis=0)


# ------------------ Reductions ------------------


class CutReduction(BaseModel):
    """
    The two graphs left after splitting at a cut vertex v.

    g1 keeps the vertices outside `side` with v replaced by x; g2 keeps
    `side` with v replaced by y. vertices1/vertices2 give the original index
    of every vertex of g1/g2 (x and y map back to v).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    g1: KuramotoGraph
    g2: KuramotoGraph
    omega_x: float
    omega_y: float
    vertices1: Tuple[int, ...]
    vertices2: Tuple[int, ...]


def _induced(graph: KuramotoGraph, kept: Iterable[int], cut: int, omega_cut: float):
    vertices = sorted(set(kept) | {cut})
    index = {old: new for new, old in enumerate(vertices)}
    edges = [(index[a], index[b]) for a, b in graph.edges if a in index and b in index]
    freqs = [omega_cut if old == cut else float(graph.freqs[old]) for old in vertices]
    labels = [graph.labels[old] for old in vertices] if graph.labels is not None else None
    cls = KuramotoTree if len(edges) == len(vertices) - 1 else KuramotoGraph
    return cls(len(vertices), edges, freqs, labels), tuple(vertices)


def cut_vertex_reduce(g: KuramotoGraph, v: int, side: Iterable[int]) -> CutReduction:
    """
    Split g at cut vertex v.

    Args:
        g: Connected Kuramoto graph
        v: A cut vertex of g
        side: Union of some (not all) components of g - v

    Returns:
        CutReduction; both pieces keep the mean frequency of g

    Raises:
        NotACutVertex: v does not disconnect g
        BadParameters: side is not a union of components of g - v
    """
    if not 0 <= v < g.n or v not in set(nx.articulation_points(g.graph)):
        raise NotACutVertex(f"vertex {v} is not a cut vertex")

    side = frozenset(int(s) for s in side)
    everyone = frozenset(range(g.n))
    components = [
        frozenset(c) for c in nx.connected_components(g.graph.subgraph(everyone - {v}))
    ]
    chosen = [c for c in components if c & side]
    if (
        not side
        or v in side
        or frozenset().union(*chosen) != side
        or len(chosen) == len(components)
    ):
        raise BadParameters(f"side must be a union of some but not all components of g - {v}")

    other = everyone - side - {v}
    mean = g.mean_frequency
    deviations = g.deviations
    omega_x = mean - math.fsum(deviations[sorted(other)])
    omega_y = mean - math.fsum(deviations[sorted(side)])

    g1, vertices1 = _induced(g, other, v, omega_x)
    g2, vertices2 = _induced(g, side, v, omega_y)
    return CutReduction(
        g1=g1, g2=g2, omega_x=omega_x, omega_y=omega_y, vertices1=vertices1, vertices2=vertices2
    )


def cut_edge_lower_bound(g: KuramotoGraph, e: Edge) -> float:
    """Necessary coupling |w_x - w_y| / 2 across a cut edge."""
    u, w = int(e[0]), int(e[1])
    bridges = {_normalized(a, b) for a, b in nx.bridges(g.graph)}
    if _normalized(u, w) not in bridges:
        raise NotACutEdge(f"edge ({u}, {w}) is not a cut edge")

    split = g.graph.copy()
    split.remove_edge(u, w)
    side_u = nx.node_connected_component(split, u) - {u}
    side_w = nx.node_connected_component(split, w) - {w}

    deviations = g.deviations
    omega_x = float(g.freqs[u]) + math.fsum(deviations[sorted(side_u)])
    omega_y = float(g.freqs[w]) + math.fsum(deviations[sorted(side_w)])
    return abs(omega_x - omega_y) / 2.0


def graph_coupling_lower_bound(g: KuramotoGraph) -> float:
    """Largest cut-edge bound over all bridges (0 when there are none)."""
    return max(
        (cut_edge_lower_bound(g, edge) for edge in nx.bridges(g.graph)), default=0.0
    )


class EdgePiece(BaseModel):
    model_config = ConfigDict(frozen=True)

    edge: Edge
    freqs: Tuple[float, float]
    k_c: float


class IrreduciblePiece(BaseModel):
    """2-connected remainder; its coupling is not evaluated here."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    graph: KuramotoGraph
    vertices: Tuple[int, ...]


class GraphReduction(BaseModel):
    model_config = ConfigDict(frozen=True)

    edges: List[EdgePiece]
    irreducible: List[IrreduciblePiece]

    @property
    def k_c_lower_bound(self) -> float:
        """Exact k_c when nothing is irreducible."""
        return max((piece.k_c for piece in self.edges), default=0.0)


def reduce_graph(g: KuramotoGraph) -> GraphReduction:
    """
    Apply cut-vertex reductions until no piece has a cut vertex.

    Single edges come back with their original vertex pair and pairwise
    coupling |w_a - w_b| / 2; anything 2-connected comes back untouched.
    On a tree this yields exactly n-1 single-edge pieces.
    """
    edges: List[EdgePiece] = []
    irreducible: List[IrreduciblePiece] = []
    work = [(g, tuple(range(g.n)))]

    while work:
        graph, vertices = work.pop()
        if graph.n == 2:
            a, b = float(graph.freqs[0]), float(graph.freqs[1])
            edge = _normalized(vertices[0], vertices[1])
            pair = (a, b) if vertices[0] < vertices[1] else (b, a)
            edges.append(EdgePiece(edge=edge, freqs=pair, k_c=abs(a - b) / 2.0))
            continue

        cut: Optional[int] = min(nx.articulation_points(graph.graph), default=None)
        if cut is None:
            irreducible.append(IrreduciblePiece(graph=graph, vertices=vertices))
            continue

        rest = graph.graph.subgraph(set(range(graph.n)) - {cut})
        side = nx.node_connected_component(rest, min(graph.graph.neighbors(cut)))
        reduction = cut_vertex_reduce(graph, cut, side)
        work.append((reduction.g1, tuple(vertices[i] for i in reduction.vertices1)))
        work.append((reduction.g2, tuple(vertices[i] for i in reduction.vertices2)))

    edges.sort(key=lambda piece: piece.edge)
    return GraphReduction(edges=edges, irreducible=irreducible)
