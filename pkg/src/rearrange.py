"""
Reassigning a tree's frequencies to lower its critical coupling.

The frequencies are put in an order whose running deviation sums
f(k) = sum_{i<=k} (w_ai - mean) never leave [w_min - mean, w_max - mean]:
start with w_max, then alternate runs of frequencies at or below the mean
(until f <= 0) and above the mean (until f >= 0). Giving the i-th frequency
of that order to the vertex with depth-first index i makes every subtree a
contiguous block of the order, so every partition sum is a difference of
two f values and k_c <= w_max - w_min.

Any order inside a run keeps the bound. Farthest-first (the lowest
frequency in a low run, the highest in a high run) is the default;
nearest-first is kept as an alternative heuristic.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache, partial
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from constants import EXHAUSTIVE_MAX_N, SAMPLE_BLOCK_SIZE
from critical_coupling import batch_critical_coupling, critical_coupling
from errors import BadParameters, TooLarge
from montecarlo import KcAccumulator
from tree_model import (
    KuramotoTree,
    UniformDistribution,
    build_tree,
    dfs_order,
    generate_topology,
    stream_rng,
)

# rearranged couplings may exceed the bound by accumulated rounding only
BOUND_TOLERANCE = 1e-12


class RearrangementResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    assignment: List[int]
    dfs_order: List[int]
    k_c_before: float
    k_c_after: float
    bound: float
    f_values: List[float]
    rearranged_freqs: List[float]


class RearrangementCampaign(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: str
    n: int
    samples: int
    pool: str = "farthest"
    mean_before: float
    stderr_before: float
    mean_after: float
    stderr_after: float
    min_after: float
    max_after: float
    violations: int
    after_values: Optional[List[float]] = None


PoolOrder = Literal["farthest", "nearest"]
POOL_ORDERS = ("farthest", "nearest")


def _check_pool(pool: str) -> None:
    if pool not in POOL_ORDERS:
        raise BadParameters(f"pool order must be one of {', '.join(POOL_ORDERS)}, got {pool!r}")


def selection_order(freqs, pool: PoolOrder = "farthest") -> np.ndarray:
    """
    The alternating-run ordering of the frequencies.

    Args:
        freqs: Frequency vector
        pool: Order inside each run. "farthest" takes the frequency farthest
            from the mean first (lowest in a low run, highest in a high run);
            "nearest" takes the one closest to the mean first

    Returns:
        Index array; entry i is the frequency index placed i-th
    """
    _check_pool(pool)
    freqs = np.asarray(freqs, dtype=float)
    n = len(freqs)
    if n == 0:
        return np.empty(0, dtype=np.int64)

    deviations = freqs - math.fsum(freqs) / n
    first = int(np.argmax(freqs))
    rest = [i for i in range(n) if i != first]
    sign = 1.0 if pool == "farthest" else -1.0
    # at-mean frequencies join the low pool
    low = deque(sorted((i for i in rest if deviations[i] <= 0), key=lambda i: (sign * freqs[i], i)))
    high = deque(sorted((i for i in rest if deviations[i] > 0), key=lambda i: (-sign * freqs[i], i)))

    order = [first]
    running = deviations[first]
    taking_low = True
    while low or high:
        if taking_low:
            if not low:
                taking_low = False
                continue
            i = low.popleft()
            running += deviations[i]
            order.append(i)
            if running <= 0:
                taking_low = False
        else:
            if not high:
                taking_low = True
                continue
            i = high.popleft()
            running += deviations[i]
            order.append(i)
            if running >= 0:
                taking_low = True
    return np.array(order, dtype=np.int64)


def rearrange(tree: KuramotoTree, root: int = 0, pool: PoolOrder = "farthest") -> RearrangementResult:
    """
    Rearrange the frequencies of a tree so that k_c <= w_max - w_min.

    Args:
        tree: Kuramoto tree
        root: Root of the depth-first numbering
        pool: Order inside each run of the selection, see selection_order

    Returns:
        RearrangementResult; assignment[i] is the original frequency index given
        to the vertex dfs_order[i]
    """
    positions = dfs_order(tree, root)
    order = selection_order(tree.freqs, pool)

    rearranged = np.empty(tree.n)
    rearranged[positions] = tree.freqs[order]
    after = tree.with_frequencies(rearranged)

    f_values = np.cumsum(tree.freqs[order] - tree.mean_frequency)
    return RearrangementResult(
        assignment=order.tolist(),
        dfs_order=positions.tolist(),
        k_c_before=critical_coupling(tree).k_c,
        k_c_after=critical_coupling(after).k_c,
        bound=float(tree.freqs.max() - tree.freqs.min()),
        f_values=f_values.tolist(),
        rearranged_freqs=rearranged.tolist(),
    )


def star_two_value_coupling(n: int, xi: float, zeta: float) -> float:
    """k_c of a star carrying xi on two vertices and zeta on the other n-2, whatever the placement."""
    if n < 3:
        raise BadParameters(f"star needs n >= 3, got {n}")
    return abs(xi - zeta + (2.0 * zeta - 2.0 * xi) / n)


# ------------------ Exhaustive oracle ------------------

_PERMUTATION_CHUNK = 65_536


@lru_cache(maxsize=4)
def _permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int8)


def _best_in_chunk(tree: KuramotoTree, start: int) -> Tuple[float, int]:
    perms = _permutations(tree.n)[start : start + _PERMUTATION_CHUNK]
    couplings = batch_critical_coupling(tree, tree.freqs[perms])
    best = int(np.argmin(couplings))
    return float(couplings[best]), start + best


def exhaustive_best(tree: KuramotoTree, workers: int = 1) -> Tuple[float, Tuple[int, ...]]:
    """
    Minimum k_c over all n! ways to place the frequencies on the vertices.

    Returns:
        (best_kc, best_assignment) where vertex v receives freqs[best_assignment[v]];
        ties go to the lexicographically first permutation
    """
    if tree.n > EXHAUSTIVE_MAX_N:
        raise TooLarge(f"exhaustive search is limited to n <= {EXHAUSTIVE_MAX_N}, got {tree.n}")

    starts = list(range(0, math.factorial(tree.n), _PERMUTATION_CHUNK))
    runner = partial(_best_in_chunk, tree)
    if workers > 1 and len(starts) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            candidates = list(executor.map(runner, starts))
    else:
        candidates = [runner(start) for start in starts]

    best_kc, best_index = min(candidates)
    return best_kc, tuple(int(i) for i in _permutations(tree.n)[best_index])


# ------------------ Campaign ------------------


def _rearrangement_block(
    tree: KuramotoTree, positions: np.ndarray, dist, master_seed: int, samples: int, pool: str, block: int
):
    rows = min(SAMPLE_BLOCK_SIZE, samples - block * SAMPLE_BLOCK_SIZE)
    freqs = dist.sample(stream_rng(master_seed, block), (rows, tree.n))
    rearranged = np.empty_like(freqs)
    for r in range(rows):
        rearranged[r, positions] = freqs[r, selection_order(freqs[r], pool)]
    before = batch_critical_coupling(tree, freqs)
    after = batch_critical_coupling(tree, rearranged)
    bound = freqs.max(axis=1) - freqs.min(axis=1)
    return before, after, int(np.count_nonzero(after > bound + BOUND_TOLERANCE))


def rearrangement_campaign(
    family: str,
    n: int,
    dist=None,
    samples: int = 10_000,
    master_seed: int = 0,
    workers: int = 1,
    root: int = 0,
    keep_values: bool = False,
    pool: PoolOrder = "farthest",
) -> RearrangementCampaign:
    """k_c before and after rearrangement over many seeded frequency draws on one topology."""
    dist = dist or UniformDistribution()
    _check_pool(pool)
    if samples < 1:
        raise BadParameters(f"samples must be >= 1, got {samples}")
    tree = build_tree(n, generate_topology(family, n, master_seed), np.zeros(n))
    positions = dfs_order(tree, root)
    blocks = list(range(math.ceil(samples / SAMPLE_BLOCK_SIZE)))
    runner = partial(_rearrangement_block, tree, positions, dist, master_seed, samples, pool)

    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(runner, blocks))
    else:
        results = [runner(block) for block in blocks]

    before_acc, after_acc = KcAccumulator(), KcAccumulator()
    violations = 0
    min_after = math.inf
    kept: List[float] = []
    for before, after, bad in results:
        before_acc.merge(KcAccumulator.from_values(before))
        after_acc.merge(KcAccumulator.from_values(after))
        min_after = min(min_after, float(after.min()))
        violations += bad
        if keep_values:
            kept.extend(after.tolist())

    return RearrangementCampaign(
        family=family,
        n=n,
        samples=after_acc.count,
        mean_before=before_acc.mean,
        stderr_before=before_acc.stderr,
        mean_after=after_acc.mean,
        stderr_after=after_acc.stderr,
        min_after=min_after,
        max_after=after_acc.max_value,
        violations=violations,
        after_values=kept if keep_values else None,
        pool=pool,
    )
