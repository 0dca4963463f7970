"""
Seeded Monte Carlo estimation of the expected critical coupling E(k_c).

A campaign fixes one topology and draws `samples` frequency assignments.
Samples are grouped in fixed-size blocks; block b draws all of its rows from
the stream (master_seed, b) and computes k_c for every row with the
vectorized subtree-sum kernel. Blocks are folded into a mergeable
accumulator in block order, so the result is bit-identical for any worker
count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator
from sklearn.linear_model import LinearRegression
from tqdm import tqdm

from constants import HISTOGRAM_BINS, SAMPLE_BLOCK_SIZE
from critical_coupling import batch_critical_coupling
from errors import BadParameters, DegenerateFit
from estimators import (
    estimator_star_normal,
    lower_by_diameter,
    lower_by_partition,
    upper_by_order,
    upper_by_partition,
)
from tree_model import (
    FrequencyDistribution,
    KuramotoTree,
    UniformDistribution,
    build_tree,
    diameter,
    generate_topology,
    max_partition_size,
    parse_kind,
    stream_rng,
)


class McCampaign(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: str
    n: int = Field(ge=2)
    dist: FrequencyDistribution = UniformDistribution()
    samples: int = Field(ge=1)
    master_seed: int = 0

    @field_validator("family")
    @classmethod
    def _known_family(cls, value: str) -> str:
        parse_kind(value)
        return value

    @property
    def blocks(self) -> int:
        return math.ceil(self.samples / SAMPLE_BLOCK_SIZE)


class McEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    stderr: float
    samples: int
    sd: float
    max_value: float
    histogram: Optional[List[int]] = None
    histogram_max: Optional[float] = None


class BoundsReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: str
    n: int
    D: int
    P: int
    estimate: McEstimate
    lower_by_diameter: float
    upper_by_order: float
    lower_by_partition: float
    upper_by_partition: float
    lower_by_star_normal: Optional[float] = None
    checks: Dict[str, bool]
    all_hold: bool


class KcAccumulator:
    """Running count, mean, M2 and maximum; merge() combines two accumulators."""

    def __init__(self, count: int = 0, mean: float = 0.0, m2: float = 0.0, max_value: float = 0.0):
        self.count = count
        self.mean = mean
        self.m2 = m2
        self.max_value = max_value

    @classmethod
    def from_values(cls, values: np.ndarray) -> "KcAccumulator":
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(values.size, mean, float(((values - mean) ** 2).sum()), float(values.max()))

    def merge(self, other: "KcAccumulator") -> "KcAccumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2, self.max_value = other.count, other.mean, other.m2, other.max_value
            return self
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / total
        self.m2 += other.m2 + delta * delta * self.count * other.count / total
        self.count = total
        self.max_value = max(self.max_value, other.max_value)
        return self

    @property
    def sd(self) -> float:
        return math.sqrt(self.m2 / (self.count - 1)) if self.count > 1 else 0.0

    @property
    def stderr(self) -> float:
        return self.sd / math.sqrt(self.count) if self.count > 0 else 0.0


def campaign_topology(campaign: McCampaign) -> KuramotoTree:
    """The fixed topology of a campaign (random families are seeded by master_seed)."""
    edges = generate_topology(campaign.family, campaign.n, campaign.master_seed)
    return build_tree(campaign.n, edges, np.zeros(campaign.n))


def _block_frequencies(campaign: McCampaign, block: int) -> np.ndarray:
    start = block * SAMPLE_BLOCK_SIZE
    rows = min(SAMPLE_BLOCK_SIZE, campaign.samples - start)
    rng = stream_rng(campaign.master_seed, block)
    return campaign.dist.sample(rng, (rows, campaign.n))


def _campaign_block(campaign: McCampaign, tree: KuramotoTree, block: int) -> np.ndarray:
    return batch_critical_coupling(tree, _block_frequencies(campaign, block))


def campaign_tree(campaign: McCampaign, sample: int) -> KuramotoTree:
    """Rebuild the tree of one campaign sample."""
    if not 0 <= sample < campaign.samples:
        raise BadParameters(f"sample {sample} outside 0..{campaign.samples - 1}")
    block, row = divmod(sample, SAMPLE_BLOCK_SIZE)
    return campaign_topology(campaign).with_frequencies(_block_frequencies(campaign, block)[row])


def _map_blocks(runner, blocks: Sequence[int], workers: int, progress: bool, label: str):
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from tqdm(pool.map(runner, blocks), total=len(blocks), disable=not progress, desc=label)
    else:
        yield from tqdm(map(runner, blocks), total=len(blocks), disable=not progress, desc=label)


def run_campaign(
    campaign: McCampaign,
    workers: int = 1,
    histogram: bool = False,
    progress: bool = False,
) -> McEstimate:
    """
    Estimate E(k_c) for one campaign.

    Args:
        campaign: Topology, distribution, sample count and master seed
        workers: Worker processes; does not change the result
        histogram: Also bin the k_c values (200 bins over [0, observed max])
        progress: Show a tqdm bar

    Returns:
        McEstimate
    """
    tree = campaign_topology(campaign)
    runner = partial(_campaign_block, campaign, tree)
    accumulator = KcAccumulator()
    kept: List[np.ndarray] = []

    for values in _map_blocks(
        runner, list(range(campaign.blocks)), workers, progress, f"{campaign.family} n={campaign.n}"
    ):
        accumulator.merge(KcAccumulator.from_values(values))
        if histogram:
            kept.append(values)

    counts, top = None, None
    if histogram:
        top = accumulator.max_value if accumulator.max_value > 0 else 1.0
        binned, _ = np.histogram(np.concatenate(kept), bins=HISTOGRAM_BINS, range=(0.0, top))
        counts = binned.astype(int).tolist()

    return McEstimate(
        mean=accumulator.mean,
        stderr=accumulator.stderr,
        samples=accumulator.count,
        sd=accumulator.sd,
        max_value=accumulator.max_value,
        histogram=counts,
        histogram_max=top,
    )


def check_bounds(
    campaign: McCampaign,
    estimate: McEstimate,
    slack: float = 2.0,
    fit_tol: float = 0.0,
) -> BoundsReport:
    """
    Compare a campaign mean against the general-tree bounds.

    Args:
        campaign: Campaign the estimate was produced for; D and P come from its topology
        estimate: Campaign result
        slack: Allowed violation in multiples of the standard error
        fit_tol: Extra absolute allowance for comparisons against empirical curves
            (chi and mu), which are fits rather than exact values

    Returns:
        BoundsReport with every bound value, per-bound verdicts and all_hold
    """
    n, dist = campaign.n, campaign.dist
    tree = campaign_topology(campaign)
    d, p = diameter(tree), max_partition_size(tree)
    sigma = dist.sigma

    lower_d = lower_by_diameter(d, sigma)
    upper_n = upper_by_order(n, sigma)
    lower_p = lower_by_partition(p, sigma)
    upper_p = upper_by_partition(n, p, sigma)
    normal_floor = (
        estimator_star_normal(n, sigma) if dist.kind == "normal" and n >= 3 else None
    )

    mean, margin = estimate.mean, slack * estimate.stderr
    checks = {
        "lower_by_diameter": mean + margin + fit_tol >= lower_d,
        "upper_by_order": mean - margin - fit_tol <= upper_n,
        "lower_by_partition": mean + margin >= lower_p,
        "upper_by_partition": mean - margin < upper_p,
    }
    if normal_floor is not None:
        checks["lower_by_star_normal"] = mean + margin + fit_tol >= normal_floor

    return BoundsReport(
        family=campaign.family,
        n=n,
        D=d,
        P=p,
        estimate=estimate,
        lower_by_diameter=lower_d,
        upper_by_order=upper_n,
        lower_by_partition=lower_p,
        upper_by_partition=upper_p,
        lower_by_star_normal=normal_floor,
        checks=checks,
        all_hold=all(checks.values()),
    )


def fit_sqrt_curve(points: Iterable[Tuple[float, float]]) -> Tuple[float, float]:
    """Least-squares fit of mean ~ a*sqrt(n) + b; returns (a, b)."""
    points = list(points)
    if len(points) < 2:
        raise DegenerateFit(f"need at least 2 points, got {len(points)}")
    ns = np.array([p[0] for p in points], dtype=float)
    means = np.array([p[1] for p in points], dtype=float)
    if np.all(ns == ns[0]):
        raise DegenerateFit("all points share the same n")

    model = LinearRegression().fit(np.sqrt(ns).reshape(-1, 1), means)
    return float(model.coef_[0]), float(model.intercept_)


def sweep_sizes(family: str, ns: Iterable[int]) -> List[int]:
    """Keep the sizes a family can be built at (even n for dumbbell, n > D for tadpole)."""
    name, parameter = parse_kind(family)
    kept = []
    for n in ns:
        if n < 2:
            continue
        if name == "dumbbell" and (n < 4 or n % 2):
            continue
        if name == "tadpole" and n < parameter + 1:
            continue
        kept.append(n)
    return kept


def estimate_row(campaign: McCampaign, estimate: McEstimate) -> Dict[str, object]:
    return {
        "family": campaign.family,
        "n": campaign.n,
        "dist": campaign.dist.kind,
        "samples": estimate.samples,
        "mean": estimate.mean,
        "stderr": estimate.stderr,
    }


def run_sweep(
    families: Iterable[str],
    ns: Iterable[int],
    dist=None,
    samples: int = SAMPLE_BLOCK_SIZE,
    master_seed: int = 0,
    workers: int = 1,
    progress: bool = False,
) -> pd.DataFrame:
    """
    One campaign per (family, n).

    Returns:
        DataFrame with columns family, n, dist, samples, mean, stderr, D, P, plog
        where plog = P*log(n/P)
    """
    dist = dist or UniformDistribution()
    ns = list(ns)
    rows = []
    for family in families:
        for n in sweep_sizes(family, ns):
            campaign = McCampaign(family=family, n=n, dist=dist, samples=samples, master_seed=master_seed)
            estimate = run_campaign(campaign, workers=workers, progress=progress)
            tree = campaign_topology(campaign)
            d, p = diameter(tree), max_partition_size(tree)
            row = estimate_row(campaign, estimate)
            row.update({"D": d, "P": p, "plog": p * math.log(n / p)})
            rows.append(row)
    return pd.DataFrame(
        rows, columns=["family", "n", "dist", "samples", "mean", "stderr", "D", "P", "plog"]
    )
