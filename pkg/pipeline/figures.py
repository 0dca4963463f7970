import math
import os
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

src_path = Path(__file__).resolve().parent.parent / "src"
if str(src_path) not in sys.path:
    sys.path.insert(0, str(src_path))

from constants import FIGURE_GRIDS, FIGURE_IDS, SIGMA_UNIFORM, SWEEP_FAMILIES
from critical_coupling import critical_coupling
from errors import BadParameters
from estimators import (
    chain_bounds,
    chain_walk,
    chi,
    estimator_binary,
    estimator_dumbbell,
    estimator_star,
    estimator_star_normal,
    lower_by_diameter,
    lower_by_partition,
    mu,
    mu_exact,
    random_walk_estimate,
    upper_by_partition,
)
from montecarlo import McCampaign, run_campaign, run_sweep, sweep_sizes
from rearrange import rearrangement_campaign
from tree_model import NormalDistribution, UniformDistribution, generate_tree


class FigureReproductionPipeline:
    """
    Regenerates the data behind the expected-critical-coupling figures.

    Workflow:
    1. Resolve the figure id (numbers 3-11 or a name such as 'tadpole')
    2. Run the Monte Carlo campaigns the figure needs
    3. Evaluate the closed-form overlays (estimators and bounds)
    4. Write one CSV per figure into the output directory

    Only data is produced; plotting is left to external tools.
    """

    def __init__(
        self,
        out_dir,
        samples: int = 100_000,
        master_seed: int = 0,
        workers: int = 1,
        grids: Optional[Dict] = None,
        progress: bool = False,
    ):
        """
        Initialize the pipeline.

        Args:
            out_dir: Directory receiving the CSV files
            samples: Frequency assignments per campaign
            master_seed: Seed shared by every campaign
            workers: Worker processes per campaign
            grids: Overrides for the default n grids (see constants.FIGURE_GRIDS)
            progress: Show tqdm bars for campaigns
        """
        self.out_dir = Path(out_dir)
        self.samples = samples
        self.master_seed = master_seed
        self.workers = workers
        self.progress = progress
        self.grids = {**FIGURE_GRIDS, **(grids or {})}
        self._sweeps: Dict[str, pd.DataFrame] = {}

        self.uniform = UniformDistribution()
        self.normal = NormalDistribution()

        self._builders: Dict[str, Callable[[], List[Path]]] = {
            "walk": self.walk_figure,
            "chain": self.chain_figure,
            "star": self.star_figure,
            "mu": self.mu_figure,
            "dumbbell": self.dumbbell_figure,
            "binary": self.binary_figure,
            "tadpole": self.tadpole_figure,
            "diameter": self.diameter_figure,
            "partition": self.partition_figure,
            "partition_log": self.partition_log_figure,
            "normal_partition_log": self.normal_partition_log_figure,
            "normal_order": self.normal_order_figure,
            "rearrange": self.rearrange_figure,
        }

        print(f" Figure pipeline ready")
        print(f"   Output directory: {self.out_dir}")
        print(f"   Samples per campaign: {samples}")
        print(f"   Master seed: {master_seed}")
        print(f"   Workers: {workers}")

    @staticmethod
    def resolve(figure_id) -> str:
        key = str(figure_id).strip().lower()
        if key not in FIGURE_IDS:
            raise BadParameters(
                f"unknown figure id '{figure_id}' (known: {', '.join(sorted(FIGURE_IDS))})"
            )
        return FIGURE_IDS[key]

    def run(self, figure_id) -> Dict:
        """
        Produce the data files of one figure.

        Returns:
            Dict with figure name, written files and pipeline_metrics
        """
        name = self.resolve(figure_id)
        print(f"\n{'=' * 80}")
        print(f" Figure {figure_id} ({name})")
        print(f"{'=' * 80}")

        self.out_dir.mkdir(parents=True, exist_ok=True)
        start = time.time()
        files = self._builders[name]()
        elapsed = time.time() - start

        for path in files:
            print(f"  ✓ Wrote {path}")
        print(f"  Figure time: {elapsed:.3f}s")

        return {
            "figure": name,
            "files": [str(p) for p in files],
            "pipeline_metrics": {
                "timings": {"total": elapsed},
                "stats": {"files": len(files), "samples": self.samples},
                "details": {"master_seed": self.master_seed, "workers": self.workers},
            },
        }

    # ------------------ helpers ------------------

    def _write(self, frame: pd.DataFrame, filename: str) -> Path:
        path = self.out_dir / filename
        frame.to_csv(path, index=False)
        return path

    def _estimate(self, family: str, n: int, dist):
        campaign = McCampaign(
            family=family, n=n, dist=dist, samples=self.samples, master_seed=self.master_seed
        )
        return run_campaign(campaign, workers=self.workers, progress=self.progress)

    def _family_curve(self, family: str, ns: List[int]) -> pd.DataFrame:
        rows = []
        for n in sweep_sizes(family, ns):
            uniform = self._estimate(family, n, self.uniform)
            normal = self._estimate(family, n, self.normal)
            rows.append(
                {
                    "n": n,
                    "mean_uniform": uniform.mean,
                    "stderr_uniform": uniform.stderr,
                    "mean_normal": normal.mean,
                    "stderr_normal": normal.stderr,
                }
            )
            print(f"   {family} n={n}: uniform {uniform.mean:.4f}, normal {normal.mean:.4f}")
        return pd.DataFrame(rows)

    def _sweep(self, dist) -> pd.DataFrame:
        if dist.kind not in self._sweeps:
            print(f"   Running {dist.kind} family sweep...")
            self._sweeps[dist.kind] = run_sweep(
                SWEEP_FAMILIES,
                self.grids["sweep"],
                dist=dist,
                samples=self.samples,
                master_seed=self.master_seed,
                workers=self.workers,
                progress=self.progress,
            )
        return self._sweeps[dist.kind].copy()

    # ------------------ figures ------------------

    def walk_figure(self) -> List[Path]:
        n = self.grids["walk_n"]
        tree = generate_tree("chain", n, self.uniform, self.master_seed)
        walk = chain_walk(tree.freqs)
        frame = pd.DataFrame(
            {
                "j": np.arange(1, n),
                "partial_sum": walk,
                "k_c": critical_coupling(tree).k_c,
                "chi": chi(n),
            }
        )
        return [self._write(frame, "fig03_walk.csv")]

    def chain_figure(self) -> List[Path]:
        frame = self._family_curve("chain", self.grids["order"])
        bounds = [chain_bounds(n) for n in frame["n"]]
        frame["chi"] = [chi(n) for n in frame["n"]]
        frame["lower"] = [b.lower for b in bounds]
        frame["upper"] = [b.upper for b in bounds]
        frame["kolmogorov"] = [b.kolmogorov for b in bounds]
        frame["random_walk"] = [random_walk_estimate(n) for n in frame["n"]]
        return [self._write(frame, "fig04_chain.csv")]

    def star_figure(self) -> List[Path]:
        frame = self._family_curve("star", [n for n in self.grids["order"] if n >= 3])
        frame["estimator_star"] = [estimator_star(n) for n in frame["n"]]
        frame["estimator_star_normal"] = [estimator_star_normal(n) for n in frame["n"]]
        frame["limit"] = 0.5
        return [self._write(frame, "fig05_star.csv")]

    def mu_figure(self) -> List[Path]:
        xs = self.grids["mu"]
        frame = pd.DataFrame(
            {
                "x": xs,
                "mu": [mu(x) for x in xs],
                "mu_exact": [mu_exact(x) for x in xs],
                "sqrt_2_log": [math.sqrt(2.0 * math.log(x)) if x >= 1 else float("nan") for x in xs],
            }
        )
        return [self._write(frame, "fig06_mu.csv")]

    def dumbbell_figure(self) -> List[Path]:
        frame = self._family_curve("dumbbell", self.grids["even_order"])
        frame["leading"] = [math.sqrt(n / (24.0 * math.pi)) for n in frame["n"]]
        frame["estimator_dumbbell"] = [estimator_dumbbell(n) for n in frame["n"]]
        return [self._write(frame, "fig07_dumbbell.csv")]

    def binary_figure(self) -> List[Path]:
        frame = self._family_curve("binary", [n for n in self.grids["order"] if n >= 3])
        frame["estimator_binary"] = [estimator_binary(n) for n in frame["n"]]
        frame["chi"] = [chi(n) for n in frame["n"]]
        frame["estimator_dumbbell"] = [
            estimator_dumbbell(n) if n >= 4 and n % 2 == 0 else float("nan") for n in frame["n"]
        ]
        return [self._write(frame, "fig08_binary.csv")]

    def tadpole_figure(self) -> List[Path]:
        d = self.grids["tadpole_diameter"]
        frame = self._family_curve(f"tadpole({d})", self.grids["order"])
        frame["chi_d_plus_1"] = chi(d + 1)
        return [self._write(frame, f"tadpole_d{d}.csv")]

    def diameter_figure(self) -> List[Path]:
        frame = self._sweep(self.uniform)
        frame["x"] = frame["D"]
        frame["chi_d_plus_1"] = [lower_by_diameter(d) for d in frame["D"]]
        return [self._write(frame, "fig09_diameter.csv")]

    def partition_figure(self) -> List[Path]:
        frame = self._sweep(self.uniform)
        frame["x"] = frame["P"]
        frame["lower_by_partition"] = [lower_by_partition(p) for p in frame["P"]]
        return [self._write(frame, "fig10_partition.csv")]

    def _partition_log(self, dist, filename: str) -> List[Path]:
        frame = self._sweep(dist)
        frame["x"] = frame["plog"]
        frame["upper_by_partition"] = [
            upper_by_partition(n, p, dist.sigma) for n, p in zip(frame["n"], frame["P"])
        ]
        return [self._write(frame, filename)]

    def partition_log_figure(self) -> List[Path]:
        return self._partition_log(self.uniform, "fig11_partition_log.csv")

    def normal_partition_log_figure(self) -> List[Path]:
        return self._partition_log(self.normal, "normal_partition_log.csv")

    def normal_order_figure(self) -> List[Path]:
        frame = self._sweep(self.normal)
        frame["x"] = frame["n"]
        frame["chi"] = [chi(n, SIGMA_UNIFORM) for n in frame["n"]]
        frame["star_normal"] = [estimator_star_normal(n) for n in frame["n"]]
        return [self._write(frame, "normal_order.csv")]

    def rearrange_figure(self) -> List[Path]:
        n = self.grids["rearrange_n"]
        result = rearrangement_campaign(
            "binary",
            n,
            self.uniform,
            samples=self.samples,
            master_seed=self.master_seed,
            workers=self.workers,
            keep_values=True,
            pool="farthest",
        )
        print(
            f"   binary n={n}: before {result.mean_before:.3f}, after {result.mean_after:.3f} "
            f"(range {result.min_after:.3f}-{result.max_after:.3f}, violations {result.violations})"
        )
        summary = pd.DataFrame([result.model_dump(exclude={"after_values"})])
        values = pd.DataFrame({"k_c_after": result.after_values})
        return [
            self._write(summary, f"rearrange_binary{n}.csv"),
            self._write(values, f"rearrange_binary{n}_values.csv"),
        ]


# ------------------ Example Usage ------------------
if __name__ == "__main__":
    pipeline = FigureReproductionPipeline(
        out_dir=os.getenv("KURAMOTO_OUTPUT_DIR", "data/figures"), samples=10_000
    )
    for figure in ("4", "5", "7", "8", "9", "10", "11"):
        pipeline.run(figure)
