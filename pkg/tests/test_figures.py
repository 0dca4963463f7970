"""
tests/test_figures.py
=====================
FigureReproductionPipeline on small grids and sample counts.
"""

import math

import pandas as pd
import pytest

from errors import BadParameters
from estimators import chi, estimator_star
from figures import FigureReproductionPipeline

SMALL_GRIDS = {
    "order": [3, 5, 8],
    "even_order": [4, 6],
    "sweep": [10, 16],
    "mu": [0, 1, 2, 5],
    "walk_n": 12,
    "rearrange_n": 15,
}


@pytest.fixture
def pipeline(tmp_path):
    return FigureReproductionPipeline(tmp_path, samples=200, master_seed=1, grids=SMALL_GRIDS)


def test_resolve():
    assert FigureReproductionPipeline.resolve(4) == "chain"
    assert FigureReproductionPipeline.resolve(" Tadpole ") == "tadpole"
    with pytest.raises(BadParameters):
        FigureReproductionPipeline.resolve("12")


def test_chain_figure(pipeline):
    result = pipeline.run("4")
    assert result["figure"] == "chain"
    assert result["pipeline_metrics"]["stats"] == {"files": 1, "samples": 200}
    frame = pd.read_csv(result["files"][0])
    assert frame["n"].tolist() == [3, 5, 8]
    assert {"mean_uniform", "stderr_normal", "chi", "lower", "upper", "kolmogorov", "random_walk"} <= set(frame)
    assert frame["chi"].tolist() == pytest.approx([chi(n) for n in (3, 5, 8)])


def test_walk_figure(pipeline):
    frame = pd.read_csv(pipeline.run("walk")["files"][0])
    assert frame["j"].tolist() == list(range(1, 12))
    assert frame["partial_sum"].abs().max() == pytest.approx(frame["k_c"].iloc[0])


def test_mu_figure(pipeline):
    frame = pd.read_csv(pipeline.run("6")["files"][0])
    assert frame.loc[frame["x"] == 2, "mu_exact"].item() == pytest.approx(2 / math.sqrt(math.pi), rel=1e-8)
    assert math.isnan(frame.loc[frame["x"] == 0, "sqrt_2_log"].item())


def test_star_figure_skips_tiny_stars(pipeline):
    frame = pd.read_csv(pipeline.run("5")["files"][0])
    assert frame["n"].tolist() == [3, 5, 8]
    assert frame["estimator_star"].tolist() == pytest.approx([estimator_star(n) for n in (3, 5, 8)])
    assert (frame["limit"] == 0.5).all()


def test_dumbbell_and_binary_figures(pipeline):
    dumbbell = pd.read_csv(pipeline.run("7")["files"][0])
    assert dumbbell["n"].tolist() == [4, 6]
    binary = pd.read_csv(pipeline.run("8")["files"][0])
    assert math.isnan(binary.loc[binary["n"] == 5, "estimator_dumbbell"].item())


def test_tadpole_figure_keeps_buildable_sizes(tmp_path):
    pipeline = FigureReproductionPipeline(
        tmp_path, samples=100, grids={**SMALL_GRIDS, "order": [5, 9, 12], "tadpole_diameter": 4}
    )
    frame = pd.read_csv(pipeline.run("tadpole")["files"][0])
    assert frame["n"].tolist() == [5, 9, 12]
    assert frame["chi_d_plus_1"].tolist() == pytest.approx([chi(5)] * 3)


def test_sweep_figures_share_one_sweep(pipeline):
    diameter_frame = pd.read_csv(pipeline.run("9")["files"][0])
    partition_frame = pd.read_csv(pipeline.run("10")["files"][0])
    assert list(pipeline._sweeps) == ["uniform"]
    assert diameter_frame["mean"].tolist() == partition_frame["mean"].tolist()
    assert (diameter_frame["x"] == diameter_frame["D"]).all()
    plog = pd.read_csv(pipeline.run("11")["files"][0])
    assert (plog["upper_by_partition"] > 0).all()


def test_normal_figures(pipeline):
    pipeline.run("normal-plog")
    frame = pd.read_csv(pipeline.run("normal-order")["files"][0])
    assert (frame["dist"] == "normal").all()
    assert set(pipeline._sweeps) == {"normal"}


def test_rearrange_figure(pipeline, tmp_path):
    files = pipeline.run("rearrange")["files"]
    summary = pd.read_csv(files[0])
    values = pd.read_csv(files[1])
    assert summary["violations"].item() == 0
    assert len(values) == 200
    assert values["k_c_after"].max() == pytest.approx(summary["max_after"].item())
    assert files[0].endswith("rearrange_binary15.csv")
