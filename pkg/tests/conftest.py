import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
for folder in (ROOT / "src", ROOT / "pipeline", ROOT):
    if str(folder) not in sys.path:
        sys.path.insert(0, str(folder))

from tree_model import build_tree, generate_tree, UniformDistribution  # noqa: E402

TREES_DIR = ROOT / "data" / "trees"


@pytest.fixture
def trees_dir() -> Path:
    return TREES_DIR


@pytest.fixture
def two_vertex():
    return build_tree(2, [(0, 1)], [0.0, 1.0])


@pytest.fixture
def chain3():
    return build_tree(3, [(0, 1), (1, 2)], [0.0, 0.0, 1.0])


@pytest.fixture
def random_trees():
    """Seeded random trees with n in [2, 10] and Uniform[0,1] frequencies."""
    rng = np.random.default_rng(2024)
    trees = []
    for seed in range(50):
        n = int(rng.integers(2, 11))
        trees.append(generate_tree("random_uniform", n, UniformDistribution(), seed=seed))
    return trees
