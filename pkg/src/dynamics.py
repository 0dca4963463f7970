"""
Direct integration of the Kuramoto equations on a tree.

In the rotating frame phi_i = theta_i - mean*t the equations read

    dphi_i/dt = (w_i - mean) + k * sum over edges (i, j) of sin(phi_j - phi_i)

and a frequency fixed point is a state with every dphi_i/dt = 0. The
integrator is fixed-step RK4; the coupling sum runs over tree edges only.
bisect_threshold turns the integrator into an empirical oracle for k_c.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from constants import (
    DEFAULT_DT,
    DEFAULT_FP_TOL,
    DEFAULT_SAVE_STRIDE,
    DEFAULT_T_MAX,
    SUSTAIN_FRACTION,
)
from errors import BadParameters, BracketInvalid, NonFiniteState
from tree_model import KuramotoTree, stream_rng


class SimulationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    dt: float = Field(default=DEFAULT_DT, gt=0)
    t_max: float = Field(default=DEFAULT_T_MAX, gt=0)
    fp_tol: float = Field(default=DEFAULT_FP_TOL, gt=0)
    init_phases: Literal["zeros", "uniform"] = "zeros"
    save_stride: int = Field(default=DEFAULT_SAVE_STRIDE, ge=1)
    sustain_fraction: float = Field(default=SUSTAIN_FRACTION, gt=0, le=1)
    early_stop: bool = False
    frame: Literal["rotating", "lab"] = "rotating"

    @model_validator(mode="after")
    def _check_horizon(self) -> "SimulationConfig":
        if not self.dt < self.t_max:
            raise ValueError(f"dt ({self.dt}) must be smaller than t_max ({self.t_max})")
        return self

    @property
    def steps(self) -> int:
        return max(1, int(round(self.t_max / self.dt)))


class Trajectory(BaseModel):
    """Saved phases in the rotating frame, one row per saved time point."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: float
    times: np.ndarray
    phases: np.ndarray
    final_velocities: np.ndarray
    synchronized: bool

    def to_frame(self) -> pd.DataFrame:
        columns = {"t": self.times}
        for i in range(self.phases.shape[1]):
            columns[f"phi_{i}"] = self.phases[:, i]
        return pd.DataFrame(columns)


def save_trajectory(trajectory: Trajectory, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trajectory.to_frame().to_csv(path, index=False)
    return path


def _initial_phases(n: int, cfg: SimulationConfig, seed: int) -> np.ndarray:
    if cfg.init_phases == "zeros":
        return np.zeros(n)
    return stream_rng(seed).uniform(-math.pi / 2, math.pi / 2, n)


def integrate(
    tree: KuramotoTree,
    k: float,
    cfg: Optional[SimulationConfig] = None,
    seed: int = 0,
) -> Trajectory:
    """
    Fixed-step RK4 integration of the Kuramoto equations on a tree.

    Args:
        tree: Kuramoto tree
        k: Coupling strength (>= 0)
        cfg: Integrator settings; defaults to SimulationConfig()
        seed: Seed for uniform initial phases

    Returns:
        Trajectory; synchronized is True when max |dphi/dt| stayed below
        fp_tol over the final sustain window and at the end of the run
    """
    cfg = cfg or SimulationConfig()
    if not math.isfinite(k) or k < 0:
        raise BadParameters(f"coupling must be finite and >= 0, got {k}")

    n = tree.n
    heads = tree.edge_array[:, 0]
    tails = tree.edge_array[:, 1]
    mean = tree.mean_frequency
    lab = cfg.frame == "lab"
    drift = tree.freqs.copy() if lab else tree.deviations
    # velocities reported in the rotating frame either way
    shift = mean if lab else 0.0

    def rhs(phi: np.ndarray) -> np.ndarray:
        pull = k * np.sin(phi[tails] - phi[heads])
        return drift + np.bincount(heads, pull, n) - np.bincount(tails, pull, n)

    dt = cfg.dt
    steps = cfg.steps
    window = max(1, int(math.ceil(cfg.sustain_fraction * steps)))
    window_start = steps - window

    phi = _initial_phases(n, cfg, seed)
    times = [0.0]
    saved = [phi.copy()]
    sustained = True
    quiet_steps = 0
    stopped_early = False
    last_step = steps

    for step in range(steps):
        k1 = rhs(phi)
        speed = float(np.abs(k1 - shift).max())
        if step >= window_start and speed >= cfg.fp_tol:
            sustained = False
        if cfg.early_stop:
            quiet_steps = quiet_steps + 1 if speed < cfg.fp_tol else 0
            if quiet_steps >= window:
                stopped_early = True
                last_step = step
                break

        k2 = rhs(phi + 0.5 * dt * k1)
        k3 = rhs(phi + 0.5 * dt * k2)
        k4 = rhs(phi + dt * k3)
        phi = phi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        done = step + 1
        if done % cfg.save_stride == 0 or done == steps:
            t = done * dt
            if not np.all(np.isfinite(phi)):
                raise NonFiniteState(f"non-finite phase at t={t:.6g}")
            times.append(t)
            saved.append(phi - mean * t if lab else phi.copy())

    if stopped_early and (last_step % cfg.save_stride) != 0:
        t = last_step * dt
        times.append(t)
        saved.append(phi - mean * t if lab else phi.copy())

    final_velocities = rhs(phi) - shift
    if not np.all(np.isfinite(final_velocities)):
        raise NonFiniteState("non-finite phase velocity at the end of the run")

    if stopped_early:
        synchronized = True
    else:
        synchronized = sustained and float(np.abs(final_velocities).max()) < cfg.fp_tol

    return Trajectory(
        k=float(k),
        times=np.array(times),
        phases=np.vstack(saved),
        final_velocities=final_velocities,
        synchronized=synchronized,
    )


def _integrate_job(job: Tuple[KuramotoTree, float, int], cfg: Optional[SimulationConfig]) -> Trajectory:
    tree, k, seed = job
    return integrate(tree, k, cfg, seed)


def integrate_many(
    jobs: Sequence[Tuple[KuramotoTree, float, int]],
    cfg: Optional[SimulationConfig] = None,
    workers: int = 1,
) -> List[Trajectory]:
    """Run independent (tree, k, seed) integrations; results follow the input order."""
    if workers <= 1 or len(jobs) <= 1:
        return [_integrate_job(job, cfg) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_integrate_job, jobs, [cfg] * len(jobs)))


def bisect_threshold(
    tree: KuramotoTree,
    lo: float = 0.0,
    hi: Optional[float] = None,
    rel_tol: float = 0.01,
    cfg: Optional[SimulationConfig] = None,
    guess: Optional[float] = None,
    seed: int = 0,
) -> float:
    """
    Empirical synchronization threshold by bisection on k.

    Args:
        tree: Kuramoto tree
        lo: Coupling that must not synchronize
        hi: Coupling that must synchronize; defaults to 2*guess, or the total
            absolute deviation when no guess is given
        rel_tol: Stop once (hi - lo) / hi < rel_tol
        cfg: Integrator settings; runs stop early once the fixed point has held
            for the sustain window
        guess: Optional analytic estimate used for the default hi

    Returns:
        Midpoint of the final bracket
    """
    cfg = (cfg or SimulationConfig()).model_copy(update={"early_stop": True})
    if lo < 0 or rel_tol <= 0:
        raise BadParameters(f"need lo >= 0 and rel_tol > 0, got lo={lo}, rel_tol={rel_tol}")
    if hi is None:
        hi = 2.0 * guess if guess else float(np.abs(tree.deviations).sum())
    if not hi > lo:
        raise BracketInvalid(f"bracket [{lo}, {hi}] is empty")

    if not integrate(tree, hi, cfg, seed).synchronized:
        raise BracketInvalid(f"k={hi} does not synchronize")
    if integrate(tree, lo, cfg, seed).synchronized:
        raise BracketInvalid(f"k={lo} already synchronizes")

    while (hi - lo) / hi >= rel_tol:
        mid = 0.5 * (lo + hi)
        if integrate(tree, mid, cfg, seed).synchronized:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def order_parameter(trajectory: Trajectory, t_index: int) -> float:
    """r = |mean of exp(i*phi)| at one saved time point."""
    rows = trajectory.phases.shape[0]
    if not -rows <= t_index < rows:
        raise BadParameters(f"t_index {t_index} outside 0..{rows - 1}")
    return float(abs(np.exp(1j * trajectory.phases[t_index]).mean()))
