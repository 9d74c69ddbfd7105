"""Micro/macro agreement protocol on the 1D benchmark scenario.

For each (R, epsilon) the macroscopic solve is deterministic, so it runs
once and is shared across every particle seed. Particle runs use the
involutive leadership exchange, which matches the hydrodynamic limit of
the leadership source at these interaction rates.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .grid import MacroState
from .macro import SolverConfig, run_macro
from .metrics import l2_distance
from .micro import MicroConfig, run_micro
from .scenarios import build_scenario

COMPARISON_COLUMNS = ("R", "epsilon", "N", "seed", "l2_rho", "l2_rhou", "l2_rhol", "dx", "dt")


@dataclass
class ComparisonRow:
    R: float
    epsilon: float
    N: int
    seed: int
    l2_rho: float
    l2_rhou: float
    l2_rhol: float
    dx: float
    dt: float


def macro_reference(R: float, epsilon: float) -> MacroState:
    """Final macroscopic state of the 1D benchmark for one parameter point."""
    scenario = build_scenario("test1d", R=R, epsilon=epsilon)
    series = run_macro(scenario, SolverConfig(snapshots=0))
    return series.states[-1]


def run_comparison_1d(
    R: float,
    epsilon: float,
    N: int,
    seed: int,
    rule: str = "binary",
    macro_state: Optional[MacroState] = None,
) -> ComparisonRow:
    """One particle run against the macroscopic reference; L2 gaps of the moments."""
    scenario = build_scenario("test1d", R=R, epsilon=epsilon)
    grid = scenario.grid()
    if macro_state is None:
        macro_state = macro_reference(R, epsilon)
    config = MicroConfig(
        N=N, dt=scenario.dt, T=scenario.T, leadership_rule=rule, seed=seed, snapshots=0
    )
    mi = run_micro(scenario, config).states[-1]
    ma = macro_state
    return ComparisonRow(
        R=R,
        epsilon=epsilon,
        N=N,
        seed=seed,
        l2_rho=l2_distance(mi.rho, ma.rho, grid),
        l2_rhou=l2_distance(mi.rho * mi.u[0], ma.rho * ma.u[0], grid),
        l2_rhol=l2_distance(mi.rho * mi.l, ma.rho * ma.l, grid),
        dx=grid.dx[0],
        dt=scenario.dt,
    )


def _grid_job(args: Tuple) -> ComparisonRow:
    R, epsilon, N, seed, rule, rho, u, l, t = args
    macro_state = MacroState(rho=rho, u=u, l=l, t=t)
    return run_comparison_1d(R, epsilon, N, seed, rule=rule, macro_state=macro_state)


def run_comparison_grid(
    Rs: Sequence[float],
    epsilons: Sequence[float],
    N: int,
    seeds: Sequence[int],
    rule: str = "binary",
    max_workers: Optional[int] = None,
) -> List[ComparisonRow]:
    """Full (R, epsilon, seed) sweep; macro references are computed once each."""
    cache: Dict[Tuple[float, float], MacroState] = {}
    for R in Rs:
        for epsilon in epsilons:
            cache[(R, epsilon)] = macro_reference(R, epsilon)

    jobs = []
    for R in Rs:
        for epsilon in epsilons:
            ma = cache[(R, epsilon)]
            for seed in seeds:
                jobs.append((R, epsilon, N, seed, rule, ma.rho, ma.u, ma.l, ma.t))

    workers = max_workers if max_workers is not None else (os.cpu_count() or 1)
    workers = min(workers, len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_grid_job, jobs))
    else:
        rows = [_grid_job(job) for job in jobs]
    return rows


def summarize_rows(rows: Iterable[ComparisonRow]) -> Dict[Tuple[float, float], Dict[str, float]]:
    """Mean L2 gaps over seeds, keyed by (R, epsilon)."""
    groups: Dict[Tuple[float, float], List[ComparisonRow]] = {}
    for row in rows:
        groups.setdefault((row.R, row.epsilon), []).append(row)
    out = {}
    for key, members in groups.items():
        out[key] = {
            "l2_rho": float(np.mean([r.l2_rho for r in members])),
            "l2_rhou": float(np.mean([r.l2_rhou for r in members])),
            "l2_rhol": float(np.mean([r.l2_rhol for r in members])),
            "count": float(len(members)),
        }
    return out


def write_comparison_csv(rows: Iterable[ComparisonRow], path: Union[str, Path]) -> Path:
    """Write rows in the fixed comparison column order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# " + ",".join(COMPARISON_COLUMNS)]
    for r in rows:
        lines.append(
            "%.17g,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g"
            % (r.R, r.epsilon, r.N, r.seed, r.l2_rho, r.l2_rhou, r.l2_rhol, r.dx, r.dt)
        )
    path.write_text("\n".join(lines) + "\n")
    return path
