"""Stochastic particle engine: drift, pairwise interactions, moment binning.

Particle runs are 1D (the cross-scale comparison is one-dimensional);
the interaction rules themselves are written per pair and are exercised
directly by the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from . import backend
from .grid import Grid, MacroState
from .params import EffectiveParams

__all__ = [
    "MicroConfig",
    "Ensemble",
    "consistency_bound",
    "init_ensemble",
    "drift_step",
    "interaction_step",
    "moments_on_grid",
    "run_micro",
    "velocity_kick",
    "velocity_core",
    "leadership_core",
    "leadership_binary",
    "leadership_generalized",
]

LEADERSHIP_RULES = ("binary", "generalized")


@dataclass
class MicroConfig:
    """Particle run configuration.

    dt must satisfy the consistency bound dt <= 1/(max(mu_eff, eta_eff) * sup B);
    run_micro enforces it. snapshots is the number of evenly spaced interior
    snapshots emitted in addition to the initial and final ones.
    """

    N: int
    dt: float
    T: float
    leadership_rule: str = "generalized"
    seed: int = 0
    snapshots: int = 10

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError(f"need at least 2 particles, got N={self.N}")
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.T < 0.0:
            raise ValueError(f"T must be nonnegative, got {self.T!r}")
        if self.leadership_rule not in LEADERSHIP_RULES:
            raise ValueError(
                f"leadership_rule must be one of {LEADERSHIP_RULES}, got {self.leadership_rule!r}"
            )


@dataclass
class Ensemble:
    """Particle arrays plus the generator that owns the run's random stream."""

    x: np.ndarray
    v: np.ndarray
    lam: np.ndarray
    rng: np.random.Generator
    seed: int
    counters: dict = field(default_factory=lambda: {"coincident": 0, "clamped": 0, "outside_grid": 0})

    @property
    def N(self) -> int:
        return int(self.x.shape[0])


def consistency_bound(eff: EffectiveParams, sup_kernel: float = 1.0) -> float:
    """Largest dt for which the Bernoulli acceptance stays a probability."""
    rate = max(eff.mu_eff, eff.eta_eff) * sup_kernel
    return math.inf if rate == 0.0 else 1.0 / rate


# Pure pair rules (scalar or array inputs), used by the engines and tests.


def velocity_kick(x, xs, v, vs, lam, alpha: float, beta: float, gamma: float):
    """Velocity increment of the focal particle in an accepted interaction."""
    d = np.asarray(x) - np.asarray(xs)
    return alpha * d / (d * d) + (1.0 - lam) * (beta * (np.asarray(vs) - v) + gamma * (-d))


def velocity_core(v, vs, lam, lams, beta: float):
    """Conservative alignment exchange: the pair sum of velocities is invariant."""
    f = 1.0 - 0.5 * (np.asarray(lam) + np.asarray(lams))
    return v + f * (beta * (np.asarray(vs) - v)), vs + f * (beta * (np.asarray(v) - vs))


def leadership_core(lam, lams, nu: float):
    """Conservative leadership exchange: the pair sum is invariant."""
    return lam + nu * (np.asarray(lams) - lam), lams + nu * (np.asarray(lam) - lams)


def leadership_binary(lam):
    """Role swap; applying it twice returns the input exactly."""
    return 1.0 - np.asarray(lam)


def leadership_generalized(lam, lams, nu: float, delta: float):
    """Imitation plus the small non-conservative drive (unclamped)."""
    lam = np.asarray(lam)
    lams = np.asarray(lams)
    ln = lam + nu * (lams - lam) + delta * (1.0 - 2.0 * lam + nu * (lam - lams))
    lsn = lams + nu * (lam - lams) + delta * (1.0 - 2.0 * lams + nu * (lams - lam))
    return ln, lsn


def init_ensemble(scenario, N: int, seed: int) -> Ensemble:
    """Sample positions from the scenario's initial density (inverse CDF).

    Velocities and leadership degrees are set deterministically from the
    scenario's initial fields (monokinetic start). Identical arguments
    reproduce identical ensembles bit for bit.
    """
    if scenario.dim != 1:
        raise ValueError("particle runs are implemented in 1D only")
    if N < 2:
        raise ValueError(f"need at least 2 particles, got N={N}")
    rng = np.random.default_rng(seed)
    u = rng.random(N)
    if scenario.ppf is not None:
        x = np.asarray(scenario.ppf(u), dtype=float)
    else:
        x = _numeric_ppf(scenario, u)
    v = np.broadcast_to(np.asarray(scenario.u0(x), dtype=float), x.shape).copy()
    lam = np.broadcast_to(np.asarray(scenario.l0(x), dtype=float), x.shape).copy()
    return Ensemble(x=x, v=v, lam=lam, rng=rng, seed=seed)


def _numeric_ppf(scenario, u: np.ndarray) -> np.ndarray:
    """Tabulated inverse CDF of the scenario's initial density."""
    (lo, hi) = scenario.extents[0]
    m = 1 << 16
    edges = np.linspace(lo, hi, m + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    pdf = np.asarray(scenario.rho0(mids), dtype=float)
    if np.any(pdf < 0.0) or not np.all(np.isfinite(pdf)):
        raise ValueError("initial density must be nonnegative and finite")
    cdf = np.concatenate([[0.0], np.cumsum(pdf * (edges[1] - edges[0]))])
    total = cdf[-1]
    if not (total > 0.0) or not math.isfinite(total):
        raise ValueError("initial density is not normalizable on the domain")
    return np.interp(u * total, cdf, edges)


def drift_step(ens: Ensemble, dt: float) -> Ensemble:
    """Free transport: x <- x + v dt; velocities and leaderships unchanged."""
    ens.x += ens.v * dt
    return ens


def interaction_step(
    ens: Ensemble,
    eff: EffectiveParams,
    dt: float,
    rule: str = "generalized",
) -> Ensemble:
    """One pairing sweep with Bernoulli-gated velocity/leadership updates."""
    if rule not in LEADERSHIP_RULES:
        raise ValueError(f"unknown leadership rule {rule!r}")
    nc, ncl = backend.interaction_pass_1d(
        ens.x,
        ens.v,
        ens.lam,
        eff.alpha,
        eff.beta,
        eff.gamma,
        eff.mu_eff,
        eff.eta_eff,
        dt,
        eff.nu,
        eff.delta,
        rule == "binary",
        eff.R,
        ens.rng,
    )
    ens.counters["coincident"] += nc
    ens.counters["clamped"] += ncl
    return ens


def moments_on_grid(
    ens: Ensemble,
    grid: Grid,
    n_norm: Optional[int] = None,
    counters: Optional[dict] = None,
) -> MacroState:
    """Bin particles to cell moments: density, mean velocity, mean leadership.

    rho = count/(n_norm * cell area) with n_norm defaulting to the current
    particle count; a run that absorbs particles passes its initial count so
    the binned density reflects the lost mass. Particles outside the grid
    are assigned to the nearest boundary cell (and counted).
    """
    if grid.dim != 1:
        raise ValueError("moment binning is implemented for 1D grids")
    n = grid.shape[0]
    lo, hi = grid.extents[0]
    dx = grid.dx[0]
    norm = ens.N if n_norm is None else int(n_norm)
    raw = np.floor((ens.x - lo) / dx).astype(np.int64)
    outside = int(np.count_nonzero((raw < 0) | (raw > n - 1)))
    if counters is not None:
        counters["outside_grid"] = counters.get("outside_grid", 0) + outside
    idx = np.clip(raw, 0, n - 1)
    count = np.bincount(idx, minlength=n).astype(float)
    vsum = np.bincount(idx, weights=ens.v, minlength=n)
    lsum = np.bincount(idx, weights=ens.lam, minlength=n)
    rho = count / (norm * dx)
    nonzero = count > 0
    u = np.zeros((1, n))
    l = np.zeros(n)
    np.divide(vsum, count, out=u[0], where=nonzero)
    np.divide(lsum, count, out=l, where=nonzero)
    return MacroState(rho=rho, u=u, l=l, t=0.0)


def run_micro(
    scenario,
    config: MicroConfig,
    on_step: Optional[Callable[[int, Ensemble], None]] = None,
    eff: Optional[EffectiveParams] = None,
):
    """Alternate drift and interaction from t=0 to T, binning snapshots.

    Effective coefficients default to the scaled scenario parameters; pass
    eff explicitly to override (e.g. zero rates for pure transport). Under
    null-Dirichlet density boundary data, particles that exit the domain
    are removed (mass is absorbed at the boundary). Returns a
    SnapshotSeries on the scenario grid.
    """
    from .params import apply_scaling
    from .snapshots import SnapshotSeries, snapshot_steps

    if eff is None:
        eff = apply_scaling(scenario.params)
    bound = consistency_bound(eff)
    if config.dt > bound * (1.0 + 1e-12):
        raise ValueError(
            f"dt={config.dt} violates the interaction consistency bound {bound}"
        )
    grid = scenario.grid()
    ens = init_ensemble(scenario, config.N, config.seed)
    n0 = ens.N
    absorb = scenario.bc.rho_bc == 0.0
    lo, hi = scenario.extents[0]
    nsteps = int(round(config.T / config.dt)) if config.T > 0 else 0
    emit_at = snapshot_steps(nsteps, config.snapshots)

    series = SnapshotSeries(
        grid=grid,
        meta={
            "scenario": scenario.name,
            "mode": "micro",
            "seed": config.seed,
            "N": config.N,
            "dt": config.dt,
            "T": config.T,
            "leadership_rule": config.leadership_rule,
            "backend": backend.BACKEND,
            "params": scenario.params.as_dict(),
        },
    )

    def emit(step: int) -> None:
        state = moments_on_grid(ens, grid, n_norm=n0, counters=ens.counters)
        state.t = step * config.dt
        series.append(step, state)

    if 0 in emit_at:
        emit(0)
    for step in range(1, nsteps + 1):
        drift_step(ens, config.dt)
        if absorb:
            keep = (ens.x >= lo) & (ens.x <= hi)
            if not keep.all():
                ens.x = ens.x[keep]
                ens.v = ens.v[keep]
                ens.lam = ens.lam[keep]
        interaction_step(ens, eff, config.dt, config.leadership_rule)
        if on_step is not None:
            on_step(step, ens)
        if step in emit_at:
            emit(step)
    series.meta["counters"] = dict(ens.counters)
    series.meta["particles_remaining"] = ens.N
    return series
