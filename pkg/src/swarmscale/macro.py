"""Nonlocal hydrodynamic solver.

Three schemes, one per field: a conservative push-forward for the
density, explicit or implicit finite differences for the momentum
equation, and a first-order semi-Lagrangian update with (bi)linear
interpolation for the leadership field. All sub-steps of one time step
read the same time level; Dirichlet data lives on the outermost cell
ring and is reimposed after every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import bicgstab

from . import backend
from .grid import Grid, MacroState, Stencil, build_stencil
from .params import ModelParams

__all__ = [
    "SolverConfig",
    "BoundaryConditions",
    "CFLError",
    "NonFiniteError",
    "LinearSolveError",
    "cfl_check",
    "nonlocal_source_velocity",
    "nonlocal_source_leadership",
    "step_density",
    "step_momentum",
    "step_leadership",
    "linear_interpolate",
    "bilinear_interpolate",
    "run_macro",
]


class CFLError(RuntimeError):
    """Raised when a step would move mass farther than one cell."""


class NonFiniteError(RuntimeError):
    """Raised when a field stops being finite during a run."""


class LinearSolveError(RuntimeError):
    """Raised when the implicit momentum solve misses its residual target."""


@dataclass
class SolverConfig:
    """Solver knobs; fields left as None inherit the scenario's defaults."""

    dt: Optional[float] = None
    T: Optional[float] = None
    momentum_mode: Optional[str] = None
    linear_tol: float = 1e-10
    max_linear_iter: int = 500
    snapshots: int = 10

    def __post_init__(self) -> None:
        if self.dt is not None and not (self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.T is not None and not (self.T > 0.0):
            raise ValueError(f"T must be positive, got {self.T!r}")
        if not (self.linear_tol > 0.0):
            raise ValueError(f"linear_tol must be positive, got {self.linear_tol!r}")
        if self.momentum_mode not in (None, "explicit", "implicit"):
            raise ValueError(f"momentum_mode must be explicit or implicit, got {self.momentum_mode!r}")


@dataclass(frozen=True)
class BoundaryConditions:
    """Dirichlet boundary data; u_bc applies to every velocity component."""

    rho_bc: float = 0.0
    u_bc: float = 0.0
    l_bc: float = 0.0


def cfl_check(u: np.ndarray, grid: Grid, dt: float) -> bool:
    """True iff dt * max over cells of max(|u1|,|u2|) <= min cell side."""
    vmax = float(np.max(np.abs(u))) if u.size else 0.0
    return dt * vmax <= min(grid.dx)


def _sources_both(state: MacroState, params: ModelParams, grid: Grid, stencil: Stencil):
    """Both nonlocal sources from one sweep; returns (G_u, G_l)."""
    if grid.dim == 1:
        kmax = int(np.max(np.abs(stencil.offsets)))
        gu1, gl = backend.sources_1d(
            np.ascontiguousarray(state.rho),
            np.ascontiguousarray(state.u[0]),
            np.ascontiguousarray(state.l),
            grid.dx[0],
            kmax,
            params.alpha0,
            params.beta0,
            params.gamma0,
            params.nu,
            params.mu,
            params.eta,
        )
        return gu1[None, :], gl
    gu1, gu2, gl = backend.sources_2d(
        np.ascontiguousarray(state.rho),
        np.ascontiguousarray(state.u[0]),
        np.ascontiguousarray(state.u[1]),
        np.ascontiguousarray(state.l),
        grid.dx[0],
        grid.dx[1],
        np.ascontiguousarray(stencil.offsets),
        params.alpha0,
        params.beta0,
        params.gamma0,
        params.nu,
        params.mu,
        params.eta,
    )
    return np.stack([gu1, gu2]), gl


def nonlocal_source_velocity(
    state: MacroState, params: ModelParams, grid: Grid, stencil: Optional[Stencil] = None
) -> np.ndarray:
    """Momentum source: alignment, singular repulsion (principal value,
    self cell excluded), and leadership-weighted attraction, scaled by mu."""
    if stencil is None:
        stencil = build_stencil(grid, params.R)
    return _sources_both(state, params, grid, stencil)[0]


def nonlocal_source_leadership(
    state: MacroState, params: ModelParams, grid: Grid, stencil: Optional[Stencil] = None
) -> np.ndarray:
    """Leadership source (self cell kept; its integrand is finite), scaled by eta."""
    if stencil is None:
        stencil = build_stencil(grid, params.R)
    return _sources_both(state, params, grid, stencil)[1]


def _pad1(a: np.ndarray, value: float) -> np.ndarray:
    return np.pad(a, 1, mode="constant", constant_values=value)


def step_density(
    rho: np.ndarray,
    u: np.ndarray,
    grid: Grid,
    dt: float,
    bc: BoundaryConditions = BoundaryConditions(),
) -> np.ndarray:
    """Conservative push-forward of cell masses along dt*u.

    Each cell splits its mass between itself and the downwind neighbor per
    axis with geometric weights; a ghost ring carrying (rho_bc, u_bc)
    supplies inflow from outside. Refuses to step if CFL fails.
    """
    if not cfl_check(u, grid, dt):
        raise CFLError(
            f"dt*max|u| = {dt * float(np.max(np.abs(u))):.3e} exceeds min dx = {min(grid.dx):.3e}"
        )
    if grid.dim == 1:
        dx = grid.dx[0]
        rp = _pad1(rho, bc.rho_bc)
        up = _pad1(u[0], bc.u_bc)
        X = dt * up
        keep = rp * (dx - np.abs(X))
        right = rp * np.maximum(X, 0.0)
        left = rp * np.maximum(-X, 0.0)
        return (keep[1:-1] + right[:-2] + left[2:]) / dx

    dx1, dx2 = grid.dx
    rp = _pad1(rho, bc.rho_bc)
    u1p = _pad1(u[0], bc.u_bc)
    u2p = _pad1(u[1], bc.u_bc)
    X1 = dt * u1p
    X2 = dt * u2p
    f1 = {0: dx1 - np.abs(X1), 1: np.maximum(X1, 0.0), -1: np.maximum(-X1, 0.0)}
    f2 = {0: dx2 - np.abs(X2), 1: np.maximum(X2, 0.0), -1: np.maximum(-X2, 0.0)}
    n1, n2 = grid.shape
    out = np.zeros((n1, n2))
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            # source cells at padded offset (1-a, 1-b) relative to targets
            block = rp * f1[a] * f2[b]
            out += block[1 - a : 1 - a + n1, 1 - b : 1 - b + n2]
    return out / (dx1 * dx2)


def _laplacian_interior(w: np.ndarray) -> np.ndarray:
    """Unscaled 3/5-point Laplacian on interior cells (zeros on the ring)."""
    out = np.zeros_like(w)
    if w.ndim == 1:
        out[1:-1] = w[2:] - 2.0 * w[1:-1] + w[:-2]
    else:
        out[1:-1, 1:-1] = (
            w[2:, 1:-1] + w[:-2, 1:-1] + w[1:-1, 2:] + w[1:-1, :-2] - 4.0 * w[1:-1, 1:-1]
        )
    return out


def step_momentum(
    u: np.ndarray,
    rho: np.ndarray,
    l: np.ndarray,
    grid: Grid,
    params: ModelParams,
    dt: float,
    mode: str = "explicit",
    source: Optional[np.ndarray] = None,
    stencil: Optional[Stencil] = None,
    linear_tol: float = 1e-10,
    max_linear_iter: int = 500,
) -> np.ndarray:
    """Advance the momentum equation one step.

    Explicit mode applies centered advection differences, the nonlocal
    source, and diffusion at time n. Implicit mode freezes the advecting
    velocity and the source at n and solves each component's linear system
    (advection and diffusion at n+1) to an absolute residual <= linear_tol.
    The boundary ring is left at its current (Dirichlet) values.
    """
    if mode not in ("explicit", "implicit"):
        raise ValueError(f"unknown momentum mode {mode!r}")
    if source is None:
        state = MacroState(rho=rho, u=u, l=l, t=0.0)
        source = nonlocal_source_velocity(state, params, grid, stencil)
    D = params.D
    if grid.dim == 1:
        dcoef = D * dt / grid.dx[0] ** 2
    else:
        dcoef = D * dt / (grid.dx[0] * grid.dx[1])

    if mode == "explicit":
        out = u.copy()
        for k in range(grid.dim):
            w = u[k]
            adv = np.zeros_like(w)
            if grid.dim == 1:
                dx = grid.dx[0]
                adv[1:-1] = (dt / (2.0 * dx)) * u[0][1:-1] * (w[2:] - w[:-2])
            else:
                dx1, dx2 = grid.dx
                adv[1:-1, 1:-1] = (dt / (2.0 * dx1)) * u[0][1:-1, 1:-1] * (
                    w[2:, 1:-1] - w[:-2, 1:-1]
                ) + (dt / (2.0 * dx2)) * u[1][1:-1, 1:-1] * (w[1:-1, 2:] - w[1:-1, :-2])
            upd = w - adv + dt * source[k] + dcoef * _laplacian_interior(w)
            if grid.dim == 1:
                out[k][1:-1] = upd[1:-1]
            else:
                out[k][1:-1, 1:-1] = upd[1:-1, 1:-1]
        return out

    # implicit: one matrix per step (advecting velocity frozen at n), two solves
    A = _implicit_matrix(u, grid, dt, dcoef)
    out = u.copy()
    for k in range(grid.dim):
        b = u[k] + dt * source[k]
        _set_ring(b, u[k])
        x0 = u[k].ravel()
        sol, info = bicgstab(
            A, b.ravel(), x0=x0, rtol=0.0, atol=linear_tol, maxiter=max_linear_iter
        )
        resid = float(np.linalg.norm(A @ sol - b.ravel()))
        if info != 0 or resid > linear_tol:
            raise LinearSolveError(
                f"implicit momentum solve (component {k}): info={info}, residual={resid:.3e} "
                f"exceeds tolerance {linear_tol:.1e} after {max_linear_iter} iterations"
            )
        out[k] = sol.reshape(grid.shape)
    return out


def _set_ring(a: np.ndarray, values: np.ndarray) -> None:
    """Copy the outermost layer of `values` into `a`."""
    if a.ndim == 1:
        a[0] = values[0]
        a[-1] = values[-1]
    else:
        a[0, :] = values[0, :]
        a[-1, :] = values[-1, :]
        a[:, 0] = values[:, 0]
        a[:, -1] = values[:, -1]


def _ring_mask(shape: Tuple[int, ...]) -> np.ndarray:
    m = np.zeros(shape, dtype=bool)
    if len(shape) == 1:
        m[0] = m[-1] = True
    else:
        m[0, :] = m[-1, :] = True
        m[:, 0] = m[:, -1] = True
    return m


def _implicit_matrix(u: np.ndarray, grid: Grid, dt: float, dcoef: float):
    """System matrix for one implicit momentum step (identity on the ring)."""
    ring = _ring_mask(grid.shape)
    interior = ~ring
    if grid.dim == 1:
        n = grid.shape[0]
        au = np.where(interior, dt * u[0] / (2.0 * grid.dx[0]), 0.0)
        dc = np.where(interior, dcoef, 0.0)
        main = 1.0 + 2.0 * dc
        east = au - dc
        west = -au - dc
        return sp.diags(
            [west[1:], main, east[:-1]], offsets=[-1, 0, 1], format="csr"
        )
    n1, n2 = grid.shape
    au1 = np.where(interior, dt * u[0] / (2.0 * grid.dx[0]), 0.0)
    au2 = np.where(interior, dt * u[1] / (2.0 * grid.dx[1]), 0.0)
    dc = np.where(interior, dcoef, 0.0)
    main = (1.0 + 4.0 * dc).ravel()
    east = (au1 - dc).ravel()
    west = (-au1 - dc).ravel()
    north = (au2 - dc).ravel()
    south = (-au2 - dc).ravel()
    return sp.diags(
        [west[n2:], south[1:], main, north[:-1], east[:-n2]],
        offsets=[-n2, -1, 0, 1, n2],
        format="csr",
    )


def _interp_core_1d(field: np.ndarray, xq: np.ndarray, grid: Grid, bc_value: float) -> np.ndarray:
    lo, hi = grid.extents[0]
    dx = grid.dx[0]
    n = grid.shape[0]
    fp = _pad1(field, bc_value)
    s = (xq - lo) / dx - 0.5
    b = np.clip(np.floor(s), -1, n - 1).astype(np.int64)
    t = s - b
    vals = (1.0 - t) * fp[b + 1] + t * fp[b + 2]
    outside = (xq < lo) | (xq > hi)
    return np.where(outside, bc_value, vals)


def _interp_core_2d(
    field: np.ndarray, x1q: np.ndarray, x2q: np.ndarray, grid: Grid, bc_value: float
) -> np.ndarray:
    (lo1, hi1), (lo2, hi2) = grid.extents
    dx1, dx2 = grid.dx
    n1, n2 = grid.shape
    fp = _pad1(field, bc_value)
    s1 = (x1q - lo1) / dx1 - 0.5
    s2 = (x2q - lo2) / dx2 - 0.5
    b1 = np.clip(np.floor(s1), -1, n1 - 1).astype(np.int64)
    b2 = np.clip(np.floor(s2), -1, n2 - 1).astype(np.int64)
    t1 = s1 - b1
    t2 = s2 - b2
    i = b1 + 1
    j = b2 + 1
    vals = (
        (1.0 - t1) * (1.0 - t2) * fp[i, j]
        + t1 * (1.0 - t2) * fp[i + 1, j]
        + (1.0 - t1) * t2 * fp[i, j + 1]
        + t1 * t2 * fp[i + 1, j + 1]
    )
    outside = (x1q < lo1) | (x1q > hi1) | (x2q < lo2) | (x2q > hi2)
    return np.where(outside, bc_value, vals)


def linear_interpolate(field: np.ndarray, point, grid: Grid, bc_value: float = 0.0):
    """1D linear interpolation on the cell-center lattice; outside -> bc_value."""
    xq = np.asarray(point, dtype=float)
    out = _interp_core_1d(field, np.atleast_1d(xq), grid, bc_value)
    return float(out[0]) if xq.ndim == 0 else out.reshape(xq.shape)


def bilinear_interpolate(field: np.ndarray, point, grid: Grid, bc_value: float = 0.0):
    """Bilinear interpolation with convex corner weights; outside -> bc_value.

    Points between the domain edge and the outermost cell centers blend with
    ghost nodes holding bc_value.
    """
    pq = np.asarray(point, dtype=float)
    single = pq.ndim == 1
    pts = np.atleast_2d(pq)
    out = _interp_core_2d(field, pts[:, 0], pts[:, 1], grid, bc_value)
    return float(out[0]) if single else out.reshape(pq.shape[:-1])


def step_leadership(
    l: np.ndarray,
    u: np.ndarray,
    rho: np.ndarray,
    grid: Grid,
    params: ModelParams,
    dt: float,
    bc: BoundaryConditions = BoundaryConditions(),
    source: Optional[np.ndarray] = None,
    stencil: Optional[Stencil] = None,
) -> np.ndarray:
    """Semi-Lagrangian update: interpolate at the departure point, add the source."""
    if source is None:
        state = MacroState(rho=rho, u=u, l=l, t=0.0)
        source = nonlocal_source_leadership(state, params, grid, stencil)
    if grid.dim == 1:
        dep = grid.centers(0) - dt * u[0]
        return _interp_core_1d(l, dep, grid, bc.l_bc) + dt * source
    c1 = grid.centers(0)[:, None]
    c2 = grid.centers(1)[None, :]
    dep1 = c1 - dt * u[0]
    dep2 = c2 - dt * u[1]
    return _interp_core_2d(l, dep1, dep2, grid, bc.l_bc) + dt * source


def _impose_bc(state: MacroState, bc: BoundaryConditions) -> None:
    ring = _ring_mask(state.rho.shape)
    state.rho[ring] = bc.rho_bc
    for k in range(state.u.shape[0]):
        state.u[k][ring] = bc.u_bc
    state.l[ring] = bc.l_bc


def run_macro(scenario, config: Optional[SolverConfig] = None):
    """Integrate the macroscopic system on the scenario grid.

    Per step: both nonlocal sources from state n, then density (push-forward),
    momentum (explicit or implicit), leadership (semi-Lagrangian), then the
    Dirichlet ring. Aborts with the step index if a field goes non-finite.
    """
    from .snapshots import SnapshotSeries, snapshot_steps

    if config is None:
        config = SolverConfig()
    dt = config.dt if config.dt is not None else scenario.dt
    T = config.T if config.T is not None else scenario.T
    mode = config.momentum_mode if config.momentum_mode is not None else scenario.momentum_mode
    grid = scenario.grid()
    params = scenario.params
    bc = scenario.bc
    stencil = build_stencil(grid, params.R)

    state = scenario.initial_state(grid)
    _impose_bc(state, bc)

    nsteps = int(round(T / dt))
    if nsteps < 1:
        raise ValueError(f"horizon T={T} shorter than one step dt={dt}")
    emit_at = snapshot_steps(nsteps, config.snapshots)
    series = SnapshotSeries(
        grid=grid,
        meta={
            "scenario": scenario.name,
            "mode": "macro",
            "dt": dt,
            "T": T,
            "momentum_mode": mode,
            "backend": backend.BACKEND,
            "params": params.as_dict(),
            "rho_bc": bc.rho_bc,
            "u_bc": bc.u_bc,
            "l_bc": bc.l_bc,
        },
    )
    if 0 in emit_at:
        snap = state.copy()
        series.append(0, snap)

    for step in range(1, nsteps + 1):
        if not cfl_check(state.u, grid, dt):
            raise CFLError(
                f"CFL violated at step {step}: dt*max|u| = "
                f"{dt * float(np.max(np.abs(state.u))):.3e} > min dx = {min(grid.dx):.3e}"
            )
        gu, gl = _sources_both(state, params, grid, stencil)
        rho_new = step_density(state.rho, state.u, grid, dt, bc)
        u_new = step_momentum(
            state.u,
            state.rho,
            state.l,
            grid,
            params,
            dt,
            mode=mode,
            source=gu,
            linear_tol=config.linear_tol,
            max_linear_iter=config.max_linear_iter,
        )
        l_new = step_leadership(
            state.l, state.u, state.rho, grid, params, dt, bc=bc, source=gl
        )
        state = MacroState(rho=rho_new, u=u_new, l=l_new, t=step * dt)
        _impose_bc(state, bc)
        if not (
            np.all(np.isfinite(state.rho))
            and np.all(np.isfinite(state.u))
            and np.all(np.isfinite(state.l))
        ):
            raise NonFiniteError(f"non-finite field values at step {step} (t={step * dt:g})")
        if step in emit_at:
            series.append(step, state.copy())
    return series
