"""Built-in experiment catalog: the 1D comparison setup and the 2D pattern tests.

Initial fields are module-level functions bound with functools.partial so
scenarios stay picklable (parallel comparison runs ship them to workers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import ndtr, ndtri

from .grid import Grid, MacroState
from .macro import BoundaryConditions
from .params import CONFIG_KEYS, ModelParams

__all__ = ["Scenario", "build_scenario", "SCENARIO_NAMES"]

SCENARIO_NAMES = ("test1d", "test2da", "test2db", "test2db_lbc1", "test2dc")

_OVERRIDE_KEYS = set(CONFIG_KEYS) | {"dx", "dt", "T"}


@dataclass(frozen=True)
class Scenario:
    """A fully specified experiment: domain, horizon, parameters, initial data."""

    name: str
    extents: Tuple[Tuple[float, float], ...]
    shape: Tuple[int, ...]
    T: float
    dt: float
    params: ModelParams
    bc: BoundaryConditions
    rho0: Callable
    u0: Callable
    l0: Callable
    ppf: Optional[Callable] = None
    momentum_mode: str = "explicit"

    @property
    def dim(self) -> int:
        return len(self.extents)

    def grid(self) -> Grid:
        return Grid(extents=self.extents, shape=self.shape)

    def initial_state(self, grid: Optional[Grid] = None) -> MacroState:
        """Evaluate the initial fields at cell centers (used as printed,
        no normalization is applied)."""
        if grid is None:
            grid = self.grid()
        if grid.dim == 1:
            x = grid.centers(0)
            rho = np.asarray(self.rho0(x), dtype=float)
            u = np.broadcast_to(np.asarray(self.u0(x), dtype=float), x.shape).copy()[None, :]
            l = np.broadcast_to(np.asarray(self.l0(x), dtype=float), x.shape).copy()
            return MacroState(rho=rho, u=u, l=l, t=0.0)
        X1 = np.broadcast_to(grid.centers(0)[:, None], grid.shape)
        X2 = np.broadcast_to(grid.centers(1)[None, :], grid.shape)
        rho = np.asarray(self.rho0(X1, X2), dtype=float)
        u_raw = np.asarray(self.u0(X1, X2), dtype=float)
        if u_raw.shape == (2,) + grid.shape:
            u = u_raw.copy()
        else:
            u = np.broadcast_to(u_raw, (2,) + grid.shape).copy()
        l = np.broadcast_to(np.asarray(self.l0(X1, X2), dtype=float), grid.shape).copy()
        return MacroState(rho=rho, u=u, l=l, t=0.0)


def _gaussian_1d_normalized(x, x0: float, sigma: float):
    z = (np.asarray(x, dtype=float) - x0) / sigma
    return np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))


def _trunc_gauss_ppf(u, x0: float, sigma: float, lo: float, hi: float):
    """Inverse CDF of the Gaussian restricted to [lo, hi]."""
    a = ndtr((lo - x0) / sigma)
    b = ndtr((hi - x0) / sigma)
    return x0 + sigma * ndtri(a + np.asarray(u, dtype=float) * (b - a))


def _const_1d(x, value: float = 0.0):
    return np.full_like(np.asarray(x, dtype=float), value)


def _const_2d(X1, X2, value: float = 0.0):
    return np.full_like(np.asarray(X1, dtype=float), value)


def _bump_sum_2d(X1, X2, terms):
    """Sum of peak-amplitude Gaussians: terms = ((amp, c1, c2, var), ...)."""
    out = np.zeros_like(np.asarray(X1, dtype=float))
    for amp, c1, c2, var in terms:
        out += amp * np.exp(-((X1 - c1) ** 2 + (X2 - c2) ** 2) / (2.0 * var))
    return out


def _build_test1d(params: ModelParams, dx: Optional[float], dt: Optional[float], T: float) -> Scenario:
    R = params.R
    L = 1.0 / R
    x0 = 1.0 / (2.0 * R)
    sigma = 0.1 / R
    dx_eff = R / 8.0 if dx is None else dx
    n = int(round(L / dx_eff))
    dt_eff = params.epsilon if dt is None else dt
    return Scenario(
        name="test1d",
        extents=((0.0, L),),
        shape=(n,),
        T=T,
        dt=dt_eff,
        params=params,
        bc=BoundaryConditions(),
        rho0=partial(_gaussian_1d_normalized, x0=x0, sigma=sigma),
        u0=partial(_const_1d, value=0.0),
        l0=partial(_const_1d, value=0.0),
        ppf=partial(_trunc_gauss_ppf, x0=x0, sigma=sigma, lo=0.0, hi=L),
        momentum_mode="explicit",
    )


def _build_2d(
    name: str,
    extent: float,
    T: float,
    dt: float,
    dx: float,
    params: ModelParams,
    rho0: Callable,
    l0: Callable,
    l_bc: float,
) -> Scenario:
    n = int(round(extent / dx))
    return Scenario(
        name=name,
        extents=((0.0, extent), (0.0, extent)),
        shape=(n, n),
        T=T,
        dt=dt,
        params=params,
        bc=BoundaryConditions(rho_bc=0.0, u_bc=0.0, l_bc=l_bc),
        rho0=rho0,
        u0=partial(_const_2d, value=0.0),
        l0=l0,
        momentum_mode="implicit",
    )


_RHO0_MERGE = partial(
    _bump_sum_2d, terms=((1.0, 0.4, 0.7, 0.004), (1.0, 0.6, 0.3, 0.004))
)


def build_scenario(name: str, **overrides) -> Scenario:
    """Return a built-in scenario, optionally overriding parameter keys,
    dx, dt, or T. Unknown names or override keys raise."""
    bad = set(overrides) - _OVERRIDE_KEYS
    if bad:
        raise KeyError(f"unknown scenario overrides: {sorted(bad)}")
    dx = overrides.pop("dx", None)
    dt = overrides.pop("dt", None)
    T = overrides.pop("T", None)

    if name == "test1d":
        params = ModelParams(
            alpha0=0.01, beta0=0.5, gamma0=1.0, nu=0.8, R=0.02,
            mu=1.0, eta=1.0, epsilon=1e-3, D=0.0,
        ).with_overrides(**overrides)
        return _build_test1d(params, dx, dt, 5.0 if T is None else T)

    if name == "test2da":
        params = ModelParams(
            alpha0=0.0225, beta0=0.5, gamma0=0.5, nu=0.8, R=0.3,
            mu=0.5, eta=0.05, epsilon=1.0, D=1e-3,
        ).with_overrides(**overrides)
        rho0 = partial(_bump_sum_2d, terms=((1.0, 1.0, 1.0, 0.03),))
        l0 = partial(
            _bump_sum_2d, terms=((0.9, 0.8, 0.8, 0.02), (0.8, 1.3, 1.3, 0.02))
        )
        return _build_2d(
            "test2da", 2.0, 300.0 if T is None else T, 0.1 if dt is None else dt,
            0.025 if dx is None else dx, params, rho0, l0, l_bc=0.0,
        )

    if name in ("test2db", "test2db_lbc1"):
        params = ModelParams(
            alpha0=0.01, beta0=0.1, gamma0=1.3, nu=0.2, R=0.25,
            mu=1.5, eta=0.3, epsilon=1.0, D=1e-3,
        ).with_overrides(**overrides)
        return _build_2d(
            name, 1.0, 350.0 if T is None else T, 0.2 if dt is None else dt,
            0.01 if dx is None else dx, params, _RHO0_MERGE,
            partial(_const_2d, value=0.0),
            l_bc=1.0 if name.endswith("lbc1") else 0.0,
        )

    if name == "test2dc":
        params = ModelParams(
            alpha0=0.01, beta0=1.0, gamma0=0.4, nu=1.0, R=0.4,
            mu=3.0, eta=2.0, epsilon=1.0, D=1e-3,
        ).with_overrides(**overrides)
        return _build_2d(
            "test2dc", 1.0, 100.0 if T is None else T, 0.2 if dt is None else dt,
            0.01 if dx is None else dx, params, _RHO0_MERGE,
            partial(_const_2d, value=0.0),
            l_bc=0.0,
        )

    raise ValueError(
        f"unknown scenario {name!r}; valid names: {', '.join(SCENARIO_NAMES)}"
    )
