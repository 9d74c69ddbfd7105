"""Regular grids, macroscopic states, and nonlocal quadrature stencils."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

__all__ = ["Grid", "MacroState", "Stencil", "build_stencil"]


@dataclass(frozen=True)
class Grid:
    """Uniform cell grid on a box; fields are collocated at cell centers.

    extents: ((lo, hi),) in 1D or ((lo1, hi1), (lo2, hi2)) in 2D.
    shape: cells per axis.
    """

    extents: Tuple[Tuple[float, float], ...]
    shape: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.extents) != len(self.shape):
            raise ValueError("extents and shape must have the same dimension")
        if self.dim not in (1, 2):
            raise ValueError(f"only 1D and 2D grids are supported, got dim={self.dim}")
        for (lo, hi), n in zip(self.extents, self.shape):
            if not (hi > lo):
                raise ValueError(f"empty axis extent ({lo}, {hi})")
            if n < 3:
                raise ValueError(f"need at least 3 cells per axis, got {n}")

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def dx(self) -> Tuple[float, ...]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.extents, self.shape))

    @property
    def cell_area(self) -> float:
        out = 1.0
        for d in self.dx:
            out *= d
        return out

    def centers(self, axis: int) -> np.ndarray:
        lo, hi = self.extents[axis]
        n = self.shape[axis]
        d = (hi - lo) / n
        return lo + (np.arange(n) + 0.5) * d

    @classmethod
    def make_1d(cls, lo: float, hi: float, n: int) -> "Grid":
        return cls(extents=((lo, hi),), shape=(n,))

    @classmethod
    def make_2d(cls, extents, shape) -> "Grid":
        (lo1, hi1), (lo2, hi2) = extents
        n1, n2 = shape
        return cls(extents=((lo1, hi1), (lo2, hi2)), shape=(n1, n2))


@dataclass
class MacroState:
    """Density, velocity, and mean leadership on a grid at time t.

    rho: shape grid.shape. u: shape (dim,) + grid.shape. l: grid.shape.
    """

    rho: np.ndarray
    u: np.ndarray
    l: np.ndarray
    t: float = 0.0

    def copy(self) -> "MacroState":
        return MacroState(self.rho.copy(), self.u.copy(), self.l.copy(), self.t)

    def check_shapes(self, grid: Grid) -> None:
        if self.rho.shape != grid.shape:
            raise ValueError(f"rho shape {self.rho.shape} does not match grid {grid.shape}")
        if self.u.shape != (grid.dim,) + grid.shape:
            raise ValueError(f"u shape {self.u.shape} does not match grid {grid.shape}")
        if self.l.shape != grid.shape:
            raise ValueError(f"l shape {self.l.shape} does not match grid {grid.shape}")


@dataclass(frozen=True)
class Stencil:
    """Integer cell offsets within the kernel radius plus quadrature data.

    offsets: (m, dim) int64, cell-center offsets k with |k * dx| <= R,
    including the zero offset and symmetric under negation.
    weight: quadrature weight of one cell (full cell area, first order).
    """

    offsets: np.ndarray
    weight: float
    radius: float

    @property
    def size(self) -> int:
        return int(self.offsets.shape[0])


def build_stencil(grid: Grid, radius: float) -> Stencil:
    """Enumerate cell offsets whose center distance is within the closed ball.

    The boundary |k*dx| = R is included, matching the kernel convention;
    a tiny relative fuzz absorbs roundoff in |k*dx| when R/dx is integral.
    """
    if radius <= 0.0:
        raise ValueError(f"stencil radius must be positive, got {radius!r}")
    dx = grid.dx
    fuzz = 1.0 + 1e-12
    if grid.dim == 1:
        kmax = int(np.floor(radius * fuzz / dx[0]))
        ks = np.arange(-kmax, kmax + 1, dtype=np.int64)[:, None]
        return Stencil(offsets=ks, weight=dx[0], radius=radius)
    k1 = int(np.floor(radius * fuzz / dx[0]))
    k2 = int(np.floor(radius * fuzz / dx[1]))
    a, b = np.meshgrid(
        np.arange(-k1, k1 + 1, dtype=np.int64),
        np.arange(-k2, k2 + 1, dtype=np.int64),
        indexing="ij",
    )
    d2 = (a * dx[0]) ** 2 + (b * dx[1]) ** 2
    keep = d2 <= (radius * radius) * (fuzz * fuzz)
    offs = np.stack([a[keep], b[keep]], axis=1).astype(np.int64)
    return Stencil(offsets=offs, weight=dx[0] * dx[1], radius=radius)
