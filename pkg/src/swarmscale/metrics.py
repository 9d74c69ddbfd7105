"""Field comparison norms and steady-pattern diagnostics."""

from __future__ import annotations

from typing import Dict

import numpy as np

from .grid import Grid, MacroState

SUPPORT_FRACTION = 0.01
LOCAL_MAX_FRACTION = 0.1
RADIAL_BINS = 32


def l2_distance(a: np.ndarray, b: np.ndarray, grid: Grid) -> float:
    """Cell-area weighted L2 distance between two fields on the same grid."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != grid.shape or b.shape != grid.shape:
        raise ValueError(
            "field shapes %s, %s do not match grid shape %s"
            % (a.shape, b.shape, grid.shape)
        )
    diff = a - b
    return float(np.sqrt(np.sum(diff * diff) * grid.cell_area))


def _support_mask(rho: np.ndarray) -> np.ndarray:
    return rho > SUPPORT_FRACTION * rho.max()


def _support_points(rho: np.ndarray, grid: Grid) -> np.ndarray:
    mask = _support_mask(rho)
    if grid.dim == 1:
        return grid.centers(0)[mask][:, None]
    ii, jj = np.nonzero(mask)
    return np.column_stack([grid.centers(0)[ii], grid.centers(1)[jj]])


def support_diameter(rho: np.ndarray, grid: Grid) -> float:
    """Largest pairwise distance between cells holding more than 1% of peak density."""
    pts = _support_points(rho, grid)
    if pts.shape[0] == 0:
        return 0.0
    if grid.dim == 1:
        return float(pts[:, 0].max() - pts[:, 0].min())
    if pts.shape[0] > 3:
        try:
            from scipy.spatial import ConvexHull

            pts = pts[ConvexHull(pts).vertices]
        except Exception:
            pass  # degenerate (collinear) supports fall back to all points
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff * diff).sum(axis=2)).max())


def local_max_count(rho: np.ndarray, grid: Grid) -> int:
    """Local maxima above 10% of the global peak.

    2D uses the 8-cell neighborhood; boundary cells compare against the
    neighbors they have. A connected plateau of equal cells with no higher
    neighbor counts once: symmetric profiles put the apex exactly between
    two cells, and strict comparison would miss such peaks entirely.
    """
    from scipy import ndimage

    thresh = LOCAL_MAX_FRACTION * rho.max()
    fp = np.ones((3,) * grid.dim, dtype=bool)
    top = ndimage.maximum_filter(rho, footprint=fp, mode="constant", cval=-np.inf)
    peak = (rho == top) & (rho > thresh)
    _, n = ndimage.label(peak, structure=fp)
    return int(n)


def density_centroid(rho: np.ndarray, grid: Grid) -> np.ndarray:
    """Density-weighted center of mass; errors on zero total mass."""
    total = rho.sum()
    if total <= 0.0:
        raise ValueError("density has no mass; centroid undefined")
    if grid.dim == 1:
        return np.array([float((grid.centers(0) * rho).sum() / total)])
    x1 = grid.centers(0)[:, None]
    x2 = grid.centers(1)[None, :]
    return np.array(
        [float((x1 * rho).sum() / total), float((x2 * rho).sum() / total)]
    )


def radial_profile(rho: np.ndarray, grid: Grid) -> Dict[str, np.ndarray]:
    """Mean density in RADIAL_BINS annuli around the centroid, out to the support radius."""
    c = density_centroid(rho, grid)
    if grid.dim == 1:
        r = np.abs(grid.centers(0) - c[0])
    else:
        d1 = grid.centers(0)[:, None] - c[0]
        d2 = grid.centers(1)[None, :] - c[1]
        r = np.sqrt(d1 * d1 + d2 * d2)
    radius = 0.5 * support_diameter(rho, grid)
    if radius <= 0.0:
        return {"r": np.zeros(1), "rho": np.array([float(rho.max())])}
    edges = np.linspace(0.0, radius, RADIAL_BINS + 1)
    idx = np.clip(np.searchsorted(edges, r.ravel(), side="right") - 1, 0, RADIAL_BINS - 1)
    inside = r.ravel() <= radius
    sums = np.bincount(idx[inside], weights=rho.ravel()[inside], minlength=RADIAL_BINS)
    counts = np.bincount(idx[inside], minlength=RADIAL_BINS)
    prof = np.divide(sums, counts, out=np.zeros(RADIAL_BINS), where=counts > 0)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return {"r": centers, "rho": prof}


def pattern_metrics(state: MacroState, grid: Grid) -> Dict[str, object]:
    """Bundle of the steady-pattern diagnostics for one state."""
    rho = state.rho
    prof = radial_profile(rho, grid)
    return {
        "support_diameter": support_diameter(rho, grid),
        "local_max_count": local_max_count(rho, grid),
        "centroid": density_centroid(rho, grid),
        "radial_r": prof["r"],
        "radial_rho": prof["rho"],
        "radial_argmax_r": float(prof["r"][int(np.argmax(prof["rho"]))]),
    }
