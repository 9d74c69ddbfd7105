"""Figure construction for parsed snapshots.

1D jobs overlay up to two snapshots of the same field: the first is drawn
with 'o' markers (particle moments), the second as a solid line (continuum
fields). 2D jobs draw a heatmap of rho or l with white velocity arrows
subsampled by a stride; arrows are suppressed where the density is below
1% of its peak so near-vacuum noise stays invisible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .reader import Snapshot, read_snapshot_csv

STRIDE_DEFAULT = 8
VACUUM_FRACTION = 0.01
LEADERSHIP_BOUNDS = (0.0, 1.0)

FIELDS_1D = ("rho", "u1", "l", "rhou", "rhol")
FIELDS_2D = ("rho", "l")

FIELD_LABELS = {
    "rho": "density",
    "u1": "velocity",
    "l": "mean leadership",
    "rhou": "momentum density",
    "rhol": "leadership density",
}


@dataclass
class PlotJob:
    """One render request: inputs, field, arrow stride, output, color bounds."""

    inputs: Tuple[Union[str, Path], ...]
    out: Union[str, Path]
    field: str = "rho"
    stride: int = STRIDE_DEFAULT
    vmin: Optional[float] = None
    vmax: Optional[float] = None
    dpi: int = 100
    title: Optional[str] = None
    labels: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.inputs:
            raise ValueError("at least one input snapshot is required")
        if len(self.inputs) > 2:
            raise ValueError("at most two inputs (base plus overlay) are supported")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


def _series_label(snap: Snapshot, fallback: str) -> str:
    mode = snap.headers.get("mode")
    if mode == "micro":
        return "particles"
    if mode == "macro":
        return "continuum"
    return fallback


def _color_bounds(job: PlotJob, data: np.ndarray) -> Tuple[float, float]:
    if job.field == "l":
        lo, hi = LEADERSHIP_BOUNDS
    else:
        lo, hi = 0.0, float(data.max()) or 1.0
    if job.vmin is not None:
        lo = job.vmin
    if job.vmax is not None:
        hi = job.vmax
    return lo, hi


def _draw_1d(fig: Figure, job: PlotJob, snaps) -> None:
    ax = fig.add_subplot(111)
    styles = [dict(linestyle="none", marker="o", markersize=3, fillstyle="none"),
              dict(linestyle="-", marker="")]
    fallbacks = ("input", "overlay")
    for k, snap in enumerate(snaps):
        label = job.labels[k] if k < len(job.labels) else _series_label(snap, fallbacks[k])
        ax.plot(snap.centers(0), snap.field(job.field), label=label, **styles[k])
    ax.set_xlabel("x")
    ax.set_ylabel(FIELD_LABELS.get(job.field, job.field))
    if len(snaps) > 1:
        ax.legend()
    if job.vmin is not None or job.vmax is not None:
        ax.set_ylim(job.vmin, job.vmax)
    ax.set_title(job.title if job.title else "t = %g" % snaps[0].time)


def _draw_2d(fig: Figure, job: PlotJob, snap: Snapshot) -> None:
    ax = fig.add_subplot(111)
    data = snap.field(job.field)
    (lo1, hi1), (lo2, hi2) = snap.extents
    vmin, vmax = _color_bounds(job, data)
    # axis 0 is x1: transpose so rows run along x2, then draw from the bottom
    im = ax.imshow(
        data.T,
        origin="lower",
        extent=(lo1, hi1, lo2, hi2),
        vmin=vmin,
        vmax=vmax,
        cmap="viridis",
        interpolation="nearest",
        aspect="equal",
    )
    fig.colorbar(im, ax=ax, label=FIELD_LABELS.get(job.field, job.field))

    rho = snap.fields["rho"]
    s = job.stride
    x1 = snap.centers(0)[::s]
    x2 = snap.centers(1)[::s]
    u1 = snap.fields["u1"][::s, ::s]
    u2 = snap.fields["u2"][::s, ::s]
    occupied = rho[::s, ::s] >= VACUUM_FRACTION * rho.max()
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    if np.any(occupied):
        ax.quiver(
            X1[occupied],
            X2[occupied],
            u1[occupied],
            u2[occupied],
            color="white",
            width=0.004,
        )
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(job.title if job.title else "t = %g" % snap.time)


def build_figure(job: PlotJob) -> Figure:
    """Construct the figure for a job without touching the filesystem output."""
    snaps = [read_snapshot_csv(p) for p in job.inputs]
    dims = {s.dim for s in snaps}
    if len(dims) != 1:
        raise ValueError("all inputs must share a dimensionality")
    dim = dims.pop()
    allowed = FIELDS_1D if dim == 1 else FIELDS_2D
    if job.field not in allowed:
        raise ValueError(
            "field %r not renderable in %dD; choose from %s"
            % (job.field, dim, ", ".join(allowed))
        )
    fig = Figure(figsize=(6.4, 4.8))
    FigureCanvasAgg(fig)
    if dim == 1:
        _draw_1d(fig, job, snaps)
    else:
        if len(snaps) > 1:
            raise ValueError("2D rendering takes a single input snapshot")
        _draw_2d(fig, job, snaps[0])
    fig.tight_layout()
    return fig


def render(job: PlotJob) -> Path:
    """Render a job to its output path; the PNG bytes depend only on the inputs."""
    fig = build_figure(job)
    out = Path(job.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    # suppress the version-stamped Software key so reruns are byte-identical
    fig.savefig(out, dpi=job.dpi, metadata={"Software": None})
    return out
