"""Render swarm-solver snapshot CSVs: 1D micro/macro overlays, 2D field maps."""

__version__ = "0.1.0"

from .reader import Snapshot, SnapshotParseError, read_snapshot_csv
from .render import (
    FIELDS_1D,
    FIELDS_2D,
    LEADERSHIP_BOUNDS,
    STRIDE_DEFAULT,
    VACUUM_FRACTION,
    PlotJob,
    build_figure,
    render,
)

__all__ = [
    "FIELDS_1D",
    "FIELDS_2D",
    "LEADERSHIP_BOUNDS",
    "PlotJob",
    "STRIDE_DEFAULT",
    "Snapshot",
    "SnapshotParseError",
    "VACUUM_FRACTION",
    "build_figure",
    "read_snapshot_csv",
    "render",
    "__version__",
]
