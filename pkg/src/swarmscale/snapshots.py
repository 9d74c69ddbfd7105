"""Snapshot series and the CSV state-exchange format.

A snapshot file is self-describing: `# key=value` header lines carry the
grid, time, and model parameters, then one row per cell in C order.
1D rows are `i,x1,rho,u1,l`; 2D rows are `i,j,x1,x2,rho,u1,u2,l`.
All floats are written with %.17g so a read/write cycle is lossless.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from .grid import Grid, MacroState

COLUMNS_1D = ("i", "x1", "rho", "u1", "l")
COLUMNS_2D = ("i", "j", "x1", "x2", "rho", "u1", "u2", "l")

_FILENAME_RE = re.compile(r"^snap_(\d+)\.csv$")


class SnapshotFormatError(ValueError):
    """Raised when a snapshot file is malformed or missing metadata."""


def snapshot_steps(nsteps: int, k: int) -> List[int]:
    """Step indices for k interior snapshots plus the initial and final state."""
    if nsteps < 0:
        raise ValueError("nsteps must be >= 0")
    if k < 0:
        raise ValueError("k must be >= 0")
    if nsteps == 0:
        return [0]
    marks = np.linspace(0.0, nsteps, k + 2)
    steps = sorted({int(round(m)) for m in marks})
    return steps


@dataclass
class SnapshotSeries:
    """Ordered sequence of macroscopic states on a fixed grid."""

    grid: Grid
    steps: List[int] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    states: List[MacroState] = field(default_factory=list)
    meta: Dict[str, object] = field(default_factory=dict)

    def append(self, step: int, state: MacroState) -> None:
        state.check_shapes(self.grid)
        if self.steps and step <= self.steps[-1]:
            raise ValueError("snapshot steps must be strictly increasing")
        self.steps.append(step)
        self.times.append(state.t)
        self.states.append(state)

    def __len__(self) -> int:
        return len(self.states)


def _fmt(value: object) -> str:
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    return str(value)


def _header_lines(series: SnapshotSeries, step: int, state: MacroState) -> List[str]:
    grid = series.grid
    lines = []
    lines.append("# n1=%d" % grid.shape[0])
    if grid.dim == 2:
        lines.append("# n2=%d" % grid.shape[1])
    lines.append("# dx1=%s" % _fmt(grid.dx[0]))
    if grid.dim == 2:
        lines.append("# dx2=%s" % _fmt(grid.dx[1]))
    lines.append("# lo1=%s" % _fmt(grid.extents[0][0]))
    lines.append("# hi1=%s" % _fmt(grid.extents[0][1]))
    if grid.dim == 2:
        lines.append("# lo2=%s" % _fmt(grid.extents[1][0]))
        lines.append("# hi2=%s" % _fmt(grid.extents[1][1]))
    lines.append("# step=%d" % step)
    lines.append("# time=%s" % _fmt(state.t))
    for key in sorted(series.meta):
        if key in ("params",):
            continue
        lines.append("# %s=%s" % (key, _fmt(series.meta[key])))
    params = series.meta.get("params")
    if params is not None:
        for key in sorted(params):
            lines.append("# %s=%s" % (key, _fmt(params[key])))
    columns = COLUMNS_1D if grid.dim == 1 else COLUMNS_2D
    lines.append("# columns=%s" % ",".join(columns))
    return lines


def _data_lines(grid: Grid, state: MacroState) -> List[str]:
    f = lambda v: "%.17g" % v
    out = []
    if grid.dim == 1:
        x1 = grid.centers(0)
        rho, u1, l = state.rho, state.u[0], state.l
        for i in range(grid.shape[0]):
            out.append(
                "%d,%s,%s,%s,%s" % (i, f(x1[i]), f(rho[i]), f(u1[i]), f(l[i]))
            )
    else:
        x1 = grid.centers(0)
        x2 = grid.centers(1)
        rho, u1, u2, l = state.rho, state.u[0], state.u[1], state.l
        for i in range(grid.shape[0]):
            for j in range(grid.shape[1]):
                out.append(
                    "%d,%d,%s,%s,%s,%s,%s,%s"
                    % (
                        i,
                        j,
                        f(x1[i]),
                        f(x2[j]),
                        f(rho[i, j]),
                        f(u1[i, j]),
                        f(u2[i, j]),
                        f(l[i, j]),
                    )
                )
    return out


def write_snapshot(series: SnapshotSeries, directory: Union[str, Path]) -> List[Path]:
    """Write each state in the series as snap_<step>.csv; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for step, state in zip(series.steps, series.states):
        lines = _header_lines(series, step, state)
        lines.extend(_data_lines(series.grid, state))
        path = directory / ("snap_%d.csv" % step)
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def _parse_header(path: Path) -> Dict[str, str]:
    header: Dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" not in body:
                continue
            key, _, value = body.partition("=")
            header[key.strip()] = value.strip()
    return header


def _require(header: Dict[str, str], key: str, path: Path) -> str:
    if key not in header:
        raise SnapshotFormatError("%s: missing header key '%s'" % (path, key))
    return header[key]


def _read_one(path: Path) -> SnapshotSeries:
    header = _parse_header(path)
    columns = header.get("columns")
    if columns is not None:
        dim = 2 if "x2" in columns.split(",") else 1
    else:
        with open(path) as fh:
            first = next((ln for ln in fh if not ln.startswith("#")), "")
        nfields = len(first.split(","))
        if nfields == len(COLUMNS_1D):
            dim = 1
        elif nfields == len(COLUMNS_2D):
            dim = 2
        else:
            raise SnapshotFormatError("%s: unrecognized column layout" % path)

    n1 = int(_require(header, "n1", path))
    dx1 = float(_require(header, "dx1", path))
    time = float(_require(header, "time", path))
    step = int(header.get("step", _step_from_name(path)))
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)

    if dim == 1:
        lo1 = float(header.get("lo1", data[0, 1] - 0.5 * dx1))
        hi1 = float(header.get("hi1", lo1 + n1 * dx1))
        grid = Grid(extents=((lo1, hi1),), shape=(n1,))
        if data.shape[0] != n1:
            raise SnapshotFormatError("%s: expected %d rows, got %d" % (path, n1, data.shape[0]))
        rho = data[:, 2].copy()
        u = data[:, 3].copy()[None, :]
        l = data[:, 4].copy()
    else:
        n2 = int(_require(header, "n2", path))
        dx2 = float(_require(header, "dx2", path))
        lo1 = float(header.get("lo1", data[0, 2] - 0.5 * dx1))
        hi1 = float(header.get("hi1", lo1 + n1 * dx1))
        lo2 = float(header.get("lo2", data[0, 3] - 0.5 * dx2))
        hi2 = float(header.get("hi2", lo2 + n2 * dx2))
        grid = Grid(extents=((lo1, hi1), (lo2, hi2)), shape=(n1, n2))
        if data.shape[0] != n1 * n2:
            raise SnapshotFormatError(
                "%s: expected %d rows, got %d" % (path, n1 * n2, data.shape[0])
            )
        rho = data[:, 4].reshape(n1, n2).copy()
        u = np.stack(
            [data[:, 5].reshape(n1, n2), data[:, 6].reshape(n1, n2)]
        )
        l = data[:, 7].reshape(n1, n2).copy()

    state = MacroState(rho=rho, u=u, l=l, t=time)
    meta: Dict[str, object] = {
        k: v
        for k, v in header.items()
        if k not in ("n1", "n2", "dx1", "dx2", "lo1", "hi1", "lo2", "hi2", "step", "time", "columns")
    }
    series = SnapshotSeries(grid=grid, meta=meta)
    series.append(step, state)
    return series


def _step_from_name(path: Path) -> int:
    m = _FILENAME_RE.match(path.name)
    if m:
        return int(m.group(1))
    return 0


def read_snapshot(path: Union[str, Path]) -> SnapshotSeries:
    """Read snap_<step>.csv, or every such file in a directory, as one series."""
    path = Path(path)
    if path.is_file():
        return _read_one(path)
    if not path.is_dir():
        raise FileNotFoundError(str(path))
    entries = []
    for child in path.iterdir():
        m = _FILENAME_RE.match(child.name)
        if m:
            entries.append((int(m.group(1)), child))
    if not entries:
        raise SnapshotFormatError("%s: no snapshot files found" % path)
    entries.sort()
    series: Optional[SnapshotSeries] = None
    for step, child in entries:
        one = _read_one(child)
        if series is None:
            series = one
        else:
            if one.grid != series.grid:
                raise SnapshotFormatError("%s: grid differs across snapshots" % child)
            series.append(one.steps[0], one.states[0])
    assert series is not None
    return series
