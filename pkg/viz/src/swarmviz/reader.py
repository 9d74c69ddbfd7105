"""Reader for the solver's snapshot CSV layout.

A snapshot file is plain text: `# key=value` header lines, a final
`# columns=...` header naming the per-row fields, then comma-separated
numeric rows in C order (row index varies slowest). 1D files carry
columns i,x1,rho,u1,l; 2D files carry i,j,x1,x2,rho,u1,u2,l.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np


class SnapshotParseError(ValueError):
    """Raised when a file does not follow the snapshot layout."""


@dataclass(frozen=True)
class Snapshot:
    """One parsed snapshot: header map plus grid-shaped field arrays."""

    headers: Dict[str, str]
    columns: Tuple[str, ...]
    fields: Dict[str, np.ndarray]
    shape: Tuple[int, ...]
    extents: Tuple[Tuple[float, float], ...]
    time: float

    @property
    def dim(self) -> int:
        return len(self.shape)

    def centers(self, axis: int) -> np.ndarray:
        lo, hi = self.extents[axis]
        n = self.shape[axis]
        dx = (hi - lo) / n
        return lo + (np.arange(n) + 0.5) * dx

    def field(self, name: str) -> np.ndarray:
        """A stored column or one of the derived products rhou, rhol."""
        if name in self.fields:
            return self.fields[name]
        if name == "rhou":
            return self.fields["rho"] * self.fields["u1"]
        if name == "rhol":
            return self.fields["rho"] * self.fields["l"]
        raise KeyError(
            "unknown field %r; have %s plus derived rhou, rhol"
            % (name, ", ".join(sorted(self.fields)))
        )


def _require(headers: Dict[str, str], key: str, path: Path) -> str:
    if key not in headers:
        raise SnapshotParseError(f"{path}: missing required header '{key}'")
    return headers[key]


def read_snapshot_csv(path: Union[str, Path]) -> Snapshot:
    """Parse one snapshot file; malformed content names the offending line."""
    path = Path(path)
    headers: Dict[str, str] = {}
    columns: Tuple[str, ...] = ()
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    raise SnapshotParseError(
                        f"{path}:{lineno}: header line without key=value"
                    )
                key, value = body.split("=", 1)
                key = key.strip()
                if key == "columns":
                    columns = tuple(c.strip() for c in value.split(","))
                else:
                    headers[key] = value.strip()
                continue
            if not columns:
                raise SnapshotParseError(
                    f"{path}:{lineno}: data before the '# columns=' header"
                )
            parts = line.split(",")
            if len(parts) != len(columns):
                raise SnapshotParseError(
                    f"{path}:{lineno}: expected {len(columns)} fields, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise SnapshotParseError(
                    f"{path}:{lineno}: non-numeric value in data row"
                ) from None
    if not columns:
        raise SnapshotParseError(f"{path}: no '# columns=' header found")
    if not rows:
        raise SnapshotParseError(f"{path}: no data rows")

    two_d = "j" in columns
    n1 = int(_require(headers, "n1", path))
    shape: Tuple[int, ...] = (n1,)
    if two_d:
        n2 = int(_require(headers, "n2", path))
        shape = (n1, n2)
    expected = int(np.prod(shape))
    if len(rows) != expected:
        raise SnapshotParseError(
            f"{path}: {len(rows)} data rows for grid shape {shape} ({expected} cells)"
        )

    data = np.asarray(rows)
    fields = {}
    for k, name in enumerate(columns):
        if name in ("i", "j"):
            continue
        fields[name] = np.ascontiguousarray(data[:, k].reshape(shape))

    def axis_extent(axis: int, lo_key: str, hi_key: str, x_col: str) -> Tuple[float, float]:
        if lo_key in headers and hi_key in headers:
            return float(headers[lo_key]), float(headers[hi_key])
        # fall back to reconstructing the axis from cell centers
        x = fields[x_col]
        x = x[:, 0] if (two_d and axis == 0) else (x[0, :] if two_d else x)
        dx = float(x[1] - x[0]) if x.shape[0] > 1 else 1.0
        return float(x[0] - dx / 2), float(x[-1] + dx / 2)

    extents = (axis_extent(0, "lo1", "hi1", "x1"),)
    if two_d:
        extents = extents + (axis_extent(1, "lo2", "hi2", "x2"),)
    for name in ("x1", "x2"):
        fields.pop(name, None)

    required = ("rho", "u1", "l") if not two_d else ("rho", "u1", "u2", "l")
    for name in required:
        if name not in fields:
            raise SnapshotParseError(f"{path}: column '{name}' missing")

    time = float(_require(headers, "time", path))
    return Snapshot(
        headers=headers,
        columns=columns,
        fields=fields,
        shape=shape,
        extents=extents,
        time=time,
    )
