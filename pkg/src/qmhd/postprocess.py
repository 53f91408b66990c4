"""Stream function, extrema, vortex counting and text field dumps."""

from __future__ import annotations

import io
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boundary import CaseKind
from .fields import FlowState, Grid, ScalarField, VectorField

FIELD_COLUMNS = ("coord1", "coord2", "u1", "u2", "p", "T", "psi")


@dataclass
class PsiField:
    psi: ScalarField
    value: float
    location: tuple[int, int]
    path_gap: float
    vortex_count: int

    @property
    def grid(self) -> Grid:
        return self.psi.grid


def _cumtrapz(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    f = np.moveaxis(f, axis, 0)
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * h * (f[1:] + f[:-1]), axis=0)
    return np.moveaxis(out, 0, axis)


def _zero_boundary(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    a[0, :] = a[-1, :] = 0.0
    a[:, 0] = a[:, -1] = 0.0
    return a


def stream_function_paths(state: FlowState, w: VectorField) -> tuple[np.ndarray, np.ndarray]:
    """Stream function integrated along each coordinate direction, before boundary zeroing.

    Cylinder: ``u_r - w_r = -(1/r) dpsi/dz``, ``u_z - w_z = (1/r) dpsi/dr``.
    Square: ``u_x - w_x = dpsi/dy``, ``u_y - w_y = -dpsi/dx``.
    The first array is the primary path (radial for the cylinder, vertical
    for the square), the second the cross-check.
    """
    g = state.grid
    s1 = state.velocity.c1.values - w.c1.values
    s2 = state.velocity.c2.values - w.c2.values
    if g.is_cylindrical:
        r = g.x1[:, None]
        primary = _cumtrapz(r * s2, g.h1, axis=0)
        other = -_cumtrapz(r * s1, g.h2, axis=1)
    else:
        primary = _cumtrapz(s1, g.h2, axis=1)
        other = -_cumtrapz(s2, g.h1, axis=0)
    return primary, other


def stream_function(state: FlowState, w: VectorField, case: CaseKind | None = None) -> PsiField:
    primary, other = stream_function_paths(state, w)
    g = state.grid
    psi = ScalarField(g, _zero_boundary(primary))
    gap = float(np.max(np.abs(primary[1:-1, 1:-1] - other[1:-1, 1:-1]))) if g.n1 > 2 and g.n2 > 2 else 0.0
    value, loc = psi_extremum(psi)
    return PsiField(psi, value, loc, gap, count_vortices(psi))


def psi_extremum(psi: ScalarField) -> tuple[float, tuple[int, int]]:
    """Minimum over interior nodes; ties go to the lowest (i, j)."""
    inner = psi.values[1:-1, 1:-1]
    k = int(np.argmin(inner))
    i, j = np.unravel_index(k, inner.shape)
    return float(inner[i, j]), (int(i) + 1, int(j) + 1)


def default_probe(grid: Grid) -> tuple[int, float]:
    """Vertical centreline of the square; mid-height of the upper half of the cylinder."""
    if grid.is_cylindrical:
        return (2, 0.5 * grid.extent2[1])
    return (1, 0.5 * (grid.extent1[0] + grid.extent1[1]))


def probe_line(psi: ScalarField, probe: tuple[int, float]) -> np.ndarray:
    """ψ sampled on the grid line(s) at coordinate ``probe[1]`` along direction ``probe[0]``,
    linearly interpolated between the two nearest node lines."""
    g = psi.grid
    direction, where = probe
    coords = g.x1 if direction == 1 else g.x2
    h = g.h1 if direction == 1 else g.h2
    s = (where - coords[0]) / h
    k = int(np.clip(np.floor(s), 0, len(coords) - 2))
    t = float(np.clip(s - k, 0.0, 1.0))
    v = psi.values if direction == 1 else psi.values.T
    return (1.0 - t) * v[k] + t * v[k + 1]


def count_vortices(psi: ScalarField, probe: tuple[int, float] | None = None, floor: float = 0.01) -> int:
    """Strict local extrema of ψ along a probe line, ignoring those below ``floor * max|ψ|``."""
    probe = default_probe(psi.grid) if probe is None else probe
    line = probe_line(psi, probe)
    cutoff = floor * float(np.max(np.abs(psi.values)))
    if cutoff == 0.0:
        return 0
    mid = line[1:-1]
    peak = (mid > line[:-2]) & (mid > line[2:])
    trough = (mid < line[:-2]) & (mid < line[2:])
    return int(np.count_nonzero((peak | trough) & (np.abs(mid) >= cutoff)))


def _meta_lines(config) -> list[str]:
    if config is None:
        return []
    if hasattr(config, "to_text"):
        text = config.to_text()
    elif isinstance(config, Mapping):
        text = "".join(f"{k} = {v}\n" for k, v in config.items())
    else:
        raise TypeError(f"cannot record config of type {type(config).__name__}")
    return [f"# {line}" for line in text.splitlines() if line.strip()]


def _write_table(destination, columns: tuple[str, ...], data: np.ndarray, config, title: str) -> None:
    buf = io.StringIO()
    buf.write(f"# {title}\n")
    for line in _meta_lines(config):
        buf.write(line + "\n")
    buf.write("# " + "\t".join(columns) + "\n")
    np.savetxt(buf, data, fmt="%.17g", delimiter="\t")
    path = Path(destination)
    try:
        path.write_text(buf.getvalue(), encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write field dump {path}: {exc}") from exc


def _node_columns(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    X1, X2 = grid.mesh()
    # j-major row order: x1 varies fastest
    return X1.T.ravel(), X2.T.ravel()


def export_fields(state: FlowState, psi: ScalarField | PsiField, destination, config=None,
                  fmt: str = "tsv") -> None:
    """Write one tab-separated row per node with coordinates, u1, u2, p, T and ψ."""
    if fmt != "tsv":
        raise ValueError(f"unsupported format {fmt!r}")
    if isinstance(psi, PsiField):
        psi = psi.psi
    g = state.grid
    c1, c2 = _node_columns(g)
    u1, u2, p, T = state.arrays()
    data = np.column_stack([c1, c2] + [a.T.ravel() for a in (u1, u2, p, T, psi.values)])
    _write_table(destination, FIELD_COLUMNS, data, config, f"qmhd field dump {g.geometry.value} {g.n1}x{g.n2}")


def export_psi(psi: ScalarField | PsiField, destination, config=None) -> None:
    if isinstance(psi, PsiField):
        psi = psi.psi
    c1, c2 = _node_columns(psi.grid)
    data = np.column_stack([c1, c2, psi.values.T.ravel()])
    _write_table(destination, ("coord1", "coord2", "psi"), data, config,
                 f"qmhd stream function {psi.grid.geometry.value} {psi.grid.n1}x{psi.grid.n2}")


def read_table(path) -> tuple[dict[str, np.ndarray], list[str]]:
    """Parse a dump written by :func:`export_fields`; returns columns and comment lines."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    header = comments[-1][1:].strip().split("\t")
    data = np.loadtxt([ln for ln in lines if ln and not ln.startswith("#")], delimiter="\t", ndmin=2)
    return {name: data[:, k] for k, name in enumerate(header)}, comments


def columns_to_grid(column: np.ndarray, grid: Grid) -> np.ndarray:
    """Undo the j-major flattening used in the dumps."""
    return column.reshape(grid.n2, grid.n1).T


__all__ = [
    "PsiField", "stream_function", "stream_function_paths", "psi_extremum", "count_vortices",
    "default_probe", "probe_line", "export_fields", "export_psi", "read_table", "columns_to_grid",
]
