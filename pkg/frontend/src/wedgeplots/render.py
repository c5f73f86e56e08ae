"""Render pecwedge datasets as figures.

Consumes only the CLI's dataset files (CSV or JSON); the conductor mask is
taken from the in_vacuum column, never recomputed from geometry.  Rendering
is a pure function of (dataset, spec): fixed backend, size, dpi and no
embedded timestamps, so repeated renders are pixel-identical.

Usage: wedgeplots-render --data PATH --kind heatmap|curves --out PATH
       [--levels 1.0,2.0] [--scale symlog1|linear]
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.colors as mcolors
import matplotlib.pyplot as plt
import numpy as np

MAP_COLUMNS = ("x_lambda", "y_lambda", "z_lambda", "value", "tail", "in_vacuum")
STED_COLUMNS = ("r_lambda", "R_lambda", "h", "eta", "P")
CONV_COLUMNS = ("height_lambda", "m_max", "p_max", "relative_error")

_DPI = 120
_FIGSIZE = (6.0, 5.0)


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class PlotSpec:
    data_path: str
    kind: str  # "heatmap" | "curves"
    out_path: str
    levels: tuple = (1.0,)
    scale: str = "symlog1"  # heatmap colour policy; "linear" to override

    def __post_init__(self):
        if self.kind not in ("heatmap", "curves"):
            raise ValueError(f"kind must be 'heatmap' or 'curves', got {self.kind!r}")
        if self.kind == "heatmap" and not self.levels:
            raise ValueError("heatmaps need a non-empty contour level list")
        if self.scale not in ("symlog1", "linear"):
            raise ValueError(f"scale must be 'symlog1' or 'linear', got {self.scale!r}")


@dataclass
class RenderResult:
    out_path: str
    kind: str
    contour_segments: list = field(default_factory=list)
    half_markers: dict = field(default_factory=dict)


def load_dataset(path: str):
    """Read a CLI dataset; returns (columns, array of rows)."""
    try:
        if path.endswith(".json"):
            with open(path) as fh:
                doc = json.load(fh)
            columns = tuple(doc["columns"])
            rows = np.array(doc["rows"], dtype=float)
        else:
            with open(path) as fh:
                header = fh.readline().strip()
            columns = tuple(header.split(","))
            rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, KeyError, ValueError) as exc:
        raise DatasetError(f"cannot parse dataset {path!r}: {exc}") from exc
    if rows.shape[0] == 0:
        raise DatasetError(f"dataset {path!r} has no rows")
    if rows.shape[1] != len(columns):
        raise DatasetError(
            f"dataset {path!r}: row width {rows.shape[1]} does not match header ({len(columns)} columns)"
        )
    return columns, rows


def _match_schema(columns, expected, path):
    if len(columns) != len(expected):
        raise DatasetError(
            f"{path}: expected {len(expected)} columns {expected}, got {len(columns)}"
        )
    for i, (got, want) in enumerate(zip(columns, expected)):
        if got != want:
            raise DatasetError(f"{path}: column {i}: expected {want!r}, got {got!r}")


def _grid_from_rows(rows, path):
    xs = np.unique(rows[:, 0])
    ys = np.unique(rows[:, 1])
    if xs.size * ys.size != rows.shape[0]:
        raise DatasetError(f"{path}: rows do not form a full x-y grid")
    value = np.full((ys.size, xs.size), np.nan)
    mask = np.zeros((ys.size, xs.size), dtype=bool)
    ix = np.searchsorted(xs, rows[:, 0])
    iy = np.searchsorted(ys, rows[:, 1])
    value[iy, ix] = rows[:, 3]
    mask[iy, ix] = rows[:, 5] < 0.5
    return xs, ys, value, mask


def unity_contour_segments(xs, ys, value, mask, level):
    """Contour polylines of `level` on the grid, via the figure's own
    contour pass (marching squares); used both for drawing and testing."""
    fig = plt.figure()
    try:
        v = np.where(mask, np.nan, value)
        cs = plt.contour(xs, ys, v, levels=[level])
        return [seg.copy() for seg in cs.allsegs[0]]
    finally:
        plt.close(fig)


def _symlog1_norm(vmin, vmax, linthresh=0.05):
    fwd = lambda v: np.sign(v - 1.0) * np.log1p(np.abs(v - 1.0) / linthresh)
    inv = lambda y: 1.0 + np.sign(y) * linthresh * np.expm1(np.abs(y))
    return mcolors.FuncNorm((fwd, inv), vmin=vmin, vmax=vmax)


def _render_heatmap(spec: PlotSpec, columns, rows) -> RenderResult:
    _match_schema(columns, MAP_COLUMNS, spec.data_path)
    xs, ys, value, mask = _grid_from_rows(rows, spec.data_path)
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    plotted = np.ma.masked_where(mask | ~np.isfinite(value), value)
    cmap = plt.get_cmap("inferno").copy()
    cmap.set_bad("dimgray")
    finite = plotted.compressed()
    vmin = float(finite.min()) if finite.size else 0.0
    vmax = float(finite.max()) if finite.size else 1.0
    norm = _symlog1_norm(vmin, vmax) if spec.scale == "symlog1" and vmin < 1.0 < vmax else None
    mesh = ax.pcolormesh(xs, ys, plotted, cmap=cmap, norm=norm, vmin=None if norm else vmin,
                         vmax=None if norm else vmax, shading="nearest")
    fig.colorbar(mesh, ax=ax)
    segments = []
    if min(xs.size, ys.size) >= 3:
        for level in spec.levels:
            segs = unity_contour_segments(xs, ys, value, mask, level)
            segments.extend(segs)
            for seg in segs:
                ax.plot(seg[:, 0], seg[:, 1], "--", color="lime", linewidth=1.3)
    else:
        print("warning: grid too coarse for contours; skipping", file=sys.stderr)
    ax.set_xlabel("x / wavelength")
    ax.set_ylabel("y / wavelength")
    ax.set_aspect("equal")
    fig.savefig(spec.out_path, metadata={"Software": None})
    plt.close(fig)
    return RenderResult(spec.out_path, "heatmap", contour_segments=segments)


def _half_crossings(r, p):
    """Half-maximum crossing abscissae by linear interpolation on the data."""
    half = p.max() / 2.0
    below = p <= half
    out = []
    for i in np.nonzero(below[:-1] != below[1:])[0]:
        f = (half - p[i]) / (p[i + 1] - p[i])
        out.append(float(r[i] + f * (r[i + 1] - r[i])))
    return out


def _render_sted_curves(spec: PlotSpec, rows) -> RenderResult:
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    markers = {}
    for radius in np.unique(rows[:, 1]):
        sel = rows[:, 1] == radius
        r = rows[sel, 0]
        p = rows[sel, 4]
        order = np.argsort(r)
        r, p = r[order], p[order]
        (line,) = ax.plot(r, p, label=f"R = {radius:g}")
        crossings = _half_crossings(r, p)
        markers[float(radius)] = crossings
        for c in crossings:
            ax.axvline(c, linestyle="--", color=line.get_color(), linewidth=0.9)
    ax.set_xlabel("r / wavelength")
    ax.set_ylabel("detection probability")
    ax.legend()
    fig.savefig(spec.out_path, metadata={"Software": None})
    plt.close(fig)
    return RenderResult(spec.out_path, "curves", half_markers=markers)


def _render_convergence_curves(spec: PlotSpec, rows) -> RenderResult:
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    pairs = np.unique(rows[:, 1:3], axis=0)
    for m_max, p_max in pairs:
        sel = (rows[:, 1] == m_max) & (rows[:, 2] == p_max)
        h = rows[sel, 0]
        e = rows[sel, 3]
        order = np.argsort(h)
        ax.semilogy(h[order], np.maximum(e[order], 1e-18), label=f"M={int(m_max)}, P={int(p_max)}")
    ax.set_xlabel("height / wavelength")
    ax.set_ylabel("relative error vs analytic half-space")
    ax.legend()
    fig.savefig(spec.out_path, metadata={"Software": None})
    plt.close(fig)
    return RenderResult(spec.out_path, "curves")


def render(spec: PlotSpec) -> RenderResult:
    """Render one dataset according to the spec; returns what was drawn."""
    columns, rows = load_dataset(spec.data_path)
    if spec.kind == "heatmap":
        return _render_heatmap(spec, columns, rows)
    if columns == STED_COLUMNS:
        return _render_sted_curves(spec, rows)
    if columns == CONV_COLUMNS:
        return _render_convergence_curves(spec, rows)
    raise DatasetError(
        f"{spec.data_path}: curves rendering expects columns {STED_COLUMNS} or {CONV_COLUMNS}, got {columns}"
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wedgeplots-render", description=__doc__)
    parser.add_argument("--data", required=True)
    parser.add_argument("--kind", required=True, choices=("heatmap", "curves"))
    parser.add_argument("--out", required=True)
    parser.add_argument("--levels", default="1.0", help="comma-separated contour levels")
    parser.add_argument("--scale", default="symlog1", choices=("symlog1", "linear"))
    args = parser.parse_args(argv)
    try:
        levels = tuple(float(v) for v in args.levels.split(",") if v)
        spec = PlotSpec(data_path=args.data, kind=args.kind, out_path=args.out,
                        levels=levels, scale=args.scale)
        render(spec)
    except (DatasetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
