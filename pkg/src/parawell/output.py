"""CSV tables and small hand-written SVG line charts.

Numbers are written with ``repr`` so a rerun with the same inputs produces
byte-identical files. Wall-clock timings go to a separate ``timing.csv``
that is not part of the replay contract.
"""

from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .experiments import ResultTable

ERRORS_HEADER = ["experiment", "sigma", "lambda", "dT", "k", "error", "bound", "seed", "samples"]
SNAPSHOT_HEADER = ["x", "y", "component", "value", "lambda"]


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def write_errors_csv(table: ResultTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ERRORS_HEADER)
        for r in table.errors:
            w.writerow([r.experiment, _num(r.sigma), _num(r.lam), _num(r.dT), r.k,
                        _num(r.error), _num(r.bound), r.seed, r.samples])


def write_slopes_csv(table: ResultTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["experiment", "sigma", "lambda", "k", "slope", "intercept", "residual"])
        for r in table.slopes:
            w.writerow([r.experiment, _num(r.sigma), _num(r.lam), r.k,
                        _num(r.slope), _num(r.intercept), _num(r.residual)])


def write_snapshot_csv(table: ResultTable, path, components=("E_z",)) -> None:
    """``x,y,component,value,lambda`` rows; ``y`` is empty on 1D grids."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_HEADER)
        for lam, state in table.snapshots:
            coords = [c.ravel() for c in state.grid.mesh()]
            xs = coords[0]
            ys = coords[1] if len(coords) > 1 else [None] * xs.size
            for name in components or state.grid.components:
                vals = state.component(name).ravel()
                for x, y, v in zip(xs, ys, vals):
                    w.writerow([_num(x), _num(y), name, _num(v), _num(lam)])


def write_roughness_csv(table: ResultTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "roughness"])
        for lam, value in table.roughness.items():
            w.writerow([_num(lam), _num(value)])


def write_timings_csv(table: ResultTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sigma", "lambda", "dT", "wall_seconds"])
        for row in table.timings:
            w.writerow([_num(v) for v in row])


# -- SVG ---------------------------------------------------------------------

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 30, 50
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"]


def _axis_map(lo, hi, p0, p1, log):
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5

    def fwd(v):
        v = math.log10(v) if log else v
        return p0 + (v - lo) / (hi - lo) * (p1 - p0)

    return fwd, lo, hi


def line_chart(series, path, *, title="", xlabel="", ylabel="", xlog=False, ylog=True) -> None:
    """Write an SVG chart; ``series`` maps a label to ``(xs, ys)``.

    Points that cannot be placed on a log axis (non-positive) are left out.
    Each marker carries its series label; the axis ranges are stored on the
    plot group as ``data-*`` attributes so coordinates can be decoded back
    into data values.
    """
    cleaned = {}
    for label, (xs, ys) in series.items():
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y)
               and (not xlog or x > 0) and (not ylog or y > 0)]
        cleaned[label] = pts
    allx = [p[0] for pts in cleaned.values() for p in pts] or [1.0]
    ally = [p[1] for pts in cleaned.values() for p in pts] or [1.0]
    x0, x1 = LEFT, WIDTH - RIGHT
    y0, y1 = HEIGHT - BOTTOM, TOP
    fx, xlo, xhi = _axis_map(min(allx), max(allx), x0, x1, xlog)
    fy, ylo, yhi = _axis_map(min(ally), max(ally), y0, y1, ylog)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="18" text-anchor="middle">{escape(title)}</text>',
        f'<g id="plot" data-xlog="{int(xlog)}" data-ylog="{int(ylog)}" '
        f'data-xlo="{xlo!r}" data-xhi="{xhi!r}" data-ylo="{ylo!r}" data-yhi="{yhi!r}" '
        f'data-px0="{x0}" data-px1="{x1}" data-py0="{y0}" data-py1="{y1}">',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]
    for lo, hi, log, vertical in ((xlo, xhi, xlog, False), (ylo, yhi, ylog, True)):
        for t in np.linspace(lo, hi, 5):
            label = f"1e{t:.1f}" if log else f"{t:.3g}"
            if vertical:
                py = y0 + (t - lo) / (hi - lo) * (y1 - y0)
                out.append(f'<text x="{x0 - 6}" y="{py:.1f}" text-anchor="end">{label}</text>')
            else:
                px = x0 + (t - lo) / (hi - lo) * (x1 - x0)
                out.append(f'<text x="{px:.1f}" y="{y0 + 18}" text-anchor="middle">{label}</text>')
    for i, (label, pts) in enumerate(cleaned.items()):
        color = COLORS[i % len(COLORS)]
        coords = [(fx(x), fy(y)) for x, y in pts]
        if len(coords) > 1:
            poly = " ".join(f"{px:.4f},{py:.4f}" for px, py in coords)
            out.append(f'<polyline points="{poly}" fill="none" stroke="{color}"/>')
        for (px, py) in coords:
            out.append(f'<circle cx="{px:.4f}" cy="{py:.4f}" r="2.5" fill="{color}" '
                       f'data-series="{escape(str(label))}"/>')
        out.append(f'<text x="{x1 + 10}" y="{TOP + 16 * (i + 1)}" fill="{color}">{escape(str(label))}</text>')
    out.append("</g>")
    out.append(f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{(y0 + y1) / 2}" transform="rotate(-90 14 {(y0 + y1) / 2})" '
               f'text-anchor="middle">{escape(ylabel)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def decode_svg_points(path) -> dict[str, list[tuple[float, float]]]:
    """Recover data coordinates of the markers written by :func:`line_chart`."""
    ns = {"s": "http://www.w3.org/2000/svg"}
    root = ET.parse(path).getroot()
    g = root.find("s:g[@id='plot']", ns)
    a = {k[5:]: float(v) for k, v in g.attrib.items() if k.startswith("data-")}

    def inv(p, lo, hi, p0, p1, log):
        v = lo + (p - p0) / (p1 - p0) * (hi - lo)
        return 10**v if log else v

    result: dict[str, list[tuple[float, float]]] = {}
    for c in g.findall("s:circle", ns):
        x = inv(float(c.get("cx")), a["xlo"], a["xhi"], a["px0"], a["px1"], a["xlog"])
        y = inv(float(c.get("cy")), a["ylo"], a["yhi"], a["py0"], a["py1"], a["ylog"])
        result.setdefault(c.get("data-series"), []).append((x, y))
    return result


def error_series(table: ResultTable) -> dict[str, tuple[list, list]]:
    series: dict[str, tuple[list, list]] = {}
    for r in table.errors:
        label = f"sigma={r.sigma:g} lambda={r.lam:g} dT={r.dT:g}"
        xs, ys = series.setdefault(label, ([], []))
        xs.append(r.k)
        ys.append(r.error)
    return series


def order_series(table: ResultTable, ks) -> dict[str, tuple[list, list]]:
    series: dict[str, tuple[list, list]] = {}
    for r in table.errors:
        if r.k not in ks:
            continue
        label = f"k={r.k} sigma={r.sigma:g} lambda={r.lam:g}"
        xs, ys = series.setdefault(label, ([], []))
        xs.append(r.dT)
        ys.append(r.error)
    return series
