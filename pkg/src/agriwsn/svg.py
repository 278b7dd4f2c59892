"""Dependency-free SVG output: deployment maps and the comparison bar chart.

Numbers are printed with fixed precision so identical inputs give
byte-identical files.
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from .placement import ANCHOR, CONTROLLER_ID, EXTRA, NORMAL, STATION, Deployment

ROLE_COLORS = {ANCHOR: "#d62728", STATION: "#1f77b4", NORMAL: "#2ca02c", EXTRA: "#9467bd"}
MARKER_RADIUS = {ANCHOR: 5.0, STATION: 4.0, NORMAL: 4.0, EXTRA: 2.5}
SCALE = 2.0
MARGIN = 20.0


def _f(x: float) -> str:
    return f"{x:.2f}"


def deployment_svg(dep: Deployment, ranges: Mapping[str, float] | None = None, title: str = "") -> str:
    spec = dep.field
    w = spec.width_m * SCALE + 2 * MARGIN
    h = spec.height_m * SCALE + 2 * MARGIN

    def sx(x):
        return MARGIN + x * SCALE

    def sy(y):
        return MARGIN + (spec.height_m - y) * SCALE

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(w)}" height="{_f(h)}" viewBox="0 0 {_f(w)} {_f(h)}">',
        f'<rect class="boundary" x="{_f(MARGIN)}" y="{_f(MARGIN)}" width="{_f(spec.width_m * SCALE)}" '
        f'height="{_f(spec.height_m * SCALE)}" fill="#ffffff" stroke="#000000" stroke-width="1.5"/>',
    ]
    for c in range(1, spec.n_cols):
        x = sx(c * spec.cell_edge_m)
        out.append(f'<line class="grid" x1="{_f(x)}" y1="{_f(sy(0))}" x2="{_f(x)}" y2="{_f(sy(spec.height_m))}" '
                   f'stroke="#cccccc" stroke-width="0.5"/>')
    for r in range(1, spec.n_rows):
        y = sy(r * spec.cell_edge_m)
        out.append(f'<line class="grid" x1="{_f(sx(0))}" y1="{_f(y)}" x2="{_f(sx(spec.width_m))}" y2="{_f(y)}" '
                   f'stroke="#cccccc" stroke-width="0.5"/>')

    nodes = sorted(dep.nodes, key=lambda n: n.id)
    ranges = ranges or {}
    for n in nodes:
        r = ranges.get(n.role)
        if r:
            out.append(f'<circle class="range {n.role}" cx="{_f(sx(n.position.x))}" cy="{_f(sy(n.position.y))}" '
                       f'r="{_f(r * SCALE)}" fill="{ROLE_COLORS[n.role]}" fill-opacity="0.08" '
                       f'stroke="{ROLE_COLORS[n.role]}" stroke-opacity="0.5" stroke-width="0.5"/>')
    index = {n.id: n for n in nodes}
    for child, parent in sorted(dep.links.items()):
        if child not in index or (parent not in index and parent != CONTROLLER_ID):
            continue
        a = index[child].position
        b = dep.parent_position(parent)
        out.append(f'<line class="link" x1="{_f(sx(a.x))}" y1="{_f(sy(a.y))}" x2="{_f(sx(b.x))}" y2="{_f(sy(b.y))}" '
                   f'stroke="#555555" stroke-width="0.6"/>')
    if any(p == CONTROLLER_ID for p in dep.links.values()):
        c = spec.center
        out.append(f'<rect class="controller" x="{_f(sx(c.x) - 4)}" y="{_f(sy(c.y) - 4)}" width="8.00" height="8.00" '
                   f'fill="#000000"/>')
    for n in nodes:
        out.append(f'<circle class="node {n.role}" cx="{_f(sx(n.position.x))}" cy="{_f(sy(n.position.y))}" '
                   f'r="{_f(MARKER_RADIUS[n.role])}" fill="{ROLE_COLORS[n.role]}"/>')
    if title:
        out.append(f'<text x="{_f(MARGIN)}" y="{_f(MARGIN - 6)}" font-family="sans-serif" font-size="12">'
                   f'{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(dep: Deployment, ranges: Mapping[str, float] | None, path, title: str = "") -> Path:
    path = Path(path)
    path.write_text(deployment_svg(dep, ranges, title))
    return path


def bar_chart_svg(labels: Sequence[str], values: Sequence[float], title: str = "",
                  y_label: str = "coverage", y_max: float = 1.0) -> str:
    width, height = 120.0 + 90.0 * len(labels), 320.0
    left, bottom, top = 60.0, 260.0, 40.0
    span = bottom - top
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
           f'viewBox="0 0 {_f(width)} {_f(height)}">',
           f'<line x1="{_f(left)}" y1="{_f(bottom)}" x2="{_f(width - 20)}" y2="{_f(bottom)}" stroke="#000000"/>',
           f'<line x1="{_f(left)}" y1="{_f(top)}" x2="{_f(left)}" y2="{_f(bottom)}" stroke="#000000"/>']
    for k in range(6):
        v = y_max * k / 5
        y = bottom - span * k / 5
        out.append(f'<text x="{_f(left - 6)}" y="{_f(y + 4)}" font-family="sans-serif" font-size="10" '
                   f'text-anchor="end">{v:.2f}</text>')
    for i, (label, value) in enumerate(zip(labels, values)):
        x = left + 20.0 + 90.0 * i
        bar = span * max(0.0, min(value, y_max)) / y_max
        out.append(f'<rect class="bar" x="{_f(x)}" y="{_f(bottom - bar)}" width="60.00" height="{_f(bar)}" '
                   f'fill="#1f77b4"/>')
        out.append(f'<text x="{_f(x + 30)}" y="{_f(bottom - bar - 4)}" font-family="sans-serif" font-size="10" '
                   f'text-anchor="middle">{value:.3f}</text>')
        out.append(f'<text x="{_f(x + 30)}" y="{_f(bottom + 14)}" font-family="sans-serif" font-size="10" '
                   f'text-anchor="middle">{escape(label)}</text>')
    out.append(f'<text x="14" y="{_f((top + bottom) / 2)}" font-family="sans-serif" font-size="11" '
               f'transform="rotate(-90 14 {_f((top + bottom) / 2)})" text-anchor="middle">{escape(y_label)}</text>')
    if title:
        out.append(f'<text x="{_f(left)}" y="20" font-family="sans-serif" font-size="12">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
