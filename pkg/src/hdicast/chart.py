"""Dependency-free SVG line chart of forecast HDI paths."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")

WIDTH, HEIGHT = 720, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 130, 40, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def line_chart(series: dict, title: str = "Forecast HDI") -> str:
    """``series`` maps a label to ``(years, values)``; one polyline per label."""
    labels = sorted(series)
    years = sorted({int(y) for ys, _ in series.values() for y in ys})
    values = [float(v) for _, vs in series.values() for v in vs]
    if not years or not values:
        raise ValueError("nothing to plot")
    x0, x1 = years[0], years[-1]
    if x0 == x1:
        x0, x1 = x0 - 1, x1 + 1
    step = 0.01
    y0 = math.floor(min(values) / step) * step
    y1 = math.ceil(max(values) / step) * step
    if y1 - y0 < step:
        y0, y1 = y0 - step, y1 + step
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return TOP + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for yr in years:
        out.append(f'<text x="{_fmt(sx(yr))}" y="{TOP + ph + 18}" text-anchor="middle">{yr}</text>')
    n_ticks = 5
    for i in range(n_ticks + 1):
        v = y0 + (y1 - y0) * i / n_ticks
        out.append(f'<line x1="{LEFT - 4}" y1="{_fmt(sy(v))}" x2="{LEFT}" y2="{_fmt(sy(v))}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_fmt(sy(v) + 4)}" text-anchor="end">{v:.3f}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.0f}" y="{HEIGHT - 10}" text-anchor="middle">Year</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.0f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2:.0f})">HDI</text>')
    for i, label in enumerate(labels):
        colour = PALETTE[i % len(PALETTE)]
        ys, vs = series[label]
        pts = " ".join(f"{_fmt(sx(int(y)))},{_fmt(sy(float(v)))}" for y, v in zip(ys, vs))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="{pts}"/>')
        ly = TOP + 10 + 18 * i
        lx = LEFT + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
