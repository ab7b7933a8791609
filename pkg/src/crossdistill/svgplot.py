"""Tiny dependency-free SVG line plots for experiment results.

Good enough for eyeballing rate curves; CSV remains the real output.
"""

from __future__ import annotations

import math

WIDTH, HEIGHT = 640, 440
MARGIN = 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _transform(values, lo, hi, out_lo, out_hi, log):
    if log:
        values = [math.log10(v) for v in values]
        lo, hi = math.log10(lo), math.log10(hi)
    span = (hi - lo) or 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        return [10.0**e for e in range(a, b + 1)]
    step = 10 ** math.floor(math.log10((hi - lo) or 1.0))
    if (hi - lo) / step > 6:
        step *= 2
    first = math.ceil(lo / step) * step
    out = []
    while first <= hi + 1e-12:
        out.append(first)
        first += step
    return out


def line_plot(path, series, xlabel="", ylabel="", title="", loglog=False):
    """Write an SVG with one polyline per entry of ``series``
    ({name: [(x, y), ...]}).  loglog plots both axes on log scales."""
    points = [p for pts in series.values() for p in pts]
    if not points:
        raise ValueError("nothing to plot")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if loglog and (x_lo <= 0 or y_lo <= 0):
        raise ValueError("log axes need positive data")
    if x_lo == x_hi:
        x_lo, x_hi = x_lo * 0.9 or -1.0, x_hi * 1.1 or 1.0
    if y_lo == y_hi:
        y_lo, y_hi = y_lo * 0.9 or -1.0, y_hi * 1.1 or 1.0

    def px(vals):
        return _transform(vals, x_lo, x_hi, MARGIN, WIDTH - MARGIN // 2, loglog)

    def py(vals):
        return _transform(vals, y_lo, y_hi, HEIGHT - MARGIN, MARGIN // 2, loglog)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    axis_y = HEIGHT - MARGIN
    parts.append(
        f'<line x1="{MARGIN}" y1="{axis_y}" x2="{WIDTH - MARGIN // 2}" y2="{axis_y}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{MARGIN}" y1="{MARGIN // 2}" x2="{MARGIN}" y2="{axis_y}" stroke="black"/>'
    )
    for t in _ticks(x_lo, x_hi, loglog):
        if t < x_lo * 0.999 or t > x_hi * 1.001:
            continue
        (tx,) = px([t])
        parts.append(f'<line x1="{tx}" y1="{axis_y}" x2="{tx}" y2="{axis_y + 5}" stroke="black"/>')
        parts.append(f'<text x="{tx}" y="{axis_y + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y_lo, y_hi, loglog):
        if t < y_lo * 0.999 or t > y_hi * 1.001:
            continue
        (ty,) = py([t])
        parts.append(f'<line x1="{MARGIN - 5}" y1="{ty}" x2="{MARGIN}" y2="{ty}" stroke="black"/>')
        parts.append(f'<text x="{MARGIN - 8}" y="{ty + 4}" text-anchor="end">{t:g}</text>')
    parts.append(
        f'<text x="{(WIDTH + MARGIN) // 2}" y="{HEIGHT - 12}" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{HEIGHT // 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {HEIGHT // 2})">{ylabel}</text>'
    )
    for i, (name, pts) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = sorted(pts)
        sx = px([p[0] for p in pts])
        sy = py([p[1] for p in pts])
        coords = " ".join(f"{x:.1f},{y:.1f}" for x, y in zip(sx, sy))
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in zip(sx, sy):
            parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="{color}"/>')
        ly = MARGIN // 2 + 16 * i + 10
        parts.append(f'<rect x="{WIDTH - 170}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        parts.append(f'<text x="{WIDTH - 155}" y="{ly}">{name}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
