"""Minimal SVG writers for curve snapshots and time series."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT, MARGIN = 640, 480, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ramp(k: int, n: int) -> str:
    """Blue to red color ramp over snapshot index."""
    s = 0.0 if n <= 1 else k / (n - 1)
    r, g, b = int(30 + 200 * s), int(90 * (1 - abs(2 * s - 1))), int(220 - 190 * s)
    return f"#{r:02x}{g:02x}{b:02x}"


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _svg(body: list[str], width=WIDTH, height=HEIGHT) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n<rect width="100%" height="100%" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def evolution_svg(path, curves: Sequence[np.ndarray], closed: bool, labels: Sequence[str] = ()) -> None:
    """Overlay snapshots with equal-aspect axes; open curves get a substrate line."""
    pts = np.vstack(curves)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    if not closed:
        lo[1] = min(lo[1], 0.0)
    scale = min((WIDTH - 2 * MARGIN) / max(hi[0] - lo[0], 1e-12), (HEIGHT - 2 * MARGIN) / max(hi[1] - lo[1], 1e-12))

    def tx(p):
        return MARGIN + (p[:, 0] - lo[0]) * scale, HEIGHT - MARGIN - (p[:, 1] - lo[1]) * scale

    body = []
    if not closed:
        y0 = HEIGHT - MARGIN - (0.0 - lo[1]) * scale
        body.append(
            f'<line class="substrate" x1="{MARGIN / 2}" y1="{_fmt(y0)}" x2="{WIDTH - MARGIN / 2}" '
            f'y2="{_fmt(y0)}" stroke="black" stroke-width="2"/>'
        )
    for k, c in enumerate(curves):
        x, y = tx(np.vstack([c, c[:1]]) if closed else c)
        coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, y))
        title = f"<title>{escape(labels[k])}</title>" if k < len(labels) else ""
        body.append(f'<polyline fill="none" stroke="{_ramp(k, len(curves))}" stroke-width="1.5" points="{coords}">{title}</polyline>')
    Path(path).write_text(_svg(body))


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        return [10.0**e for e in range(math.floor(lo), math.ceil(hi) + 1)]
    step = 10 ** math.floor(math.log10(max(hi - lo, 1e-300)))
    if (hi - lo) / step < 3:
        step /= 4
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step) + 1)]


def line_plot_svg(
    path,
    series: dict[str, tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "t",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
    markers: bool = False,
) -> None:
    """Line plot of named ``(x, y)`` series; nonfinite or nonpositive-on-log points are dropped."""
    cleaned = {}
    for name, (x, y) in series.items():
        x, y = np.asarray(x, float), np.asarray(y, float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logx:
            keep &= x > 0
        if logy:
            keep &= y > 0
        x, y = x[keep], y[keep]
        cleaned[name] = (np.log10(x) if logx else x, np.log10(y) if logy else y)
    allx = np.concatenate([v[0] for v in cleaned.values()] or [np.zeros(1)])
    ally = np.concatenate([v[1] for v in cleaned.values()] or [np.zeros(1)])
    if allx.size == 0:
        allx, ally = np.zeros(1), np.zeros(1)
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        pad = 0.5 if y0 == 0 else abs(y0) * 0.1
        y0, y1 = y0 - pad, y1 + pad
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(v):
        return MARGIN + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return HEIGHT - MARGIN - (v - y0) / (y1 - y0) * ph

    body = [f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    if title:
        body.append(f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>')
    body.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    body.append(
        f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>'
    )
    for log, axis in ((logx, "x"), (logy, "y")):
        lo, hi = (x0, x1) if axis == "x" else (y0, y1)
        for t in _ticks(lo, hi, log):
            pos = math.log10(t) if log else t
            if not lo <= pos <= hi:
                continue
            label = f"{t:.0e}" if log else f"{t:.4g}"
            if axis == "x":
                body.append(f'<text x="{_fmt(sx(pos))}" y="{HEIGHT - MARGIN + 15}" text-anchor="middle" font-size="10">{label}</text>')
            else:
                body.append(f'<text x="{MARGIN - 4}" y="{_fmt(sy(pos) + 3)}" text-anchor="end" font-size="10">{label}</text>')
    for k, (name, (x, y)) in enumerate(cleaned.items()):
        color = PALETTE[k % len(PALETTE)]
        coords = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, y))
        body.append(f'<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        if markers:
            body += [f'<circle cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" r="3" fill="{color}"/>' for a, b in zip(x, y)]
        body.append(f'<text x="{WIDTH - MARGIN - 5}" y="{MARGIN + 15 + 14 * k}" text-anchor="end" font-size="11" fill="{color}">{escape(name)}</text>')
    Path(path).write_text(_svg(body))
