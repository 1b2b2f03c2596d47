"""Minimal dependency-free SVG 1.1 line plots.

Enough for trajectory figures: one x axis, several y series drawn as
polylines, tick labels, and a legend. Output is a standalone .svg file.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["line_plot"]

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
    "#bcbd22", "#e377c2",
)

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 62, 16, 34, 46  # margins


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Tick positions at 1/2/5 x 10^k steps covering [lo, hi]."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if raw <= step:
            break
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt_tick(v: float) -> str:
    s = f"{v:.6g}"
    return "0" if s == "-0" else s


def line_plot(
    path,
    x: np.ndarray,
    series,
    labels,
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> None:
    """Write a line plot of the given series against x to an SVG file.

    series is a sequence of 1-D arrays, all the same length as x;
    labels gives one legend entry per series.
    """
    x = np.asarray(x, dtype=float)
    series = [np.asarray(s, dtype=float) for s in series]
    if len(series) != len(labels):
        raise ValueError("one label per series is required")
    if not series:
        raise ValueError("at least one series is required")
    for s in series:
        if s.shape != x.shape:
            raise ValueError("every series must match the x grid length")

    xlo, xhi = float(x.min()), float(x.max())
    ylo = min(float(s.min()) for s in series)
    yhi = max(float(s.max()) for s in series)
    if xhi <= xlo:
        xhi = xlo + 1.0
    if yhi <= ylo:
        ylo, yhi = ylo - 1.0, ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo -= pad
    yhi += pad

    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def px(v: float) -> float:
        return _ML + (v - xlo) / (xhi - xlo) * pw

    def py(v: float) -> float:
        return _MT + (yhi - v) / (yhi - ylo) * ph

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">'
    )
    out.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    out.append(
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" '
        'fill="none" stroke="#333333" stroke-width="1"/>'
    )

    for t in _nice_ticks(xlo, xhi):
        if not (xlo - 1e-12 <= t <= xhi + 1e-12):
            continue
        xp = px(t)
        out.append(
            f'<line x1="{xp:.2f}" y1="{_MT + ph}" x2="{xp:.2f}" '
            f'y2="{_MT + ph + 5}" stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{xp:.2f}" y="{_MT + ph + 18}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{_fmt_tick(t)}</text>'
        )
    for t in _nice_ticks(ylo, yhi):
        if not (ylo - 1e-12 <= t <= yhi + 1e-12):
            continue
        yp = py(t)
        out.append(
            f'<line x1="{_ML - 5}" y1="{yp:.2f}" x2="{_ML}" '
            f'y2="{yp:.2f}" stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<line x1="{_ML}" y1="{yp:.2f}" x2="{_ML + pw}" y2="{yp:.2f}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_ML - 8}" y="{yp + 4:.2f}" font-size="11" '
            f'text-anchor="end" font-family="sans-serif">{_fmt_tick(t)}</text>'
        )

    for k, (s, label) in enumerate(zip(series, labels)):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{px(xv):.2f},{py(yv):.2f}" for xv, yv in zip(x, s))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>'
        )

    if title:
        out.append(
            f'<text x="{_W / 2}" y="20" font-size="14" text-anchor="middle" '
            f'font-family="sans-serif">{escape(title)}</text>'
        )
    if xlabel:
        out.append(
            f'<text x="{_ML + pw / 2}" y="{_H - 10}" font-size="12" '
            f'text-anchor="middle" font-family="sans-serif">{escape(xlabel)}</text>'
        )
    if ylabel:
        yc = _MT + ph / 2
        out.append(
            f'<text x="16" y="{yc}" font-size="12" text-anchor="middle" '
            f'font-family="sans-serif" transform="rotate(-90 16 {yc})">'
            f"{escape(ylabel)}</text>"
        )

    lx, ly = _ML + pw - 8, _MT + 8
    for k, label in enumerate(labels):
        color = _PALETTE[k % len(_PALETTE)]
        yk = ly + 14 * k
        out.append(
            f'<line x1="{lx - 30}" y1="{yk + 4}" x2="{lx - 12}" y2="{yk + 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{lx - 36}" y="{yk + 8}" font-size="11" text-anchor="end" '
            f'font-family="sans-serif">{escape(str(label))}</text>'
        )

    out.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")
