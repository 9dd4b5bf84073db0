"""Minimal, byte-deterministic SVG line plots."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=55)
COLORS = ["#1f4e79", "#c0392b", "#27ae60", "#8e44ad", "#d35400"]
DASHES = ["", "6,4", "2,3", "8,3,2,3", "1,2"]


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    x = start
    while x <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(x) < 1e-12 * step else x)
        x += step
    return ticks


def _num(x: float) -> str:
    return f"{x:.2f}"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(curves: Sequence[tuple[str, Sequence[float], Sequence[float]]],
               title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """SVG text with one polyline per ``(label, xs, ys)`` curve."""
    if not curves:
        raise ValueError("nothing to plot")
    points = []
    for label, xs, ys in curves:
        if len(xs) != len(ys):
            raise ValueError(f"curve {label!r}: x and y lengths differ")
        if len(xs) < 2:
            raise ValueError(f"curve {label!r} needs at least two points")
        points += [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(y)]
    if not points:
        raise ValueError("no finite points to plot")
    x_lo, x_hi = min(p[0] for p in points), max(p[0] for p in points)
    y_lo, y_hi = min(p[1] for p in points), max(p[1] for p in points)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    left, top = MARGIN["left"], MARGIN["top"]
    pw = WIDTH - left - MARGIN["right"]
    ph = HEIGHT - top - MARGIN["bottom"]

    def sx(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return top + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        X = _num(sx(t))
        out.append(f'<line x1="{X}" y1="{top + ph}" x2="{X}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{top + ph + 18}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y_lo, y_hi):
        Y = _num(sy(t))
        out.append(f'<line x1="{left - 5}" y1="{Y}" x2="{left}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle">{t:.4g}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>')
    if xlabel:
        out.append(f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {top + ph / 2:.1f})">{_esc(ylabel)}</text>')
    for i, (label, xs, ys) in enumerate(curves):
        coords = " ".join(f"{_num(sx(x))},{_num(sy(y))}" for x, y in zip(xs, ys) if math.isfinite(y))
        dash = DASHES[i % len(DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{COLORS[i % len(COLORS)]}" stroke-width="1.5"'
                   f'{dash_attr} points="{coords}"/>')
        if label:
            ly = top + 16 + 16 * i
            out.append(f'<text x="{left + pw - 8}" y="{ly}" text-anchor="end" '
                       f'fill="{COLORS[i % len(COLORS)]}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(curves, path, title="", xlabel="", ylabel="") -> Path:
    """Write :func:`render_svg` output to ``path``."""
    text = render_svg(curves, title, xlabel, ylabel)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
    return path
