"""Dependency-free SVG line charts with standard-deviation bands."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

W, H = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 60, 150, 40, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def line_chart(
    title: str,
    x: Sequence[float],
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    y_range: tuple[float, float],
    y_label: str = "",
    x_label: str = "step",
) -> str:
    """``series`` holds (label, mean, std); each is drawn as a line over a shaded band."""
    x0, x1 = min(x), max(x)
    y0, y1 = y_range
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM
    span_x = (x1 - x0) or 1.0

    def px(v: float) -> float:
        return LEFT + (v - x0) / span_x * pw

    def py(v: float) -> float:
        v = min(max(v, y0), y1)
        return TOP + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for k in range(6):
        v = y0 + (y1 - y0) * k / 5
        out.append(
            f'<text x="{LEFT - 6}" y="{_fmt(py(v) + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">{v:g}</text>'
        )
        out.append(f'<line x1="{LEFT}" y1="{_fmt(py(v))}" x2="{LEFT + pw}" y2="{_fmt(py(v))}" stroke="#ddd"/>')
    for v in x:
        out.append(
            f'<text x="{_fmt(px(v))}" y="{TOP + ph + 16}" text-anchor="middle" font-family="sans-serif" font-size="10">{v:g}</text>'
        )
    out.append(
        f'<text x="{LEFT + pw / 2:.0f}" y="{H - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">{escape(x_label)}</text>'
    )
    out.append(
        f'<text x="16" y="{TOP + ph / 2:.0f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.0f})">{escape(y_label)}</text>'
    )
    for k, (label, mean, std) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        upper = [f"{_fmt(px(a))},{_fmt(py(m + s))}" for a, m, s in zip(x, mean, std)]
        lower = [f"{_fmt(px(a))},{_fmt(py(m - s))}" for a, m, s in zip(x, mean, std)]
        out.append(f'<polygon points="{" ".join(upper + lower[::-1])}" fill="{color}" fill-opacity="0.18" stroke="none"/>')
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(m))}" for a, m in zip(x, mean))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = TOP + 14 + 18 * k
        out.append(f'<line x1="{W - RIGHT + 12}" y1="{ly}" x2="{W - RIGHT + 32}" y2="{ly}" stroke="{color}" stroke-width="3"/>')
        out.append(
            f'<text x="{W - RIGHT + 38}" y="{ly + 4}" font-family="sans-serif" font-size="12">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
