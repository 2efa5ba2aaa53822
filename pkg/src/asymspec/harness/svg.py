"""Tiny SVG scatter writer: points, axes, labelled vertical/circular guides."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

W, H, PAD = 480, 480, 48


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def scatter_svg(xs: Sequence[float], ys: Sequence[float], path: str | Path, *, title: str = "",
                highlight: Sequence[bool] | None = None, vlines: Sequence[tuple[float, str]] = (),
                circles: Sequence[tuple[float, str]] = (), xlabel: str = "", ylabel: str = "") -> str:
    xs, ys = list(map(float, xs)), list(map(float, ys))
    extra = [v for v, _ in vlines] + [r for r, _ in circles] + [-r for r, _ in circles]
    xlo = min(xs + extra + [0.0]) if xs else -1.0
    xhi = max(xs + extra + [1.0]) if xs else 1.0
    ylo = min(ys + [-r for r, _ in circles] + [0.0]) if ys else -1.0
    yhi = max(ys + [r for r, _ in circles] + [0.0]) if ys else 1.0
    if yhi - ylo < 1e-9:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    if xhi - xlo < 1e-9:
        xlo, xhi = xlo - 1.0, xhi + 1.0
    mx, my = 0.05 * (xhi - xlo), 0.05 * (yhi - ylo)
    xlo, xhi, ylo, yhi = xlo - mx, xhi + mx, ylo - my, yhi + my

    def sx(x):
        return PAD + (x - xlo) / (xhi - xlo) * (W - 2 * PAD)

    def sy(y):
        return H - PAD - (y - ylo) / (yhi - ylo) * (H - 2 * PAD)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect width="{W}" height="{H}" fill="white"/>']
    out.append(f'<text x="{W / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    # axes through the origin when visible, else along the frame
    ax_y = sy(0.0) if ylo <= 0 <= yhi else H - PAD
    ax_x = sx(0.0) if xlo <= 0 <= xhi else PAD
    out.append(f'<line x1="{PAD}" y1="{_fmt(ax_y)}" x2="{W - PAD}" y2="{_fmt(ax_y)}" stroke="black"/>')
    out.append(f'<line x1="{_fmt(ax_x)}" y1="{PAD}" x2="{_fmt(ax_x)}" y2="{H - PAD}" stroke="black"/>')
    out.append(f'<text x="{W - PAD}" y="{H - 12}" text-anchor="end" font-size="11">{xlabel}</text>')
    out.append(f'<text x="12" y="{PAD - 8}" font-size="11">{ylabel}</text>')
    for v, label in vlines:
        out.append(f'<line x1="{_fmt(sx(v))}" y1="{PAD}" x2="{_fmt(sx(v))}" y2="{H - PAD}" '
                   f'stroke="red" stroke-dasharray="4,3"/>')
        out.append(f'<text x="{_fmt(sx(v) + 3)}" y="{PAD + 12}" font-size="10" fill="red">{label}</text>')
    for r, label in circles:
        rx = sx(r) - sx(0.0)
        ry = sy(0.0) - sy(r)
        out.append(f'<ellipse cx="{_fmt(sx(0.0))}" cy="{_fmt(sy(0.0))}" rx="{_fmt(rx)}" ry="{_fmt(ry)}" '
                   f'fill="none" stroke="blue" stroke-dasharray="4,3"/>')
        out.append(f'<text x="{_fmt(sx(0.0) + rx + 3)}" y="{_fmt(sy(0.0))}" font-size="10" fill="blue">{label}</text>')
    hl = list(highlight) if highlight is not None else [False] * len(xs)
    for x, y, h in zip(xs, ys, hl):
        colour = "crimson" if h else "black"
        out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="{3 if h else 1.5}" fill="{colour}"/>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    Path(path).write_text(text)
    return text
