"""Minimal static SVG figures: line plots and heat maps, no plotting dependency."""

from __future__ import annotations

import os
from xml.sax.saxutils import escape

import numpy as np

_W, _H = 480, 360
_LEFT, _RIGHT, _TOP, _BOTTOM = 60, 20, 30, 45
_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 5):
    return np.linspace(lo, hi, n)


def _frame(title: str, xlabel: str, ylabel: str, xr, yr) -> list[str]:
    x0, x1 = xr
    y0, y1 = yr
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        px = _LEFT + (t - x0) / (x1 - x0) * pw
        out.append(f'<line x1="{px:.2f}" y1="{_TOP + ph}" x2="{px:.2f}" y2="{_TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{_TOP + ph + 16}" text-anchor="middle" font-size="10">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        py = _TOP + ph - (t - y0) / (y1 - y0) * ph
        out.append(f'<line x1="{_LEFT - 4}" y1="{py:.2f}" x2="{_LEFT}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 6}" y="{py + 3:.2f}" text-anchor="end" font-size="10">{t:.3g}</text>')
    out.append(f'<text x="{_LEFT + pw / 2}" y="{_H - 8}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    out.append(
        f'<text x="14" y="{_TOP + ph / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {_TOP + ph / 2})">{escape(ylabel)}</text>'
    )
    return out


def _range(values) -> tuple[float, float]:
    lo, hi = float(np.nanmin(values)), float(np.nanmax(values))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def line_plot(series, title: str = "", xlabel: str = "", ylabel: str = "",
              xrange=None, yrange=None) -> str:
    """``series`` is a list of ``(label, x, y)``; returns the SVG document."""
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    xr = xrange or _range(xs)
    yr = yrange or _range(ys)
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM
    out = _frame(title, xlabel, ylabel, xr, yr)
    for k, (label, x, y) in enumerate(series):
        x, y = np.asarray(x, float), np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        px = _LEFT + (x[ok] - xr[0]) / (xr[1] - xr[0]) * pw
        py = _TOP + ph - (y[ok] - yr[0]) / (yr[1] - yr[0]) * ph
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        colour = _COLOURS[k % len(_COLOURS)]
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        ly = _TOP + 14 + 14 * k
        out.append(f'<text x="{_LEFT + pw - 6}" y="{ly}" text-anchor="end" font-size="11" fill="{colour}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heat_map(values, x, y, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """Heat map of ``values[i, j]`` at ``(x[i], y[j])`` on a white-to-blue scale."""
    values = np.asarray(values, float)
    x, y = np.asarray(x, float), np.asarray(y, float)
    xr, yr = (x[0], x[-1]), (y[0], y[-1])
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM
    lo, hi = _range(values)
    out = _frame(title, xlabel, ylabel, xr, yr)
    cw, chh = pw / len(x), ph / len(y)
    for i in range(len(x)):
        for j in range(len(y)):
            t = (values[i, j] - lo) / (hi - lo)
            shade = int(round(255 * (1 - t)))
            px = _LEFT + i * cw
            py = _TOP + ph - (j + 1) * chh
            out.append(
                f'<rect x="{px:.2f}" y="{py:.2f}" width="{cw + 0.3:.2f}" height="{chh + 0.3:.2f}" '
                f'fill="rgb({shade},{shade},255)"/>'
            )
    out.append(f'<text x="{_W - _RIGHT}" y="{_TOP - 6}" text-anchor="end" font-size="10">'
               f'range [{lo:.3g}, {hi:.3g}]</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, document: str) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(document)
