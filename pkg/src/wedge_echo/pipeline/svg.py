"""Deterministic SVG plots, no external renderer.

Input tables are dicts of equal-length column lists; a style object
names which columns become which series.  Output is byte-stable for
identical input (fixed float formatting, no timestamps).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from ..errors import ConfigurationError

_COLORS = ("#1f5fa8", "#c23b22", "#2e8540", "#7748a8", "#b8860b", "#00747a",
           "#8b3a62", "#556b2f", "#444444", "#996633")


@dataclass
class Series:
    x: str  # column name
    y: str
    kind: str = "line"  # line | scatter | dashed
    label: str = ""


@dataclass
class PlotStyle:
    series: List[Series]
    x_label: str = ""
    y_label: str = ""
    title: str = ""
    width: int = 640
    height: int = 440
    log_x: bool = False


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def emit_plot(table: Dict[str, Sequence[float]], style: PlotStyle) -> str:
    """Render the table to an SVG string.

    Missing columns raise a ConfigurationError naming the offender.
    An empty table still yields a valid SVG with axes.
    """
    for s in style.series:
        for col in (s.x, s.y):
            if col not in table:
                raise ConfigurationError(f"plot column {col!r} missing from data")

    import math

    xs_all: List[float] = []
    ys_all: List[float] = []
    for s in style.series:
        xv = [float(v) for v in table[s.x]]
        if style.log_x:
            xv = [math.log10(v) for v in xv if v > 0]
        xs_all.extend(xv)
        ys_all.extend(float(v) for v in table[s.y])
    if xs_all:
        x_lo, x_hi = min(xs_all), max(xs_all)
        y_lo, y_hi = min(ys_all), max(ys_all)
        if x_hi == x_lo:
            x_hi = x_lo + 1.0
        if y_hi == y_lo:
            y_hi = y_lo + 1.0
        pad = 0.05 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0

    w, h = style.width, style.height
    ml, mr, mt, mb = 64, 16, 28, 48
    pw, ph = w - ml - mr, h - mt - mb

    def px(x):
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return mt + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="black" stroke-width="1"/>',
    ]
    if style.title:
        out.append(
            f'<text x="{w // 2}" y="18" text-anchor="middle" '
            f'font-size="13">{style.title}</text>'
        )
    for tx in _ticks(x_lo, x_hi):
        out.append(
            f'<line x1="{_fmt(px(tx))}" y1="{mt + ph}" x2="{_fmt(px(tx))}" '
            f'y2="{mt + ph + 5}" stroke="black"/>'
        )
        lbl = f"1e{_fmt(tx)}" if style.log_x else _fmt(tx)
        out.append(
            f'<text x="{_fmt(px(tx))}" y="{mt + ph + 18}" text-anchor="middle" '
            f'font-size="10">{lbl}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        out.append(
            f'<line x1="{ml - 5}" y1="{_fmt(py(ty))}" x2="{ml}" '
            f'y2="{_fmt(py(ty))}" stroke="black"/>'
        )
        out.append(
            f'<text x="{ml - 8}" y="{_fmt(py(ty) + 3)}" text-anchor="end" '
            f'font-size="10">{_fmt(ty)}</text>'
        )
    if style.x_label:
        out.append(
            f'<text x="{ml + pw // 2}" y="{h - 10}" text-anchor="middle" '
            f'font-size="12">{style.x_label}</text>'
        )
    if style.y_label:
        out.append(
            f'<text x="16" y="{mt + ph // 2}" text-anchor="middle" '
            f'font-size="12" transform="rotate(-90 16 {mt + ph // 2})">'
            f"{style.y_label}</text>"
        )

    import math as _m

    legend_y = mt + 14
    for i, s in enumerate(style.series):
        color = _COLORS[i % len(_COLORS)]
        xv = [float(v) for v in table[s.x]]
        yv = [float(v) for v in table[s.y]]
        pts = []
        for xx, yy in zip(xv, yv):
            if style.log_x:
                if xx <= 0:
                    continue
                xx = _m.log10(xx)
            pts.append((px(xx), py(yy)))
        if s.kind in ("line", "dashed") and len(pts) >= 2:
            d = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
            dash = ' stroke-dasharray="6,4"' if s.kind == "dashed" else ""
            out.append(
                f'<polyline points="{d}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"{dash}/>'
            )
        else:
            for a, b in pts:
                out.append(
                    f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="2.2" '
                    f'fill="{color}"/>'
                )
        if s.label:
            out.append(
                f'<line x1="{ml + pw - 150}" y1="{legend_y}" '
                f'x2="{ml + pw - 126}" y2="{legend_y}" stroke="{color}" '
                f'stroke-width="2"/>'
            )
            out.append(
                f'<text x="{ml + pw - 120}" y="{legend_y + 4}" '
                f'font-size="10">{s.label}</text>'
            )
            legend_y += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"
