"""Minimal SVG line charts for sweep summaries (no plotting dependency)."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

COLORS = {
    "do-finetti": "#d62728",
    "iid": "#1f77b4",
    "do-finetti-true-dag": "#ff9896",
    "iid-true-dag": "#aec7e8",
}

PANEL_W, PANEL_H, MARGIN = 360, 260, 55


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def _panel(rows, key, band_key, x0, title, y_range=None) -> list[str]:
    envs = sorted({r["n_envs"] for r in rows})
    lx = [math.log10(e) for e in envs]
    xmin, xmax = min(lx), max(lx)
    if xmax == xmin:
        xmax = xmin + 1
    vals = []
    for r in rows:
        v = r[key]
        s = r.get(band_key, 0.0) if band_key else 0.0
        if not math.isnan(v):
            vals += [v - (s or 0), v + (s or 0)]
    ymin, ymax = y_range or (min(0.0, min(vals, default=0)), max(vals, default=1) or 1.0)
    if ymax == ymin:
        ymax = ymin + 1

    def px(e):
        return x0 + MARGIN + (math.log10(e) - xmin) / (xmax - xmin) * (PANEL_W - 2 * MARGIN)

    def py(v):
        v = min(max(v, ymin), ymax)
        return MARGIN + (1 - (v - ymin) / (ymax - ymin)) * (PANEL_H - 2 * MARGIN)

    out = [
        f'<text x="{x0 + PANEL_W / 2}" y="25" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{px(envs[0])}" y1="{py(ymin)}" x2="{px(envs[-1])}" y2="{py(ymin)}" stroke="black"/>',
        f'<line x1="{px(envs[0])}" y1="{py(ymin)}" x2="{px(envs[0])}" y2="{py(ymax)}" stroke="black"/>',
    ]
    for e in envs:
        out.append(f'<text x="{px(e):.1f}" y="{py(ymin) + 15:.1f}" text-anchor="middle" font-size="9">{e}</text>')
    for k in range(5):
        v = ymin + k * (ymax - ymin) / 4
        out.append(f'<text x="{px(envs[0]) - 5:.1f}" y="{py(v) + 3:.1f}" text-anchor="end" font-size="9">{_fmt(v)}</text>')
    out.append(f'<text x="{x0 + PANEL_W / 2}" y="{PANEL_H - 10}" text-anchor="middle" font-size="11">environments</text>')

    for method in dict.fromkeys(r["method"] for r in rows):
        pts = sorted((r["n_envs"], r[key], r.get(band_key, 0.0) if band_key else 0.0)
                     for r in rows if r["method"] == method and not math.isnan(r[key]))
        if not pts:
            continue
        color = COLORS.get(method, "gray")
        if band_key:
            upper = [f"{px(e):.1f},{py(v + s):.1f}" for e, v, s in pts]
            lower = [f"{px(e):.1f},{py(v - s):.1f}" for e, v, s in reversed(pts)]
            out.append(f'<polygon points="{" ".join(upper + lower)}" fill="{color}" fill-opacity="0.15" stroke="none"/>')
        line = " ".join(f"{px(e):.1f},{py(v):.1f}" for e, v, _ in pts)
        out.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="2"/>')
    return out


def sweep_svg(rows: Sequence[dict]) -> str:
    """Two panels: MSE mean with a one-std band, and DAG accuracy, both against environment count."""
    width = 2 * PANEL_W + 160
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" font-family="sans-serif">']
    if rows:
        parts += _panel(rows, "mse_mean", "mse_std", 0, "MSE vs analytic")
        parts += _panel(rows, "dag_accuracy", None, PANEL_W, "DAG accuracy", (0.0, 1.0))
        for k, method in enumerate(dict.fromkeys(r["method"] for r in rows)):
            y = MARGIN + 18 * k
            parts.append(f'<rect x="{2 * PANEL_W + 5}" y="{y - 8}" width="12" height="4" fill="{COLORS.get(method, "gray")}"/>')
            parts.append(f'<text x="{2 * PANEL_W + 22}" y="{y - 3}" font-size="10">{escape(method)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
