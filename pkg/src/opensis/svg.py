"""Minimal SVG line charts: stacked panels of polylines with auto-scaled axes."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#e6b800", "#2ca02c", "#9467bd")
DASHES = {"solid": "", "dashed": "6,4", "dashdot": "8,3,2,3", "dotted": "2,3"}

WIDTH = 720
PANEL_HEIGHT = 220
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 20, 30, 40


def _ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    return np.arange(np.ceil(lo / step) * step, hi + 1e-9 * step, step)


def _panel(panel: dict, top: float) -> list[str]:
    series = panel["series"]
    xs = np.concatenate([np.asarray(s["x"], float) for s in series])
    ys = np.concatenate([np.asarray(s["y"], float) for s in series])
    ys = ys[np.isfinite(ys)]
    x0, x1 = float(xs.min()), float(xs.max())
    y0 = float(min(ys.min(), 0.0)) if ys.size else 0.0
    y1 = float(ys.max()) * 1.05 if ys.size else 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    if x1 <= x0:
        x1 = x0 + 1.0
    pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    ph = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    left, base = MARGIN_LEFT, top + MARGIN_TOP

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return base + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<rect x="{left}" y="{base}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
           f'<text x="{left}" y="{base - 8}" font-size="13">{escape(panel.get("title", ""))}</text>']
    for tx in _ticks(x0, x1):
        out.append(f'<text x="{sx(tx):.1f}" y="{base + ph + 15}" font-size="10" text-anchor="middle">{tx:g}</text>')
    for ty in _ticks(y0, y1):
        out.append(f'<line x1="{left}" x2="{left + pw}" y1="{sy(ty):.1f}" y2="{sy(ty):.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 5}" y="{sy(ty) + 3:.1f}" font-size="10" text-anchor="end">{ty:.3g}</text>')
    if panel.get("xlabel"):
        out.append(f'<text x="{left + pw / 2}" y="{base + ph + 32}" font-size="11" '
                   f'text-anchor="middle">{escape(panel["xlabel"])}</text>')
    if panel.get("ylabel"):
        out.append(f'<text x="15" y="{base + ph / 2}" font-size="11" text-anchor="middle" '
                   f'transform="rotate(-90 15 {base + ph / 2})">{escape(panel["ylabel"])}</text>')
    for i, s in enumerate(series):
        color = s.get("color", PALETTE[i % len(PALETTE)])
        dash = DASHES[s.get("style", "solid")]
        x = np.asarray(s["x"], float)
        y = np.asarray(s["y"], float)
        ok = np.isfinite(y)
        if not ok.any():
            continue
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x[ok], y[ok]))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"{dash_attr}/>')
        ly = base + 12 + 14 * i
        out.append(f'<line x1="{left + pw - 150}" x2="{left + pw - 125}" y1="{ly}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"{dash_attr}/>')
        out.append(f'<text x="{left + pw - 120}" y="{ly + 4}" font-size="11">{escape(s.get("label", ""))}</text>')
    return out


def write_chart(path, panels: list[dict]) -> None:
    """Write stacked panels to ``path``.

    Each panel is a dict with ``title``, optional ``xlabel``/``ylabel`` and
    ``series``: dicts holding ``x``, ``y``, ``label``, and optionally
    ``style`` (solid, dashed, dashdot, dotted) and ``color``.
    """
    height = PANEL_HEIGHT * len(panels)
    body = []
    for i, panel in enumerate(panels):
        body += _panel(panel, i * PANEL_HEIGHT)
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
           f'font-family="sans-serif">\n<rect width="100%" height="100%" fill="white"/>\n'
           + "\n".join(body) + "\n</svg>\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
