"""A very small standalone-SVG line/scatter plotter.

Output depends only on the data passed in (fixed number formatting, no
timestamps), so figures are byte-reproducible.
"""
from __future__ import annotations

from html import escape

import numpy as np

__all__ = ["Figure"]


def _nice_ticks(lo, hi, n=5):
    if not np.isfinite(lo) or not np.isfinite(hi) or hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + 0.5 * step, step)


def _fmt(v):
    return f"{v:.2f}"


class Figure:
    """Accumulates series, then renders them with :meth:`to_svg`."""

    def __init__(self, title="", xlabel="", ylabel="", width=640, height=480,
                 equal_aspect=False):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.width, self.height = width, height
        self.equal_aspect = equal_aspect
        self._items = []

    def line(self, x, y, color="#1f77b4", label=None, width=1.5, dash=None, closed=False):
        self._items.append(("line", np.asarray(x, float), np.asarray(y, float),
                            dict(color=color, label=label, width=width, dash=dash,
                                 closed=closed)))
        return self

    def points(self, x, y, color="#d62728", label=None, radius=2.5):
        self._items.append(("points", np.asarray(x, float), np.asarray(y, float),
                            dict(color=color, label=label, radius=radius)))
        return self

    def region(self, outer_x, outer_y, inner_x=None, inner_y=None, color="#1f77b4",
               opacity=0.25, label=None):
        """Filled polygon; with an inner ring the area between the two is filled."""
        xs = [np.asarray(outer_x, float)]
        ys = [np.asarray(outer_y, float)]
        if inner_x is not None:
            xs.append(np.asarray(inner_x, float))
            ys.append(np.asarray(inner_y, float))
        self._items.append(("region", xs, ys, dict(color=color, opacity=opacity, label=label)))
        return self

    def _limits(self):
        xs, ys = [], []
        for kind, x, y, _ in self._items:
            if kind == "region":
                xs.extend(x)
                ys.extend(y)
            else:
                xs.append(x)
                ys.append(y)
        x = np.concatenate([np.ravel(a) for a in xs])
        y = np.concatenate([np.ravel(a) for a in ys])
        x, y = x[np.isfinite(x)], y[np.isfinite(y)]
        x0, x1 = (x.min(), x.max()) if x.size else (0.0, 1.0)
        y0, y1 = (y.min(), y.max()) if y.size else (0.0, 1.0)
        if x1 == x0:
            x0, x1 = x0 - 1, x1 + 1
        if y1 == y0:
            y0, y1 = y0 - 1, y1 + 1
        px, py = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
        return x0 - px, x1 + px, y0 - py, y1 + py

    def to_svg(self) -> str:
        W, H = self.width, self.height
        left, right, top, bottom = 70, 20, 40, 55
        pw, ph = W - left - right, H - top - bottom
        x0, x1, y0, y1 = self._limits()
        if self.equal_aspect:
            sx, sy = pw / (x1 - x0), ph / (y1 - y0)
            s = min(sx, sy)
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            x0, x1 = cx - 0.5 * pw / s, cx + 0.5 * pw / s
            y0, y1 = cy - 0.5 * ph / s, cy + 0.5 * ph / s

        def X(v):
            return left + (np.asarray(v) - x0) / (x1 - x0) * pw

        def Y(v):
            return top + (y1 - np.asarray(v)) / (y1 - y0) * ph

        def path(xv, yv, close=False):
            ok = np.isfinite(xv) & np.isfinite(yv)
            pts = [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(X(xv[ok]), Y(yv[ok]))]
            if not pts:
                return ""
            return "M" + " L".join(pts) + (" Z" if close else "")

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
               f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
               f'<rect width="{W}" height="{H}" fill="white"/>',
               f'<defs><clipPath id="plot"><rect x="{left}" y="{top}" width="{pw}" '
               f'height="{ph}"/></clipPath></defs>']
        for t in _nice_ticks(x0, x1):
            xp = _fmt(X(t))
            out.append(f'<line x1="{xp}" y1="{top}" x2="{xp}" y2="{top + ph}" '
                       f'stroke="#e0e0e0"/>')
            out.append(f'<text x="{xp}" y="{top + ph + 16}" text-anchor="middle">'
                       f'{t:.4g}</text>')
        for t in _nice_ticks(y0, y1):
            yp = _fmt(Y(t))
            out.append(f'<line x1="{left}" y1="{yp}" x2="{left + pw}" y2="{yp}" '
                       f'stroke="#e0e0e0"/>')
            out.append(f'<text x="{left - 6}" y="{yp}" text-anchor="end" '
                       f'dominant-baseline="middle">{t:.4g}</text>')
        out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" '
                   f'stroke="black"/>')
        out.append('<g clip-path="url(#plot)">')
        for kind, x, y, st in self._items:
            if kind == "region":
                d = " ".join(path(a, b, close=True) for a, b in zip(x, y))
                out.append(f'<path d="{d}" fill="{st["color"]}" fill-opacity="{st["opacity"]}" '
                           f'fill-rule="evenodd" stroke="none"/>')
            elif kind == "line":
                dash = f' stroke-dasharray="{st["dash"]}"' if st["dash"] else ""
                out.append(f'<path d="{path(x, y, st["closed"])}" fill="none" '
                           f'stroke="{st["color"]}" stroke-width="{st["width"]}"{dash}/>')
            else:
                for a, b in zip(X(x), Y(y)):
                    if np.isfinite(a) and np.isfinite(b):
                        out.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" '
                                   f'r="{st["radius"]}" fill="{st["color"]}"/>')
        out.append("</g>")
        ly = top + 14
        for kind, _, _, st in self._items:
            if not st.get("label"):
                continue
            out.append(f'<rect x="{left + pw - 150}" y="{ly - 8}" width="14" height="8" '
                       f'fill="{st["color"]}"/>')
            out.append(f'<text x="{left + pw - 130}" y="{ly}">{escape(st["label"])}</text>')
            ly += 16
        if self.title:
            out.append(f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">'
                       f'{escape(self.title)}</text>')
        if self.xlabel:
            out.append(f'<text x="{left + pw / 2}" y="{H - 12}" text-anchor="middle">'
                       f'{escape(self.xlabel)}</text>')
        if self.ylabel:
            out.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
                       f'transform="rotate(-90 16 {top + ph / 2})">{escape(self.ylabel)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
