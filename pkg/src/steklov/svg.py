"""Dependency-free SVG line plots of eigenvalue branches."""

import math

import numpy as np

WIDTH, HEIGHT = 800, 600
MARGIN = {"left": 80, "right": 30, "top": 30, "bottom": 60}
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _fmt(x):
    return f"{x:.2f}"


def _label(x):
    s = f"{x:.4g}"
    return "0" if s == "-0" else s


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    out, v = [], start
    while v <= hi + 1e-9 * step:
        out.append(round(v / step) * step)
        v += step
    return out


def render_plot_svg(branches, tangents=None, path=None, columns=None, title=""):
    """Polyline per branch plus optional dashed tangent lines through t = 0.

    ``branches`` is a BranchData (or a ``(t, values)`` pair with values of
    shape (len(t), p)); ``columns`` restricts the plotted branches.
    ``tangents`` is a list of (value_at_zero, slope) pairs. Returns the SVG
    text and writes it when ``path`` is given.
    """
    t, Y = (branches.t, branches.values) if hasattr(branches, "values") else branches
    t = np.asarray(t, float)
    Y = np.asarray(Y, float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if columns is not None:
        Y = Y[:, list(columns)]
    if Y.shape[1] < 1 or Y.shape[0] != t.size:
        raise ValueError("need at least one branch sampled on the t grid")
    tangents = list(tangents or [])

    x0, x1 = float(t.min()), float(t.max())
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    ys = [Y.min(), Y.max()]
    for v, s in tangents:
        ys += [v + s * x0, v + s * x1]
    y0, y1 = float(min(ys)), float(max(ys))
    pad = 0.05 * (y1 - y0) if y1 > y0 else max(1.0, abs(y0)) * 0.05
    y0, y1 = y0 - pad, y1 + pad

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def X(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def Yp(v):
        return MARGIN["top"] + (y1 - v) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<defs><clipPath id="plot"><rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" '
        f'width="{pw}" height="{ph}"/></clipPath></defs>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    for v in _ticks(x0, x1):
        px = _fmt(X(v))
        bottom = MARGIN["top"] + ph
        out.append(f'<line x1="{px}" y1="{bottom}" x2="{px}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{px}" y="{bottom + 20}" font-family="sans-serif" font-size="12" '
                   f'text-anchor="middle">{_label(v)}</text>')
    for v in _ticks(y0, y1):
        py = _fmt(Yp(v))
        left = MARGIN["left"]
        out.append(f'<line x1="{left - 5}" y1="{py}" x2="{left}" y2="{py}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py}" font-family="sans-serif" font-size="12" '
                   f'text-anchor="end" dominant-baseline="middle">{_label(v)}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="{HEIGHT - 15}" font-family="sans-serif" '
               'font-size="14" text-anchor="middle">t</text>')
    if title:
        out.append(f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="20" font-family="sans-serif" '
                   f'font-size="14" text-anchor="middle">{_escape(title)}</text>')

    out.append('<g clip-path="url(#plot)">')
    for j in range(Y.shape[1]):
        pts = " ".join(f"{_fmt(X(a))},{_fmt(Yp(b))}" for a, b in zip(t, Y[:, j]))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{COLORS[j % len(COLORS)]}" '
                   'stroke-width="1.5"/>')
    for v, s in tangents:
        out.append(f'<line x1="{_fmt(X(x0))}" y1="{_fmt(Yp(v + s * x0))}" x2="{_fmt(X(x1))}" '
                   f'y2="{_fmt(Yp(v + s * x1))}" stroke="black" stroke-width="1" stroke-dasharray="4 3"/>')
    out.append("</g>")
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def _escape(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
