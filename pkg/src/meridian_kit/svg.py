"""Deterministic SVG 1.1 figures: domain components, curves, legend, heatmap."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .domain import Cap, Disk, Domain, Point, Polygon

SIZE = 640
LEGEND_ROW = 18
PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f")
# viridis anchors, interpolated linearly
_RAMP = np.array([[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]], float)


def _num(x: float) -> str:
    return f"{x:.4f}".rstrip("0").rstrip(".") if abs(x) >= 1e-4 else "0"


class _Frame:
    """Maps the square ``[-R, R]^2`` to pixel coordinates with y pointing up."""

    def __init__(self, radius: float):
        self.R = radius
        self.s = SIZE / (2 * radius)

    def x(self, z):
        return (np.real(z) + self.R) * self.s

    def y(self, z):
        return (self.R - np.imag(z)) * self.s

    def pts(self, zs) -> str:
        return " ".join(f"{_num(a)},{_num(b)}" for a, b in zip(self.x(zs), self.y(zs)))


def _window(domain: Domain, curves) -> float:
    if domain.cap is not None:
        return 1.05 * domain.cap.radius
    ext = [c.extent for c in domain.components]
    ext += [float(np.max(np.abs(c.vertices))) for _, c, _ in curves]
    return 1.1 * max(ext + [1.0])


def _component(fr: _Frame, comp) -> str:
    fill = 'fill="#c8c8c8" stroke="#505050" stroke-width="1"'
    if isinstance(comp, Disk):
        return (f'<circle cx="{_num(fr.x(comp.center))}" cy="{_num(fr.y(comp.center))}" '
                f'r="{_num(comp.radius * fr.s)}" {fill}/>')
    if isinstance(comp, Point):
        return (f'<circle cx="{_num(fr.x(comp.location))}" cy="{_num(fr.y(comp.location))}" '
                f'r="3" fill="#000000"/>')
    if isinstance(comp, Polygon):
        return f'<polygon points="{fr.pts(np.asarray(comp.vertices, complex))}" {fill}/>'
    if isinstance(comp, Cap):
        c, r = fr.x(0j), comp.radius * fr.s
        d = (f"M0,0 H{SIZE} V{SIZE} H0 Z "
             f"M{_num(c - r)},{_num(c)} a{_num(r)},{_num(r)} 0 1,0 {_num(2 * r)},0 "
             f"a{_num(r)},{_num(r)} 0 1,0 {_num(-2 * r)},0 Z")
        return f'<path d="{d}" fill-rule="evenodd" {fill}/>'
    raise TypeError(f"unknown component {comp!r}")


def _color(t: np.ndarray) -> list:
    t = np.clip(t, 0.0, 1.0) * (len(_RAMP) - 1)
    k = np.minimum(t.astype(int), len(_RAMP) - 2)
    f = (t - k)[..., None]
    rgb = np.rint(_RAMP[k] * (1 - f) + _RAMP[k + 1] * f).astype(int)
    return [f"#{r:02x}{g:02x}{b:02x}" for r, g, b in rgb.reshape(-1, 3)]


def _heatmap(fr: _Frame, coords: np.ndarray, values: np.ndarray, cells: int = 96) -> list:
    """Nearest-node rendering of ``values`` on a ``cells x cells`` raster."""
    n = len(coords)
    step = max(1, int(np.ceil(n / cells)))
    idx = np.arange(0, n, step)
    sub = values[np.ix_(idx, idx)]
    ok = np.isfinite(sub)
    if not ok.any():
        return []
    lo, hi = float(sub[ok].min()), float(sub[ok].max())
    cols = _color((sub - lo) / (hi - lo if hi > lo else 1.0))
    w = step * (coords[1] - coords[0]) * fr.s
    out = []
    for (i, j), col in zip(np.ndindex(sub.shape), cols):
        if not ok[i, j]:
            continue
        z = complex(coords[idx[j]], coords[idx[i]])
        out.append(f'<rect x="{_num(fr.x(z) - w / 2)}" y="{_num(fr.y(z) - w / 2)}" '
                   f'width="{_num(w)}" height="{_num(w)}" fill="{col}"/>')
    out.append(f'<text x="8" y="{SIZE - 8}" font-size="12" fill="#000000">'
               f'log density {_num(lo)} .. {_num(hi)}</text>')
    return out


def render(domain: Domain, curves=(), title: str = "", heatmap=None) -> str:
    """SVG text for ``domain`` with ``curves`` given as ``(label, PolyCurve, length)``.

    ``heatmap`` is an optional ``(coords, values)`` pair of a square grid
    (row index along y), drawn under the components.
    """
    curves = list(curves)
    fr = _Frame(_window(domain, curves))
    height = SIZE + LEGEND_ROW * (len(curves) + 1) + 8
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" '
           f'height="{height}" viewBox="0 0 {SIZE} {height}">',
           f'<rect x="0" y="0" width="{SIZE}" height="{height}" fill="#ffffff"/>']
    if heatmap is not None:
        out += _heatmap(fr, *heatmap)
    out += [_component(fr, c) for c in domain.components]
    for k, (label, curve, length) in enumerate(curves):
        col = PALETTE[k % len(PALETTE)]
        out.append(f'<polygon points="{fr.pts(curve.vertices)}" fill="none" stroke="{col}" '
                   f'stroke-width="1.5"/>')
    y = SIZE + LEGEND_ROW
    out.append(f'<text x="8" y="{y}" font-size="13" fill="#000000">{escape(title)}</text>')
    for k, (label, curve, length) in enumerate(curves):
        y += LEGEND_ROW
        col = PALETTE[k % len(PALETTE)]
        out.append(f'<rect x="8" y="{y - 10}" width="14" height="4" fill="{col}"/>')
        out.append(f'<text x="28" y="{y}" font-size="12" fill="#000000">'
                   f'{escape(label)}: length {length:.6f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write(path, domain: Domain, curves=(), title: str = "", heatmap=None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render(domain, curves, title, heatmap))
