"""Closed polygonal curves, the common currency of every module."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class PolyCurve:
    """Closed polygonal chain; the last vertex connects back to the first."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=complex).ravel()
        if len(v) < 3:
            raise ValueError("a closed curve needs at least 3 vertices")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    @property
    def orientation(self) -> int:
        """Sign of the signed area (+1 counter-clockwise)."""
        v = self.vertices
        w = np.roll(v, -1)
        area = 0.5 * np.sum(v.real * w.imag - v.imag * w.real)
        return int(np.sign(area))

    def segments(self):
        return self.vertices, np.roll(self.vertices, -1)

    def euclidean_length(self) -> float:
        a, b = self.segments()
        return float(np.abs(b - a).sum())

    def diameter(self) -> float:
        v = self.vertices
        if len(v) > 400:
            v = v[np.linspace(0, len(v) - 1, 400).astype(int)]
        return float(np.abs(v[:, None] - v[None, :]).max())

    def reversed(self) -> "PolyCurve":
        return PolyCurve(self.vertices[::-1])

    def shifted(self, k: int) -> "PolyCurve":
        return PolyCurve(np.roll(self.vertices, -k))

    def mapped(self, fn) -> "PolyCurve":
        return PolyCurve(fn(self.vertices))

    def refined(self, factor: int = 2) -> "PolyCurve":
        """Insert ``factor - 1`` equally spaced points on every segment."""
        a, b = self.segments()
        t = np.arange(factor) / factor
        return PolyCurve((a[:, None] + t[None, :] * (b - a)[:, None]).ravel())

    def without_repeats(self) -> "PolyCurve":
        v = self.vertices
        keep = v != np.roll(v, -1)
        return PolyCurve(v[keep])

    def to_json(self) -> dict:
        return {"vertices": [[float(z.real), float(z.imag)] for z in self.vertices], "closed": True}

    @classmethod
    def from_json(cls, data: dict) -> "PolyCurve":
        if not data.get("closed", True):
            raise ValueError("only closed curves are supported")
        return cls(np.array([complex(x, y) for x, y in data["vertices"]]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def circle(center: complex, radius: float, n: int = 64, start: float = 0.0,
           clockwise: bool = False) -> PolyCurve:
    """Regular ``n``-gon inscribed in the circle ``|z - center| = radius``."""
    sign = -1 if clockwise else 1
    ang = start + sign * 2 * np.pi * np.arange(n) / n
    return PolyCurve(center + radius * np.exp(1j * ang))


def resample_uniform(vertices: np.ndarray, count: int, weights: np.ndarray | None = None) -> np.ndarray:
    """Place ``count`` points on the closed polygon at equal cumulative weight.

    ``weights`` gives the cost of each segment (defaults to Euclidean length);
    the first output point is the first input vertex.
    """
    v = np.asarray(vertices, complex)
    seg = np.roll(v, -1) - v
    w = np.abs(seg) if weights is None else np.asarray(weights, float)
    cum = np.concatenate([[0.0], np.cumsum(w)])
    total = cum[-1]
    if total <= 0:
        return np.repeat(v[:1], count)
    targets = np.arange(count) * total / count
    k = np.searchsorted(cum, targets, side="right") - 1
    k = np.clip(k, 0, len(v) - 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(w[k] > 0, (targets - cum[k]) / np.where(w[k] > 0, w[k], 1.0), 0.0)
    return v[k] + frac * seg[k]


def aligned_distance(c1: PolyCurve, c2: PolyCurve, samples: int = 512,
                     allow_reversal: bool = True) -> float:
    """Max pointwise distance after arc-length resampling and best cyclic shift.

    A discrete Fréchet-style proximity used for deduplicating geodesics.
    """
    p = resample_uniform(c1.vertices, samples)
    q = resample_uniform(c2.vertices, samples)
    best = np.inf
    cands = [q, q[::-1]] if allow_reversal else [q]
    idx = (np.arange(samples)[:, None] + np.arange(samples)[None, :]) % samples
    for qq in cands:
        d = np.abs(p[None, :] - qq[idx])  # row k: shift by k
        best = min(best, float(d.max(axis=1).min()))
    # shift granularity adds at most half a sample spacing
    return best
