"""Closed curves in the time-frequency plane.

Every contour is parametrized by ``t`` in ``[0, 1)`` counterclockwise, which
is what the argument-principle code in :mod:`tfzeros.zeros` relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .signals import ChirpPair, LinearChirp, chirp_frame


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float
    discretization: int = 256

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "center", complex(self.center))

    @property
    def length(self) -> float:
        return 2.0 * math.pi * self.radius

    def point(self, t):
        return self.center + self.radius * np.exp(2j * np.pi * np.asarray(t, dtype=float))

    def sample(self, n: int | None = None):
        n = n or self.discretization
        return self.point(np.arange(n) / n)

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius

    def max_modulus(self) -> float:
        return abs(self.center) + self.radius

    def conjugate(self) -> "Circle":
        return Circle(self.center.conjugate(), self.radius, self.discretization)


@dataclass(frozen=True)
class Polygon:
    """Closed polyline through ``vertices``; stored counterclockwise."""

    vertices: tuple
    discretization: int = 256
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex).ravel()
        if len(v) >= 3:
            x, y = v.real, v.imag
            area2 = np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
            if area2 < 0:
                v = v[::-1]
        object.__setattr__(self, "vertices", tuple(complex(c) for c in v))
        seg = np.abs(np.roll(v, -1) - v) if len(v) > 1 else np.zeros(1)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(seg)]))

    @property
    def length(self) -> float:
        return float(self._cum[-1])

    def point(self, t):
        v = np.asarray(self.vertices)
        t = np.asarray(t, dtype=float)
        if self.length == 0:
            return np.full(t.shape, v[0], dtype=complex)
        s = np.mod(t, 1.0) * self.length
        i = np.clip(np.searchsorted(self._cum, s, side="right") - 1, 0, len(v) - 1)
        seglen = self._cum[i + 1] - self._cum[i]
        frac = np.where(seglen > 0, (s - self._cum[i]) / np.where(seglen > 0, seglen, 1.0), 0.0)
        return v[i] + frac * (np.roll(v, -1)[i] - v[i])

    def sample(self, n: int | None = None):
        """``n`` points spread by arc length, always including every vertex."""
        n = n or self.discretization
        v = np.asarray(self.vertices)
        if self.length == 0:
            return np.full(n, v[0], dtype=complex)
        seg = np.diff(self._cum)
        counts = np.maximum(1, np.round(n * seg / self.length).astype(int))
        out = []
        for j, c in enumerate(counts):
            a, b = v[j], v[(j + 1) % len(v)]
            out.append(a + (b - a) * np.arange(c) / c)
        return np.concatenate(out)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        v = np.asarray(self.vertices)
        x, y = z.real[..., None], z.imag[..., None]
        x0, y0 = v.real, v.imag
        x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside = np.sum(crosses & (x < xint), axis=-1) % 2 == 1
        return inside

    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.vertices)))

    def conjugate(self) -> "Polygon":
        return Polygon(tuple(np.conj(self.vertices)), self.discretization)


def rectangle(x0: float, y0: float, x1: float, y1: float, discretization: int = 256) -> Polygon:
    return Polygon((complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)), discretization)


def _rs_box(frame, r0, r1, s0, s1, discretization):
    corners = [(r0, s0), (r1, s0), (r1, s1), (r0, s1)]
    pts = [complex(frame.from_rs_complex(r, s)) for r, s in corners]
    return Polygon(tuple(pts), discretization)


def rectangle_cn(pair: ChirpPair, N: int, discretization: int = 256) -> Polygon:
    """``C_N``: the cell ``(r, s) in [0, a] x [N/a, (N+1)/a]`` between two parallel chirps."""
    frame = chirp_frame(pair)
    a = frame.a
    return _rs_box(frame, 0.0, a, N / a, (N + 1) / a, discretization)


def chirp_strip(chirp: LinearChirp, R: float, s0: float = -0.5, length: float = 1.0,
                discretization: int = 256) -> Polygon:
    """Rectangle resting on the chirp axis: ``r in [0, R]``, ``s in [s0, s0 + length]``."""
    frame = chirp_frame(chirp)
    return _rs_box(frame, 0.0, R, s0, s0 + length, discretization)


Contour = Circle | Polygon
