"""Closed-form spectrograms, zero intensities and expected zero counts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .signals import (
    ChirpFrame,
    ChirpPair,
    Hermite,
    LinearChirp,
    SignalModel,
    chirp_frame,
    normalized_bargmann,
    normalized_bargmann_derivative,
    sigma_b,
    waveform,
)


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class TFPoint:
    tau: float
    omega: float

    @property
    def z(self) -> complex:
        return complex(self.tau, self.omega)


def as_complex(p):
    """Accept a TFPoint, a complex number/array, or a ``(tau, omega)`` pair."""
    if isinstance(p, TFPoint):
        return p.z
    if isinstance(p, tuple) and len(p) == 2:
        return complex(p[0], p[1])
    return np.asarray(p, dtype=complex)


def _scalar(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


# --- spectrograms ----------------------------------------------------------------


def _pair_spec_rs(r, s, a, sb, g1, g2):
    e1 = np.exp(-2.0 * np.pi * r * r)
    e2 = np.exp(-2.0 * np.pi * (r - a) ** 2)
    cross = np.exp(-np.pi * r * r - np.pi * (r - a) ** 2) * np.cos(2.0 * np.pi * a * s)
    return np.maximum(sb * (g1 * e1 + g2 * e2 + 2.0 * math.sqrt(g1 * g2) * cross), 0.0)


def _hermite_spec(k, gamma, z):
    x = np.pi * np.abs(z) ** 2
    if k == 0:
        return gamma * np.exp(-x)
    with np.errstate(divide="ignore"):
        return gamma * np.exp(k * np.log(x) - x - gammaln(k + 1))


def spectrogram(signal: SignalModel, p):
    """Closed-form spectrogram of the noiseless signal at TF point(s) ``p``."""
    z = as_complex(p)
    if isinstance(signal, Hermite):
        out = _hermite_spec(signal.k, signal.gamma, z)
    elif isinstance(signal, LinearChirp):
        r, _ = chirp_frame(signal).to_rs_complex(z)
        out = signal.gamma * sigma_b(signal.b) * np.exp(-2.0 * np.pi * r * r)
    elif isinstance(signal, ChirpPair):
        frame = chirp_frame(signal)
        r, s = frame.to_rs_complex(z)
        out = _pair_spec_rs(r, s, frame.a, frame.sigma_b, signal.gamma1, signal.gamma2)
    else:
        raise TypeError(f"unknown signal model {signal!r}")
    return _scalar(np.asarray(out, dtype=float))


def spectrogram_via_bargmann(signal: SignalModel, p):
    """``exp(-pi|z|^2) |B(x)(conj z)|^2``, the Bargmann-side route."""
    z = as_complex(p)
    return _scalar(np.abs(normalized_bargmann(signal, np.conj(z))) ** 2)


def stft_quadrature(signal: SignalModel, p, tol: float = 1e-10, half_width: float = 8.0) -> float:
    """Spectrogram by adaptive quadrature of the STFT integral (validation oracle).

    The window is negligible (``exp(-pi * 64)``) beyond ``half_width`` of ``tau``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = complex(as_complex(p))
    tau, omega = z.real, z.imag

    def integrand(t):
        win = 2.0**0.25 * math.exp(-math.pi * (t - tau) ** 2)
        return complex(waveform(signal, t)) * win * np.exp(-2j * np.pi * omega * t)

    parts = []
    for part in (np.real, np.imag):
        res = quad(
            lambda t: part(integrand(t)),
            tau - half_width,
            tau + half_width,
            epsabs=1e-3 * tol,
            epsrel=1e-3 * tol,
            limit=1000,
            full_output=1,
        )
        if len(res) > 3:
            raise QuadratureError(f"quadrature did not converge at z={z}: {res[3]}")
        parts.append(res[0])
    val = complex(parts[0], parts[1])
    return abs(val) ** 2


# --- intensities -----------------------------------------------------------------


def intensity_hermite(r, k: int, gamma: float):
    """Zero intensity for ``sqrt(gamma) h_k`` plus noise, as a function of ``r = pi |z|^2``."""
    r = np.asarray(r, dtype=float)
    lf = gammaln(k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(r)
        spec = np.exp(k * logr - r - lf) if k else np.exp(-r)
        # r^(k-1) (k-r)^2 collapses to r when k == 0
        if k == 0:
            grad = r * np.exp(-r)
        elif k == 1:
            grad = (1.0 - r) ** 2 * np.exp(-r)
        else:
            grad = (k - r) ** 2 * np.exp((k - 1) * logr - r - lf)
    return _scalar((1.0 + gamma * grad) * np.exp(-gamma * spec))


def intensity_chirp(r, b: float, gamma: float):
    r = np.asarray(r, dtype=float)
    sb = sigma_b(b)
    e = np.exp(-2.0 * np.pi * r * r)
    return _scalar((1.0 + 4.0 * np.pi * gamma * sb * r * r * e) * np.exp(-gamma * sb * e))


def intensity_chirp_pair(r, s, frame: ChirpFrame, gamma1: float, gamma2: float):
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    a, sb = frame.a, frame.sigma_b
    spec = _pair_spec_rs(r, s, a, sb, gamma1, gamma2)
    cross = np.exp(-np.pi * r * r - np.pi * (r - a) ** 2) * np.cos(2.0 * np.pi * a * s)
    grad = (
        gamma1 * r * r * np.exp(-2.0 * np.pi * r * r)
        + gamma2 * (r - a) ** 2 * np.exp(-2.0 * np.pi * (r - a) ** 2)
        + 2.0 * math.sqrt(gamma1 * gamma2) * r * (r - a) * cross
    )
    return _scalar(np.exp(-spec) * (1.0 + 4.0 * np.pi * sb * grad))


def intensity(signal: SignalModel, p):
    """Specialized closed-form intensity for one of the three signal families."""
    z = as_complex(p)
    if isinstance(signal, Hermite):
        return intensity_hermite(np.pi * np.abs(z) ** 2, signal.k, signal.gamma)
    frame = chirp_frame(signal)
    r, s = frame.to_rs_complex(z)
    if isinstance(signal, LinearChirp):
        return intensity_chirp(r, signal.b, signal.gamma)
    return intensity_chirp_pair(r, s, frame, signal.gamma1, signal.gamma2)


def intensity_general(spec: Callable, p, h: float = 1e-3):
    """Intensity from a spectrogram callback, Laplacian by the 5-point stencil.

    ``spec`` maps a complex array of TF points to spectrogram values.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    z = as_complex(p)
    s0 = np.asarray(spec(z), dtype=float)
    lap = (
        np.asarray(spec(z + h), dtype=float)
        + np.asarray(spec(z - h), dtype=float)
        + np.asarray(spec(z + 1j * h), dtype=float)
        + np.asarray(spec(z - 1j * h), dtype=float)
        - 4.0 * s0
    ) / (h * h)
    return _scalar((1.0 + s0 + lap / (4.0 * np.pi)) * np.exp(-s0))


def intensity_via_bargmann(signal: SignalModel, p):
    """Intensity from the Bargmann transform and its analytic derivative.

    Uses ``nabla' = d/dz - pi conj(z)`` applied at ``conj(z)``; no spectrogram
    closed forms are involved.
    """
    z = as_complex(p)
    w = np.conj(z)
    nb = normalized_bargmann(signal, w)
    nabla = normalized_bargmann_derivative(signal, w) - np.pi * z * nb
    return _scalar((1.0 + np.abs(nabla) ** 2 / np.pi) * np.exp(-np.abs(nb) ** 2))


# --- expected counts --------------------------------------------------------------


def expected_count_ball(k: int, gamma: float, R: float) -> float:
    """Expected number of zeros in the centered disc of radius ``R`` (Hermite signal)."""
    if R <= 0:
        raise ValueError("R must be positive")
    return _hermite_disc_count(math.pi * R * R, k, gamma)


def expected_count_chirp_strip(R: float, b: float, gamma: float) -> float:
    """Expected zeros in a unit-length rectangle of width ``R`` resting on a chirp axis."""
    if R <= 0:
        raise ValueError("R must be positive")
    return R * math.exp(-gamma * sigma_b(b) * math.exp(-2.0 * math.pi * R * R))


def _hermite_disc_count(x, k, gamma):
    # expected count in a centered disc of area x; the primitive of the intensity
    if x == 0:
        return 0.0
    return k - (k - x) * math.exp(-gamma * math.exp(k * math.log(x) - x - gammaln(k + 1)))


def hermite_annulus_counts(edges, k: int, gamma: float):
    """Expected zeros in the annuli ``edges[i] <= pi|z|^2 < edges[i+1]``."""
    return np.diff([_hermite_disc_count(float(e), k, gamma) for e in edges])


def chirp_band_counts(edges, b: float, gamma: float):
    """Expected zeros per unit axis length with signed distance in ``[edges[i], edges[i+1])``."""
    edges = np.asarray(edges, dtype=float)
    sb = sigma_b(b)
    F = edges * np.exp(-gamma * sb * np.exp(-2.0 * np.pi * edges**2))
    return np.diff(F)


# --- noiseless zeros of a chirp pair ----------------------------------------------


def pair_zero_line(pair: ChirpPair) -> float:
    """Rotated coordinate ``r`` of the line carrying the interference zeros."""
    if pair.gamma1 <= 0 or pair.gamma2 <= 0:
        raise ValueError("a pair with a vanishing amplitude has no interference zeros")
    a = chirp_frame(pair).a
    return a / 2.0 - math.log(pair.gamma2 / pair.gamma1) / (4.0 * a * math.pi)


def pair_zero_lattice(pair: ChirpPair, n_range) -> np.ndarray:
    """TF locations (complex ``tau + i omega``) of the noiseless zeros with index in ``n_range``.

    Zero ``m`` sits at ``s = (m + 1/2) / a`` on the line returned by
    :func:`pair_zero_line`.
    """
    frame = chirp_frame(pair)
    r0 = pair_zero_line(pair)
    m = np.asarray(list(n_range), dtype=float)
    s = (m + 0.5) / frame.a
    return frame.from_rs_complex(np.full_like(s, r0), s)
