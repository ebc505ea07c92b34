"""Deterministic signal families and their Bargmann transforms.

Conventions used throughout the package:

* the Gaussian window is ``g(t) = 2**0.25 * exp(-pi t^2)`` (unit L2 norm);
* a time-frequency point is the complex number ``z = tau + 1j * omega``;
* ``Spec(y)(z) = exp(-pi |z|^2) |B(y)(conj(z))|^2``.

All functions accept scalars or numpy arrays for ``z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import eval_hermite, gammaln

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Hermite:
    """``sqrt(gamma) * h_k`` with ``h_k`` the unit-norm k-th Hermite function."""

    k: int
    gamma: float = 1.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ValueError(f"k must be a nonnegative integer, got {self.k}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True)
class LinearChirp:
    """``sqrt(gamma) * exp(2i pi t (a + b t))``; instantaneous frequency a + 2bt."""

    a: float = 0.0
    b: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")


@dataclass(frozen=True)
class ChirpPair:
    """Two parallel linear chirps sharing the slope ``b``."""

    a1: float
    a2: float
    b: float = 0.0
    gamma1: float = 1.0
    gamma2: float = 1.0

    def __post_init__(self):
        if not (self.gamma1 >= 0 and self.gamma2 >= 0):
            raise ValueError("gamma1 and gamma2 must be nonnegative")
        if self.a1 == self.a2:
            raise ValueError(
                "coincident chirps: use LinearChirp with gamma=(sqrt(g1)+sqrt(g2))**2"
            )

    @property
    def components(self) -> tuple[LinearChirp, LinearChirp]:
        return (
            LinearChirp(self.a1, self.b, self.gamma1),
            LinearChirp(self.a2, self.b, self.gamma2),
        )


SignalModel = Union[Hermite, LinearChirp, ChirpPair]


def sigma_b(b: float) -> float:
    return math.sqrt(2.0 / (1.0 + 4.0 * b * b))


@dataclass(frozen=True)
class ChirpFrame:
    """Rotated coordinates attached to a chirp (or a pair of parallel chirps).

    ``r`` is the signed distance to the axis ``omega = a1 + 2 b tau`` and ``s``
    the coordinate along it. The forward map is an affine similarity; its
    inverse is stored in closed form.
    """

    b: float
    a1: float
    a2: float | None = None

    @property
    def sigma_b(self) -> float:
        return sigma_b(self.b)

    @property
    def scale(self) -> float:
        # sigma_b / sqrt(2) = 1 / sqrt(1 + 4 b^2)
        return 1.0 / math.sqrt(1.0 + 4.0 * self.b * self.b)

    @property
    def a(self) -> float:
        """Rotated inter-axis distance (0 for a single chirp)."""
        if self.a2 is None:
            return 0.0
        return self.scale * (self.a2 - self.a1)

    @property
    def _shift(self) -> float:
        return 0.0 if self.a2 is None else (self.a1 + self.a2) * self.b

    def to_rs(self, tau, omega):
        c, b = self.scale, self.b
        tau = np.asarray(tau, dtype=float)
        omega = np.asarray(omega, dtype=float)
        r = c * (omega - 2.0 * b * tau - self.a1)
        s = c * (tau + 2.0 * b * omega - self._shift)
        return r, s

    def from_rs(self, r, s):
        # (omega - 2b tau, tau + 2b omega) = (r/c + a1, s/c + shift); the
        # matrix [[-2b, 1], [1, 2b]] has inverse (1/(1+4b^2)) [[-2b, 1], [1, 2b]].
        c, b = self.scale, self.b
        u = np.asarray(r, dtype=float) / c + self.a1
        v = np.asarray(s, dtype=float) / c + self._shift
        tau = c * c * (-2.0 * b * u + v)
        omega = c * c * (u + 2.0 * b * v)
        return tau, omega

    def to_rs_complex(self, z):
        z = np.asarray(z)
        return self.to_rs(z.real, z.imag)

    def from_rs_complex(self, r, s):
        tau, omega = self.from_rs(r, s)
        return tau + 1j * omega


def chirp_frame(signal: LinearChirp | ChirpPair) -> ChirpFrame:
    if isinstance(signal, LinearChirp):
        return ChirpFrame(b=signal.b, a1=signal.a)
    if isinstance(signal, ChirpPair):
        return ChirpFrame(b=signal.b, a1=signal.a1, a2=signal.a2)
    raise TypeError(f"no chirp frame for {type(signal).__name__}")


# --- Bargmann transforms -------------------------------------------------------


def _chirp_exponent(a: float, b: float, z):
    return -np.pi * (1j * a + z) ** 2 / (2j * b - 1.0) - 0.5 * np.pi * z * z


def _chirp_prefactor(b: float) -> complex:
    # principal branch: Re sqrt(1 - 2ib) > 0, equal to 1 at b = 0
    return 2.0**0.25 / np.sqrt(complex(1.0, -2.0 * b))


def _log_hermite_weight(k: int) -> float:
    """log of pi^(k/2) / sqrt(k!)."""
    return 0.5 * (k * math.log(math.pi) - gammaln(k + 1))


def bargmann(signal: SignalModel, z):
    """Bargmann transform ``B(x)(z)`` including the ``sqrt(gamma)`` amplitudes."""
    z = np.asarray(z, dtype=complex)
    if isinstance(signal, Hermite):
        w = math.sqrt(signal.gamma) * math.exp(_log_hermite_weight(signal.k))
        return w * z**signal.k
    if isinstance(signal, LinearChirp):
        amp = math.sqrt(signal.gamma) * _chirp_prefactor(signal.b)
        return amp * np.exp(_chirp_exponent(signal.a, signal.b, z))
    if isinstance(signal, ChirpPair):
        c1, c2 = signal.components
        return bargmann(c1, z) + bargmann(c2, z)
    raise TypeError(f"unknown signal model {signal!r}")


def bargmann_derivative(signal: SignalModel, z):
    """Complex derivative of :func:`bargmann` in ``z``."""
    z = np.asarray(z, dtype=complex)
    if isinstance(signal, Hermite):
        k = signal.k
        if k == 0:
            return np.zeros_like(z)
        w = math.sqrt(signal.gamma) * math.exp(_log_hermite_weight(k))
        return w * k * z ** (k - 1)
    if isinstance(signal, LinearChirp):
        a, b = signal.a, signal.b
        dexp = -2.0 * np.pi * (1j * a + z) / (2j * b - 1.0) - np.pi * z
        return dexp * bargmann(signal, z)
    if isinstance(signal, ChirpPair):
        c1, c2 = signal.components
        return bargmann_derivative(c1, z) + bargmann_derivative(c2, z)
    raise TypeError(f"unknown signal model {signal!r}")


def normalized_bargmann(signal: SignalModel, z):
    """``exp(-pi |z|^2 / 2) B(x)(z)``, evaluated without intermediate overflow."""
    z = np.asarray(z, dtype=complex)
    half = 0.5 * np.pi * (z.real**2 + z.imag**2)
    if isinstance(signal, Hermite):
        k = signal.k
        if signal.gamma == 0:
            return np.zeros_like(z)
        with np.errstate(divide="ignore"):
            logmod = 0.5 * math.log(signal.gamma) + _log_hermite_weight(k) - half
            if k:
                logmod = logmod + k * np.log(np.abs(z))
        phase = np.exp(1j * k * np.angle(z)) if k else 1.0
        return np.exp(logmod) * phase
    if isinstance(signal, LinearChirp):
        if signal.gamma == 0:
            return np.zeros_like(z)
        amp = math.sqrt(signal.gamma) * _chirp_prefactor(signal.b)
        return amp * np.exp(_chirp_exponent(signal.a, signal.b, z) - half)
    if isinstance(signal, ChirpPair):
        c1, c2 = signal.components
        return normalized_bargmann(c1, z) + normalized_bargmann(c2, z)
    raise TypeError(f"unknown signal model {signal!r}")


def normalized_bargmann_derivative(signal: SignalModel, z):
    """``exp(-pi |z|^2 / 2) B(x)'(z)``."""
    z = np.asarray(z, dtype=complex)
    if isinstance(signal, Hermite):
        k = signal.k
        if k == 0 or signal.gamma == 0:
            return np.zeros_like(z)
        half = 0.5 * np.pi * (z.real**2 + z.imag**2)
        with np.errstate(divide="ignore"):
            logmod = 0.5 * math.log(signal.gamma) + _log_hermite_weight(k) + math.log(k) - half
            if k > 1:
                logmod = logmod + (k - 1) * np.log(np.abs(z))
        phase = np.exp(1j * (k - 1) * np.angle(z)) if k > 1 else 1.0
        return np.exp(logmod) * phase
    if isinstance(signal, LinearChirp):
        dexp = -2.0 * np.pi * (1j * signal.a + z) / (2j * signal.b - 1.0) - np.pi * z
        return dexp * normalized_bargmann(signal, z)
    if isinstance(signal, ChirpPair):
        c1, c2 = signal.components
        return normalized_bargmann_derivative(c1, z) + normalized_bargmann_derivative(c2, z)
    raise TypeError(f"unknown signal model {signal!r}")


def waveform(signal: SignalModel, t):
    """Time-domain samples of the signal (used by the quadrature oracle)."""
    t = np.asarray(t, dtype=float)
    if isinstance(signal, Hermite):
        k = signal.k
        norm = math.exp(0.25 * math.log(2.0) - 0.5 * (k * math.log(2.0) + gammaln(k + 1)))
        h = norm * eval_hermite(k, math.sqrt(2.0 * math.pi) * t) * np.exp(-np.pi * t * t)
        return math.sqrt(signal.gamma) * h
    if isinstance(signal, LinearChirp):
        return math.sqrt(signal.gamma) * np.exp(2j * np.pi * t * (signal.a + signal.b * t))
    if isinstance(signal, ChirpPair):
        c1, c2 = signal.components
        return waveform(c1, t) + waveform(c2, t)
    raise TypeError(f"unknown signal model {signal!r}")


def is_zero_signal(signal: SignalModel) -> bool:
    if isinstance(signal, ChirpPair):
        return signal.gamma1 == 0 and signal.gamma2 == 0
    return signal.gamma == 0
