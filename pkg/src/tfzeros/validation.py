"""Cross-route consistency checks between the independent evaluation paths."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import qmc

from .analytic import (
    intensity,
    intensity_general,
    intensity_via_bargmann,
    spectrogram,
    spectrogram_via_bargmann,
    stft_quadrature,
)
from .signals import ChirpPair, Hermite, LinearChirp

# shipped tolerances; each can be overridden
TOLERANCES = {
    "spectrogram_routes": 1e-12,
    "intensity_routes": 1e-12,
    "finite_difference": 1e-5,
    "finite_difference_order": 0.2,
    "quadrature": 1e-8,
}

FD_STEP = 1e-3

# unit-SNR representatives: the finite-difference error grows with the SNR
TEMPLATES = {
    "hermite": [Hermite(1, 1.0), Hermite(3, 1.0), Hermite(0, 1.0)],
    "chirp": [LinearChirp(0.5, 0.4, 1.0), LinearChirp(-1.0, 0.0, 1.0)],
    "pair": [ChirpPair(-1.0, 0.0, 0.4, 1.0, 0.4), ChirpPair(0.0, 1.0, 0.0, 1.0, 1.0)],
}

# high-SNR settings used in the figures; only checked by the exact routes
FIGURE_SIGNALS = {
    "hermite": [Hermite(10, 400.0), Hermite(1, 100.0)],
    "chirp": [LinearChirp(-5.0, 0.4, 100.0)],
    "pair": [ChirpPair(-1.0, 0.0, 0.4, 100.0, 40.0)],
}


@dataclass
class CheckResult:
    name: str
    signal: str
    value: float
    tol: float
    ok: bool

    def to_dict(self):
        return asdict(self)


def family_of(signal) -> str:
    return {Hermite: "hermite", LinearChirp: "chirp", ChirpPair: "pair"}[type(signal)]


def halton_points(n: int, half_width: float = 4.0, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in the square ``[-half_width, half_width]^2``."""
    u = qmc.Halton(d=2, seed=seed).random(n)
    x = (2.0 * u - 1.0) * half_width
    return x[:, 0] + 1j * x[:, 1]


def rel_error(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.abs(a - b) / np.maximum(np.abs(b), np.finfo(float).tiny)


def spectrogram_route_error(signal, z, floor: float = 0.0) -> float:
    """Largest relative gap between the closed form and the Bargmann route.

    ``floor`` bounds the denominator from below; values of the spectrogram
    smaller than it are compared in absolute terms.
    """
    a = np.asarray(spectrogram(signal, z))
    b = np.asarray(spectrogram_via_bargmann(signal, z))
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), max(floor, np.finfo(float).tiny))))


def intensity_route_error(signal, z, conditioned: bool = False) -> float:
    """Largest relative gap between the specialized and Bargmann intensities.

    The intensity carries a factor ``exp(-Spec)``, so a relative error in
    ``Spec`` is amplified by ``Spec``. ``conditioned=True`` divides by that
    condition number ``1 + Spec``, which is what high-SNR signals need.
    """
    err = rel_error(intensity_via_bargmann(signal, z), intensity(signal, z))
    if conditioned:
        err = err / (1.0 + np.asarray(spectrogram(signal, z)))
    return float(np.max(err))


def finite_difference_errors(signal, z, h: float = FD_STEP):
    """Relative errors of the 5-point Laplacian route at steps ``h`` and ``h/2``."""
    exact = np.asarray(intensity(signal, z))
    spec = lambda w: spectrogram(signal, w)  # noqa: E731
    e1 = rel_error(intensity_general(spec, z, h), exact)
    e2 = rel_error(intensity_general(spec, z, h / 2), exact)
    return e1, e2


def convergence_order(e1, e2) -> float:
    return math.log2(float(np.sum(e1)) / float(np.sum(e2)))


def quadrature_error(signal, z) -> float:
    """Largest error of the STFT quadrature, relative to ``max(1, |Spec|)``."""
    ref = np.asarray(spectrogram(signal, z))
    quad = np.array([stft_quadrature(signal, p) for p in z])
    return float(np.max(np.abs(quad - ref) / np.maximum(1.0, np.abs(ref))))


def run_checks(families=None, tol: float | None = None, n_points: int = 1000, n_quad: int = 100):
    """Every deterministic cross-route check; ``tol`` overrides all tolerances."""
    families = families or list(TEMPLATES)
    tols = {k: (tol if tol is not None else v) for k, v in TOLERANCES.items()}
    z = halton_points(n_points)
    zq = halton_points(n_quad, half_width=3.0, seed=1)
    out = []
    for fam in families:
        for sig in TEMPLATES[fam] + FIGURE_SIGNALS[fam]:
            name = repr(sig)
            err = spectrogram_route_error(sig, z)
            out.append(CheckResult("spectrogram_routes", name, err, tols["spectrogram_routes"],
                                   err <= tols["spectrogram_routes"]))
            err = intensity_route_error(sig, z, conditioned=sig in FIGURE_SIGNALS[fam])
            out.append(CheckResult("intensity_routes", name, err, tols["intensity_routes"],
                                   err <= tols["intensity_routes"]))
        for sig in TEMPLATES[fam]:
            name = repr(sig)
            e1, e2 = finite_difference_errors(sig, z)
            err = float(np.max(e1))
            out.append(CheckResult("finite_difference", name, err, tols["finite_difference"],
                                   err <= tols["finite_difference"]))
            dev = abs(convergence_order(e1, e2) - 2.0)
            out.append(CheckResult("finite_difference_order", name, dev, tols["finite_difference_order"],
                                   dev <= tols["finite_difference_order"]))
            err = quadrature_error(sig, zq)
            out.append(CheckResult("quadrature", name, err, tols["quadrature"], err <= tols["quadrature"]))
    return out
