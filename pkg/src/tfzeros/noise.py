"""The white-noise Bargmann field and noisy fields built on it.

The noise is represented by its Taylor coefficients

    B(xi)(z) = sum_n xi_n sqrt(pi^n / n!) z^n,   xi_n iid standard complex Gaussian,

which is the centered Gaussian entire function with covariance ``exp(pi z conj(w))``.
Truncating at degree N leaves a relative variance equal to the Poisson
upper tail ``P(Poisson(pi R^2) > N)`` on the disc of radius R.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln
from scipy.stats import poisson

from .signals import (
    SignalModel,
    bargmann,
    bargmann_derivative,
    normalized_bargmann,
    normalized_bargmann_derivative,
)

DEFAULT_TAIL_TOL = 1e-12


class OutOfRadiusError(ValueError):
    pass


def truncation_degree(radius: float, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest N whose truncated tail variance on ``|z| <= radius`` is below ``tail_tol``."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if not 0 < tail_tol < 1:
        raise ValueError("tail_tol must lie in (0, 1)")
    lam = math.pi * radius * radius
    n = max(int(poisson.isf(tail_tol, lam)) - 2, 0)
    while poisson.sf(n, lam) > tail_tol:
        n += 1
    while n > 0 and poisson.sf(n - 1, lam) <= tail_tol:
        n -= 1
    return n


def valid_radius_for(max_degree: int, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Largest radius on which degree ``max_degree`` meets ``tail_tol``."""
    def f(R):
        return math.log(max(poisson.sf(max_degree, math.pi * R * R), 1e-300)) - math.log(tail_tol)

    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    lo = 1e-6
    if f(lo) > 0:
        return lo
    return brentq(f, lo, hi, xtol=1e-12)


def coefficient_weights(max_degree: int) -> np.ndarray:
    """``sqrt(pi^n / n!)`` for n = 0..max_degree."""
    n = np.arange(max_degree + 1)
    return np.exp(0.5 * (n * math.log(math.pi) - gammaln(n + 1)))


def realization_seed(master_seed: int, index: int, stream: int = 0) -> int:
    """64-bit seed of realization ``index``: SeedSequence((master_seed, stream, index)) state word."""
    ss = np.random.SeedSequence((int(master_seed), int(stream), int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


def standard_coefficients(seed: int, max_degree: int) -> np.ndarray:
    """iid standard complex Gaussians (E|xi|^2 = 1) from PCG64(seed).

    Drawn row-major so that lower degrees do not depend on ``max_degree``.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal((max_degree + 1, 2))
    return (x[:, 0] + 1j * x[:, 1]) / math.sqrt(2.0)


@dataclass(frozen=True)
class GafSample:
    coeffs: np.ndarray
    seed: int
    valid_radius: float
    tail_tol: float = DEFAULT_TAIL_TOL

    @property
    def max_degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def standard(self) -> np.ndarray:
        return self.coeffs / coefficient_weights(self.max_degree)

    def to_json(self) -> str:
        return json.dumps({
            "seed": self.seed,
            "max_degree": self.max_degree,
            "valid_radius": self.valid_radius,
            "tail_tol": self.tail_tol,
            "coeffs_re": self.coeffs.real.tolist(),
            "coeffs_im": self.coeffs.imag.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "GafSample":
        d = json.loads(text)
        coeffs = np.asarray(d["coeffs_re"]) + 1j * np.asarray(d["coeffs_im"])
        return cls(coeffs, d["seed"], d["valid_radius"], d["tail_tol"])


def sample_gaf(seed: int, max_degree: int, tail_tol: float = DEFAULT_TAIL_TOL) -> GafSample:
    if max_degree < 0:
        raise ValueError("max_degree must be nonnegative")
    xi = standard_coefficients(seed, max_degree)
    return GafSample(xi * coefficient_weights(max_degree), int(seed),
                     valid_radius_for(max_degree, tail_tol), tail_tol)


def sample_gaf_for_radius(seed: int, radius: float, tail_tol: float = DEFAULT_TAIL_TOL) -> GafSample:
    N = truncation_degree(radius, tail_tol)
    xi = standard_coefficients(seed, N)
    return GafSample(xi * coefficient_weights(N), int(seed), float(radius), tail_tol)


@dataclass(frozen=True)
class NoisyField:
    """``B(x) + B(xi)``; ``noise=None`` gives the noiseless field."""

    signal: SignalModel
    noise: GafSample | None = None

    @property
    def valid_radius(self) -> float:
        return math.inf if self.noise is None else self.noise.valid_radius

    def _check(self, z):
        if np.any(np.abs(z) > self.valid_radius):
            raise OutOfRadiusError(
                f"evaluation at |z|={np.max(np.abs(z)):.4g} beyond valid radius {self.valid_radius:.4g}"
            )


def eval_field(field: NoisyField, z):
    """``B(x)(z) + B(xi)(z)``."""
    z = np.asarray(z, dtype=complex)
    field._check(z)
    out = bargmann(field.signal, z)
    if field.noise is not None:
        out = out + np.polyval(field.noise.coeffs[::-1], z)
    return out


def noisy_spectrogram(field: NoisyField, p):
    """Spectrogram of signal plus noise at TF point(s) ``p``."""
    from .analytic import as_complex

    z = as_complex(p)
    field._check(z)
    batch = FieldBatch.from_fields([field], tf=False)
    v = batch.normalized_at(np.zeros(np.size(z), dtype=int), np.conj(np.ravel(z)))
    out = np.abs(v.reshape(np.shape(z))) ** 2
    return out.item() if out.ndim == 0 else out


# --- batched evaluation ------------------------------------------------------------


def normalized_basis(z, max_degree: int) -> np.ndarray:
    """``exp(-pi|z|^2/2) sqrt(pi^n/n!) z^n``, shape ``(max_degree + 1, len(z))``."""
    z = np.ravel(np.asarray(z, dtype=complex))
    out = np.empty((max_degree + 1, len(z)), dtype=complex)
    out[0] = np.exp(-0.5 * np.pi * (z.real**2 + z.imag**2))
    for n in range(1, max_degree + 1):
        out[n] = out[n - 1] * z * math.sqrt(math.pi / n)
    return out


class FieldBatch:
    """Several realizations of ``signal + noise`` sharing one signal and one truncation.

    Values are returned normalized by ``exp(-pi|z|^2/2)`` (same phase as the
    holomorphic field, unit noise variance). With ``tf=True`` the batch
    represents ``z -> conj(B(y)(conj z))``, an entire function whose zeros are
    exactly the spectrogram zeros in TF coordinates.
    """

    _CHUNK = 2_000_000

    def __init__(self, signal: SignalModel | None, xi: np.ndarray, valid_radius: float, tf: bool = True):
        self.signal = signal
        xi = np.atleast_2d(np.asarray(xi, dtype=complex))
        self.xi = np.conj(xi) if tf else xi
        self.valid_radius = valid_radius
        self.tf = tf
        self.weights = coefficient_weights(self.xi.shape[1] - 1)

    @classmethod
    def from_fields(cls, fields, tf: bool = True) -> "FieldBatch":
        signal = fields[0].signal
        if any(f.signal != signal for f in fields):
            raise ValueError("all fields in a batch must share the signal")
        if fields[0].noise is None:
            return cls(signal, np.zeros((len(fields), 1)), math.inf, tf)
        xi = np.stack([f.noise.standard for f in fields])
        return cls(signal, xi, min(f.valid_radius for f in fields), tf)

    @classmethod
    def from_seeds(cls, signal, master_seed: int, indices, radius: float,
                   tail_tol: float = DEFAULT_TAIL_TOL, stream: int = 0, tf: bool = True) -> "FieldBatch":
        N = truncation_degree(radius, tail_tol)
        xi = np.stack([standard_coefficients(realization_seed(master_seed, i, stream), N) for i in indices])
        return cls(signal, xi, radius, tf)

    def __len__(self):
        return self.xi.shape[0]

    def subset(self, idx) -> "FieldBatch":
        out = object.__new__(FieldBatch)
        out.__dict__.update(self.__dict__)
        out.xi = self.xi[np.atleast_1d(idx)]
        return out

    @property
    def max_degree(self) -> int:
        return self.xi.shape[1] - 1

    def _signal_norm(self, z):
        if self.signal is None:
            return 0.0
        if self.tf:
            return np.conj(normalized_bargmann(self.signal, np.conj(z)))
        return normalized_bargmann(self.signal, z)

    def _signal_norm_deriv(self, z):
        if self.signal is None:
            return 0.0
        if self.tf:
            return np.conj(normalized_bargmann_derivative(self.signal, np.conj(z)))
        return normalized_bargmann_derivative(self.signal, z)

    def _deriv_coeffs(self, xi):
        # d/dz of sqrt(pi^n/n!) z^n is sqrt(pi n) times the degree n-1 basis function
        n = np.arange(1, self.max_degree + 1)
        return xi[..., 1:] * np.sqrt(np.pi * n)

    def normalized(self, z, deriv: bool = False):
        """Values of every realization at common points: shape ``(len(self), len(z))``.

        With ``deriv=True`` also returns the derivative under the same normalization.
        """
        z = np.ravel(np.asarray(z, dtype=complex))
        step = max(1, self._CHUNK // (self.max_degree + 1))
        out = np.empty((len(self), len(z)), dtype=complex)
        dout = np.empty_like(out) if deriv else None
        dxi = self._deriv_coeffs(self.xi) if deriv else None
        for lo in range(0, len(z), step):
            zz = z[lo:lo + step]
            basis = normalized_basis(zz, self.max_degree)
            out[:, lo:lo + step] = self.xi @ basis + self._signal_norm(zz)
            if deriv:
                dout[:, lo:lo + step] = dxi @ basis[:-1] + self._signal_norm_deriv(zz)
        return (out, dout) if deriv else out

    def noise_normalized(self, z) -> np.ndarray:
        """Normalized noise alone (z-plane convention when ``tf=False``)."""
        z = np.ravel(np.asarray(z, dtype=complex))
        return self.xi @ normalized_basis(z, self.max_degree)

    def normalized_at(self, owner, z, deriv: bool = False):
        """Value of realization ``owner[j]`` at ``z[j]`` (and derivative if asked)."""
        owner = np.asarray(owner)
        z = np.asarray(z, dtype=complex)
        out = np.empty(len(z), dtype=complex)
        dout = np.empty_like(out) if deriv else None
        step = max(1, self._CHUNK // (self.max_degree + 1))
        for lo in range(0, len(z), step):
            zz = z[lo:lo + step]
            xi = self.xi[owner[lo:lo + step]]
            basis = normalized_basis(zz, self.max_degree)
            out[lo:lo + step] = np.einsum("mn,nm->m", xi, basis) + self._signal_norm(zz)
            if deriv:
                dout[lo:lo + step] = (np.einsum("mn,nm->m", self._deriv_coeffs(xi), basis[:-1])
                                      + self._signal_norm_deriv(zz))
        return (out, dout) if deriv else out

    def holomorphic_at(self, owner, z):
        """Unnormalized value and derivative of realization ``owner[j]`` at ``z[j]``."""
        owner = np.asarray(owner)
        z = np.asarray(z, dtype=complex)
        c = self.xi[owner] * self.weights
        f = np.zeros(len(z), dtype=complex)
        df = np.zeros(len(z), dtype=complex)
        for n in range(self.max_degree, -1, -1):
            df = df * z + f
            f = f * z + c[:, n]
        if self.signal is not None:
            if self.tf:
                f = f + np.conj(bargmann(self.signal, np.conj(z)))
                df = df + np.conj(bargmann_derivative(self.signal, np.conj(z)))
            else:
                f = f + bargmann(self.signal, z)
                df = df + bargmann_derivative(self.signal, z)
        return f, df

    def scale_at(self, z) -> np.ndarray:
        """Typical normalized magnitude near ``z`` (noise std plus signal modulus)."""
        noise = 0.0 if not np.any(self.xi) else 1.0
        return noise + np.abs(self._signal_norm(np.asarray(z, dtype=complex)))
