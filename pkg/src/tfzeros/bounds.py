"""Rouché-type trapping bounds and their preconditions."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaln

from .signals import ChirpPair, chirp_frame

# strict inequalities are tested against this margin
SLACK = 1e-12


class AssumptionError(ValueError):
    pass


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    ok: bool
    slack: float | None  # signed margin, >= 0 when satisfied


@dataclass
class BoundReport:
    inf_spec_on_contour: float
    m_c: float
    lower_bound: float
    assumptions_ok: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def trapping_lower_bound(inf_spec: float, m_c: float) -> float:
    """Lower bound on P(noise spectrogram < signal spectrogram on the whole contour).

    ``inf_spec`` is the infimum of the noiseless spectrogram on the contour and
    ``m_c`` the expected supremum of the normalized noise real part on it. The
    bound is vacuous (0) unless ``inf_spec > 2 m_c^2``.
    """
    if inf_spec < 0 or m_c < 0:
        raise ValueError("inf_spec and m_c must be nonnegative")
    if inf_spec <= 2.0 * m_c * m_c:
        return 0.0
    gap = math.sqrt(inf_spec / 2.0) - m_c
    return max(0.0, 1.0 - 4.0 * math.exp(-gap * gap))


def _check_eps(eps):
    if not 0.0 < eps < 0.25:
        raise ValueError(f"eps must lie in (0, 1/4), got {eps}")


def hermite_gamma_threshold(k: int, eps: float, m_k: float) -> float:
    """Smallest SNR for which k zeros stay in ``B(0, sqrt(k/pi))`` w.p. >= 1 - eps."""
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_eps(eps)
    log_pref = math.log(2.0) - k * math.log(k) + k + gammaln(k + 1)
    return math.exp(log_pref) * (m_k + math.sqrt(math.log(4.0 / eps))) ** 2


def hermite_circle_spectrogram(k: int, gamma: float) -> float:
    """Value of the noiseless spectrogram on the circle ``|z| = sqrt(k/pi)`` (its maximum)."""
    return gamma * math.exp(k * math.log(k) - k - gammaln(k + 1))


def pair_gamma_threshold(a: float, b: float, eps: float, m_c: float) -> float:
    """Equal-SNR threshold for a chirp pair at rotated distance ``a``."""
    _check_eps(eps)
    sb = math.sqrt(2.0 / (1.0 + 4.0 * b * b))
    return 4.0 * (m_c + math.sqrt(math.log(4.0 / eps))) ** 2 / (sb * (1.0 - math.exp(-math.pi * a * a)) ** 2)


def _amplitude_gaps(pair: ChirpPair):
    a = chirp_frame(pair).a
    q = math.exp(-math.pi * a * a)
    s1, s2 = math.sqrt(pair.gamma1), math.sqrt(pair.gamma2)
    return s1 - s2 * q, s2 - s1 * q


def pair_trapping_assumptions(pair: ChirpPair, m_c: float | None = None,
                              eps: float | None = None, slack: float = SLACK) -> list[AssumptionCheck]:
    """The three hypotheses of the generalized pair-trapping statement.

    The third one needs the sup-mean estimate ``m_c`` and ``eps``; without
    them it is reported with ``ok=False`` and ``slack=None``.
    """
    a = chirp_frame(pair).a
    g1, g2 = pair.gamma1, pair.gamma2
    with np.errstate(divide="ignore"):
        dlog = abs(np.log(g1) - np.log(g2)) if g1 > 0 and g2 > 0 else math.inf

    m1 = 2.0 * math.pi * a * a - dlog
    checks = [AssumptionCheck("separation", bool(m1 > slack), float(m1))]

    branch1 = math.sqrt(2.0 / math.pi) - abs(a)
    arg = math.pi * a * a - 1.0
    if arg >= 1.0 and math.isfinite(dlog):
        rhs = -math.acosh(arg) + abs(a) * math.sqrt(math.pi * (math.pi * a * a - 2.0))
        branch2 = 0.5 * dlog - rhs
    else:
        branch2 = -math.inf
    m2 = max(branch1, branch2)
    checks.append(AssumptionCheck("unimodal_ridge", bool(m2 >= -slack), float(m2)))

    if m_c is None or eps is None:
        checks.append(AssumptionCheck("amplitude_gap", False, None))
    else:
        _check_eps(eps)
        sb = chirp_frame(pair).sigma_b
        gap = min(abs(x) for x in _amplitude_gaps(pair))
        m3 = gap - 2.0 / math.sqrt(sb) * (m_c + math.sqrt(math.log(4.0 / eps)))
        checks.append(AssumptionCheck("amplitude_gap", bool(m3 >= -slack), float(m3)))
    return checks


def pair_contour_infimum(pair: ChirpPair) -> float:
    """Analytic lower bound of the noiseless spectrogram on the boundary of any ``C_N``."""
    checks = pair_trapping_assumptions(pair)
    if not checks[1].ok:
        raise AssumptionError("ridge between the chirps is not unimodal; the contour bound does not apply")
    sb = chirp_frame(pair).sigma_b
    d1, d2 = _amplitude_gaps(pair)
    return sb * min(d1 * d1, d2 * d2)
