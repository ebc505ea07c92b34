import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from tfzeros.analytic import spectrogram
from tfzeros.bounds import (
    AssumptionError,
    hermite_circle_spectrogram,
    hermite_gamma_threshold,
    pair_contour_infimum,
    pair_gamma_threshold,
    pair_trapping_assumptions,
    trapping_lower_bound,
)
from tfzeros.contours import Circle, rectangle_cn
from tfzeros.signals import ChirpPair, Hermite

A_CRIT = math.sqrt(2.0 / math.pi)


def checks(pair, m=None, eps=None):
    return {c.name: c for c in pair_trapping_assumptions(pair, m, eps)}


def test_lower_bound_vacuous_below_threshold():
    assert trapping_lower_bound(2.0, 1.0) == 0.0
    assert trapping_lower_bound(0.0, 0.0) == 0.0


def test_lower_bound_formula():
    inf, m = 50.0, 1.0
    assert trapping_lower_bound(inf, m) == pytest.approx(1 - 4 * math.exp(-(5.0 - 1.0) ** 2))


@given(st.integers(1, 12), st.floats(1e-4, 0.249), st.floats(0.0, 3.0))
def test_hermite_threshold_gives_one_minus_eps(k, eps, m):
    gamma = hermite_gamma_threshold(k, eps, m)
    inf = hermite_circle_spectrogram(k, gamma)
    assert trapping_lower_bound(inf, m) >= 1 - eps - 1e-12


def test_hermite_circle_value_is_max_of_spectrogram():
    k, g = 3, 7.0
    R = math.sqrt(k / math.pi)
    on = np.asarray(spectrogram(Hermite(k, g), Circle(0, R).sample(64)))
    assert np.allclose(on, hermite_circle_spectrogram(k, g), rtol=1e-13)
    radial = np.asarray(spectrogram(Hermite(k, g), np.linspace(0, 3, 400)))
    assert radial.max() <= hermite_circle_spectrogram(k, g) * (1 + 1e-12)


@pytest.mark.parametrize("eps", [0.0, 0.25, 0.3, -0.1])
def test_eps_range_enforced(eps):
    with pytest.raises(ValueError):
        hermite_gamma_threshold(1, eps, 1.0)
    with pytest.raises(ValueError):
        pair_gamma_threshold(1.0, 0.0, eps, 1.0)


def test_equal_snr_separation_holds():
    assert checks(ChirpPair(0.0, 0.5, 0.3, 4.0, 4.0))["separation"].ok


def test_critical_distance_unimodal_via_first_branch():
    c = checks(ChirpPair(0.0, A_CRIT, 0.0, 9.0, 9.0))["unimodal_ridge"]
    assert c.ok and abs(c.slack) < 1e-12


def test_separation_is_strict_at_boundary():
    a = 0.8
    g2 = math.exp(2 * math.pi * a * a)
    assert not checks(ChirpPair(0.0, a, 0.0, 1.0, g2))["separation"].ok


def test_amplitude_gap_needs_sup_estimate():
    c = checks(ChirpPair(0.0, A_CRIT, 0.0, 9.0, 9.0))["amplitude_gap"]
    assert not c.ok and c.slack is None


def test_pair_threshold_satisfies_amplitude_gap():
    a, b, eps, m = A_CRIT, 0.4, 0.05, 1.1
    g = pair_gamma_threshold(a, b, eps, m)
    c = 1 / math.sqrt(1 + 4 * b * b)
    pair = ChirpPair(0.0, a / c, b, g, g)
    res = checks(pair, m, eps)
    assert all(x.ok for x in res.values())
    below = ChirpPair(0.0, a / c, b, 0.9 * g, 0.9 * g)
    assert not checks(below, m, eps)["amplitude_gap"].ok


def test_wide_pair_not_unimodal():
    pair = ChirpPair(0.0, 1.0, 0.0, 5.0, 5.0)  # pi a^2 - 1 > 1 but equal amplitudes
    assert not checks(pair)["unimodal_ridge"].ok
    with pytest.raises(AssumptionError):
        pair_contour_infimum(pair)


@pytest.mark.parametrize("pair", [
    ChirpPair(0.0, A_CRIT, 0.0, 30.0, 30.0),
    ChirpPair(-0.3, 0.4, 0.4, 20.0, 12.0),
    ChirpPair(0.0, 0.6, -1.0, 5.0, 8.0),
], ids=repr)
@pytest.mark.parametrize("N", [0, 1, 5])
def test_contour_infimum_is_a_lower_bound(pair, N):
    pts = rectangle_cn(pair, N).sample(10_000)
    assert pair_contour_infimum(pair) <= np.min(spectrogram(pair, pts)) * (1 + 1e-12)


@given(st.floats(0.05, A_CRIT), st.floats(-2, 2), st.floats(0.1, 50), st.floats(0.1, 50))
def test_contour_infimum_property(a, b, g1, g2):
    c = 1 / math.sqrt(1 + 4 * b * b)
    pair = ChirpPair(0.0, a / c, b, g1, g2)
    assume(checks(pair)["unimodal_ridge"].ok)
    pts = rectangle_cn(pair, 0).sample(2000)
    assert pair_contour_infimum(pair) <= np.min(spectrogram(pair, pts)) * (1 + 1e-9) + 1e-300
