import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import poisson

from tfzeros.analytic import spectrogram
from tfzeros.noise import (
    FieldBatch,
    GafSample,
    NoisyField,
    OutOfRadiusError,
    eval_field,
    noisy_spectrogram,
    realization_seed,
    sample_gaf,
    sample_gaf_for_radius,
    standard_coefficients,
    truncation_degree,
    valid_radius_for,
)
from tfzeros.signals import ChirpPair, Hermite, LinearChirp, bargmann

N_MC = 100_000


@pytest.fixture(scope="module")
def noise_batch():
    """1e5 pure-noise realizations (z-plane convention) valid on |z| <= 3."""
    return FieldBatch.from_seeds(None, 2024, range(N_MC), radius=3.0, tf=False)


def test_truncation_degree_reference():
    # smallest N with P(Poisson(pi R^2) > N) <= 1e-12, by direct summation in mpmath
    assert truncation_degree(0.1, 1e-12) == 6
    assert truncation_degree(3.0, 1e-12) == 73


@given(st.floats(0.01, 8.0), st.floats(1e-15, 1e-2))
def test_truncation_tail_invariant(R, tol):
    N = truncation_degree(R, tol)
    lam = math.pi * R * R
    assert poisson.sf(N, lam) <= tol
    assert N == 0 or poisson.sf(N - 1, lam) > tol


@given(st.floats(0.01, 6.0), st.floats(0.01, 1.0), st.floats(1e-14, 1e-3))
def test_truncation_degree_monotone(R, dR, tol):
    assert truncation_degree(R + dR, tol) >= truncation_degree(R, tol)
    assert truncation_degree(R, tol) >= truncation_degree(R, 10 * tol)


def test_valid_radius_inverts_degree():
    for R in (0.5, 2.0, 4.0):
        N = truncation_degree(R)
        assert valid_radius_for(N) >= R


def test_sampling_is_deterministic():
    a, b = sample_gaf(123, 40), sample_gaf(123, 40)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert not np.array_equal(a.coeffs, sample_gaf(124, 40).coeffs)


def test_low_degrees_do_not_depend_on_truncation():
    assert np.array_equal(standard_coefficients(9, 10), standard_coefficients(9, 50)[:11])


def test_realization_seeds_are_distinct_per_index_and_stream():
    seeds = {realization_seed(1, i, s) for i in range(200) for s in range(3)}
    assert len(seeds) == 600


def test_json_round_trip():
    g = sample_gaf_for_radius(77, 2.0)
    back = GafSample.from_json(g.to_json())
    assert np.array_equal(back.coeffs, g.coeffs) and back.valid_radius == g.valid_radius


def test_zero_noise_gives_signal_transform():
    sig = ChirpPair(-1.0, 0.0, 0.4, 3.0, 2.0)
    zero = GafSample(np.zeros(30, complex), 0, 2.0)
    z = np.array([0.3 + 0.1j, -1.0 + 0.5j])
    assert np.array_equal(eval_field(NoisyField(sig, zero), z), bargmann(sig, z))
    assert np.all(eval_field(NoisyField(Hermite(2, 0.0), zero), z) == 0)


def test_zero_noise_spectrogram_is_hermite_formula():
    sig = Hermite(2, 5.0)
    zero = GafSample(np.zeros(30, complex), 0, 3.0)
    z = 0.4 + 0.9j
    expected = 5.0 * math.pi**2 * abs(z) ** 4 * math.exp(-math.pi * abs(z) ** 2) / 2
    assert noisy_spectrogram(NoisyField(sig, zero), z) == pytest.approx(expected, rel=1e-13)
    assert noisy_spectrogram(NoisyField(sig, zero), z) == pytest.approx(spectrogram(sig, z), rel=1e-13)


def test_noisy_spectrogram_matches_definition():
    g = sample_gaf_for_radius(5, 2.5)
    f = NoisyField(LinearChirp(0.2, 0.4, 3.0), g)
    z = np.array([0.5 - 0.4j, -1.2 + 0.3j])
    direct = np.exp(-np.pi * np.abs(z) ** 2) * np.abs(eval_field(f, np.conj(z))) ** 2
    assert np.allclose(noisy_spectrogram(f, z), direct, rtol=1e-12)
    assert np.all(noisy_spectrogram(f, z) >= 0)


def test_out_of_radius_is_an_error():
    g = sample_gaf_for_radius(1, 2.0)
    f = NoisyField(Hermite(1), g)
    with pytest.raises(OutOfRadiusError):
        eval_field(f, 2.1)
    with pytest.raises(OutOfRadiusError):
        noisy_spectrogram(f, 2.1j)


def test_batch_derivative_matches_difference_quotient():
    batch = FieldBatch.from_seeds(ChirpPair(-1.0, 0.0, 0.4, 5.0, 2.0), 3, range(4), radius=3.0)
    z = np.array([0.3 + 0.2j, -1.0 + 0.7j, 1.5j, -0.4])
    owner = np.arange(4)
    f, df = batch.holomorphic_at(owner, z)
    h = 1e-6
    fd = (batch.holomorphic_at(owner, z + h)[0] - batch.holomorphic_at(owner, z - h)[0]) / (2 * h)
    assert np.allclose(df, fd, rtol=1e-6)
    v, dv = batch.normalized_at(owner, z, deriv=True)
    scale = np.exp(-np.pi * np.abs(z) ** 2 / 2)
    assert np.allclose(v, f * scale, rtol=1e-12) and np.allclose(dv, df * scale, rtol=1e-12)


def _within(samples, target, k=3.0):
    m = samples.mean()
    se = samples.std(ddof=1) / math.sqrt(len(samples))
    return abs(m - target) <= k * se


def test_kernel_reproduction(noise_batch):
    pairs = [(1.0, 1.0), (0.5 + 0.3j, 0.2 - 0.4j), (0.0, 1.2j), (-0.7 + 0.7j, -0.5 + 0.9j), (1.1, -1.1)]
    for z, w in pairs:
        vz, vw = noise_batch.noise_normalized([z, w]).T
        prod = vz * np.conj(vw)
        # covariance exp(pi z conj(w)) after the exp(-pi|z|^2/2 - pi|w|^2/2) normalization
        target = np.exp(np.pi * z * np.conj(w) - np.pi * (abs(z) ** 2 + abs(w) ** 2) / 2)
        assert _within(prod.real, target.real) and _within(prod.imag, target.imag)


def test_unnormalized_kernel_at_one(noise_batch):
    v = noise_batch.noise_normalized([1.0])[:, 0] * math.exp(math.pi / 2)
    assert _within(np.abs(v) ** 2, math.exp(math.pi))


def test_field_is_centered(noise_batch):
    v = noise_batch.noise_normalized([0.5 + 0.3j])[:, 0]
    assert _within(v.real, 0.0) and _within(v.imag, 0.0)


def test_real_part_has_variance_one_half(noise_batch):
    for z in (0.0, 0.4, -1.0 + 1.0j, 2.0j, 1.7 - 0.9j):
        re = noise_batch.noise_normalized([z])[:, 0].real
        assert _within(re**2, 0.5)


def test_pure_noise_spectrogram_at_origin_is_unit_exponential(noise_batch):
    s = np.abs(noise_batch.noise_normalized([0.0])[:, 0]) ** 2
    assert _within(s, 1.0)
    # Exponential(1): P(S > 1) = 1/e
    assert _within((s > 1).astype(float), math.exp(-1))
