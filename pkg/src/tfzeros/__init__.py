"""Zeros of Gaussian spectrograms of deterministic signals in white noise."""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    TFPoint,
    expected_count_ball,
    expected_count_chirp_strip,
    intensity,
    intensity_general,
    intensity_via_bargmann,
    pair_zero_lattice,
    spectrogram,
    stft_quadrature,
)
from .noise import GafSample, NoisyField, eval_field, noisy_spectrogram, sample_gaf  # noqa: E402
from .signals import ChirpPair, Hermite, LinearChirp, bargmann  # noqa: E402
from .zeros import GridSpec, ZeroSet, count_in, find_zeros, winding_number  # noqa: E402
