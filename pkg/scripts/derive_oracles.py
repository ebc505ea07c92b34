"""Independent high-precision reference values frozen into the test suite.

Nothing here imports tfzeros: spectrograms come from the STFT integral or the
Bargmann series, intensities from a numerical Laplacian, counts from quadrature.
"""

import mpmath as mp

mp.mp.dps = 30
pi = mp.pi


def stft(wave, tau, omega):
    f = lambda t: wave(t) * 2**mp.mpf(0.25) * mp.exp(-pi * (t - tau) ** 2) * mp.exp(-2j * pi * omega * t)
    return mp.quad(f, [tau - 10, tau, tau + 10])


def hermite_wave(k):
    c = 2**mp.mpf(0.25) / mp.sqrt(2**k * mp.factorial(k))
    return lambda t: c * mp.hermite(k, mp.sqrt(2 * pi) * t) * mp.exp(-pi * t * t)


def chirp_wave(a, b):
    return lambda t: mp.exp(2j * pi * t * (a + b * t))


def intensity_from(spec, tau, omega):
    """(1 + S + lap S / 4 pi) exp(-S) with the Laplacian from mpmath differentiation."""
    s = spec(tau, omega)
    lap = mp.diff(lambda x: spec(x, omega), tau, 2) + mp.diff(lambda y: spec(tau, y), omega, 2)
    return (1 + s + lap / (4 * pi)) * mp.exp(-s)


def hermite_spec_r(k, gamma):
    # rotation invariant: evaluate on the real axis at tau = sqrt(r / pi)
    return lambda r: gamma * r**k * mp.exp(-r) / mp.factorial(k)


def ball_count(k, gamma, R):
    S = hermite_spec_r(k, gamma)

    def rho(r):
        spec = lambda x, y: S(pi * (x * x + y * y))
        return intensity_from(spec, mp.sqrt(r / pi), 0)

    return mp.quad(rho, [0, pi * R * R])


def strip_count(R, b, gamma):
    sb = mp.sqrt(2 / (1 + 4 * b * b))
    c = 1 / mp.sqrt(1 + 4 * b * b)
    spec = lambda x, y: gamma * sb * mp.exp(-2 * pi * (c * (y - 2 * b * x)) ** 2)

    def rho(r):
        # the point at rotated distance r from the axis omega = 2 b tau, through tau = 0
        return intensity_from(spec, -2 * b * c * r, c * r)

    return mp.quad(rho, [0, R])


def poisson_degree(R, tol):
    lam = pi * R * R
    n, term, cdf = 0, mp.exp(-lam), mp.exp(-lam)
    while 1 - cdf > tol:
        n += 1
        term *= lam / n
        cdf += term
    return n


def pair_zero(a1, a2, b, g1, g2, z0):
    def term(a, g, z):
        pref = 2**mp.mpf(0.25) / mp.sqrt(1 - 2j * b)
        return mp.sqrt(g) * pref * mp.exp(-pi * (1j * a + z) ** 2 / (2j * b - 1) - pi * z * z / 2)

    # B = term1 + term2 vanishes where term2 / term1 = -1; the ratio is well scaled.
    # Spectrogram zeros in TF coordinates are conjugates of the Bargmann zeros.
    w = mp.findroot(lambda z: 1 + term(a2, g2, z) / term(a1, g1, z), mp.conj(z0))
    return mp.conj(w)


if __name__ == "__main__":
    print("hermite spec k=2 g=1 at (0.3, 0.2):", abs(stft(hermite_wave(2), 0.3, 0.2)) ** 2)
    print("chirp spec a=0.5 b=0.4 at (0.3, -0.7):", abs(stft(chirp_wave(0.5, 0.4), 0.3, -0.7)) ** 2)
    print("ball count k=1 g=10 R=1:", ball_count(1, 10, 1))
    print("ball count k=3 g=5 R=0.8:", ball_count(3, 5, mp.mpf("0.8")))
    print("strip count R=1 b=0.4 g=100:", strip_count(1, mp.mpf("0.4"), 100))
    print("strip count R=0.5 b=0 g=10:", strip_count(mp.mpf("0.5"), 0, 10))
    print("truncation degree R=0.1:", poisson_degree(mp.mpf("0.1"), mp.mpf("1e-12")))
    print("truncation degree R=3:", poisson_degree(3, mp.mpf("1e-12")))
    print("pair zero near (-1.56, -1.63):", pair_zero(-1, 0, mp.mpf("0.4"), 100, 40, mp.mpc(-1.56, -1.63)))
