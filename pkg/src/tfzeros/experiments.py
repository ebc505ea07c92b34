"""Monte Carlo harness: empirical intensities, counts, trapping and sup estimates.

Realization ``i`` of an experiment always uses the seed
``realization_seed(master_seed, i, stream)``, and realizations are processed
in fixed-size batches whose results are merged in index order. Results are
therefore identical for any thread count.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import hermite_annulus_counts, intensity, spectrogram
from .bounds import (
    BoundReport,
    hermite_circle_spectrogram,
    hermite_gamma_threshold,
    pair_contour_infimum,
    pair_gamma_threshold,
    pair_trapping_assumptions,
    trapping_lower_bound,
)
from .contours import Circle, rectangle_cn
from .noise import DEFAULT_TAIL_TOL, FieldBatch, realization_seed, standard_coefficients, truncation_degree
from .signals import ChirpPair, Hermite, SignalModel, chirp_frame, is_zero_signal
from .zeros import GridSpec, find_zeros_batch, winding_numbers

log = logging.getLogger(__name__)

# independent random streams per experiment kind
STREAM_ZEROS = 0
STREAM_SUP = 1
STREAM_TAIL = 2

MAX_EXCLUDED_FRACTION = 1e-3
BATCH = 128


class ExclusionError(RuntimeError):
    """Too many realizations had to be dropped because the zero search failed."""


def _batches(n, size):
    return [range(lo, min(n, lo + size)) for lo in range(0, n, size)]


def _map_batches(fn, n, batch_size, threads):
    chunks = _batches(n, batch_size)
    if threads <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, chunks))


def _check_exclusions(n_excluded, n):
    if n_excluded > MAX_EXCLUDED_FRACTION * n:
        raise ExclusionError(f"{n_excluded} of {n} realizations failed (limit {MAX_EXCLUDED_FRACTION:.1%})")


def _noise_batch(signal, master_seed, idx, radius, stream, tf=True, tail_tol=DEFAULT_TAIL_TOL):
    return FieldBatch.from_seeds(signal, master_seed, idx, radius, tail_tol, stream, tf)


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    den = 1.0 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, mid - half), min(1.0, mid + half))


# --- intensity histograms -------------------------------------------------------


@dataclass
class RadialProfile:
    """Counts binned in ``r = pi |z - center|^2``; an annulus of width dr has area dr."""

    edges: np.ndarray
    counts: np.ndarray
    analytic_counts: np.ndarray | None = None  # expected zeros per realization

    @property
    def widths(self):
        return np.diff(self.edges)


def _bin_average(signal, x_edges, y_edges, order=6):
    """Mean of the analytic intensity over every bin (tensor Gauss-Legendre)."""
    t, w = np.polynomial.legendre.leggauss(order)
    xc, xh = 0.5 * (x_edges[1:] + x_edges[:-1]), 0.5 * np.diff(x_edges)
    yc, yh = 0.5 * (y_edges[1:] + y_edges[:-1]), 0.5 * np.diff(y_edges)
    X = xc[None, :, None, None] + xh[None, :, None, None] * t[None, None, None, :]
    Y = yc[:, None, None, None] + yh[:, None, None, None] * t[None, None, :, None]
    vals = np.asarray(intensity(signal, X + 1j * Y))
    return 0.25 * np.einsum("ijkl,k,l->ij", vals, w, w)


@dataclass
class IntensityHistogram:
    grid: GridSpec
    x_edges: np.ndarray
    y_edges: np.ndarray
    counts: np.ndarray  # shape (len(y_edges)-1, len(x_edges)-1)
    n_realizations: int
    n_excluded: int = 0
    analytic: np.ndarray | None = None
    profile: RadialProfile | None = None

    @property
    def n_used(self):
        return self.n_realizations - self.n_excluded

    @property
    def bin_area(self):
        return np.outer(np.diff(self.y_edges), np.diff(self.x_edges))

    @property
    def density(self):
        return self.counts / self.n_used / self.bin_area

    @property
    def se(self):
        # Poisson standard error; empty bins use a floor of one count
        return np.sqrt(np.maximum(self.counts, 1)) / self.n_used / self.bin_area

    def z_scores(self):
        return (self.density - self.analytic) / self.se

    def fraction_within(self, k: float = 3.0) -> float:
        return float(np.mean(np.abs(self.z_scores()) <= k))

    def profile_density(self):
        p = self.profile
        dens = p.counts / self.n_used / p.widths
        se = np.sqrt(np.maximum(p.counts, 1)) / self.n_used / p.widths
        ana = None if p.analytic_counts is None else p.analytic_counts / p.widths
        return dens, se, ana

    def profile_fraction_within(self, k: float = 3.0) -> float:
        dens, se, ana = self.profile_density()
        return float(np.mean(np.abs(dens - ana) <= k * se))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_center_tau", "bin_center_omega", "count", "density_estimate", "se", "analytic_density"])
        xc = 0.5 * (self.x_edges[1:] + self.x_edges[:-1])
        yc = 0.5 * (self.y_edges[1:] + self.y_edges[:-1])
        dens, se = self.density, self.se
        for i, y in enumerate(yc):
            for j, x in enumerate(xc):
                ana = "" if self.analytic is None else repr(float(self.analytic[i, j]))
                w.writerow([repr(float(x)), repr(float(y)), int(self.counts[i, j]),
                            repr(float(dens[i, j])), repr(float(se[i, j])), ana])
        return buf.getvalue()

    def profile_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r_low", "r_high", "count", "density_estimate", "se", "analytic_density"])
        dens, se, ana = self.profile_density()
        e = self.profile.edges
        for j in range(len(dens)):
            w.writerow([repr(float(e[j])), repr(float(e[j + 1])), int(self.profile.counts[j]),
                        repr(float(dens[j])), repr(float(se[j])), "" if ana is None else repr(float(ana[j]))])
        return buf.getvalue()

    def summary(self) -> dict:
        out = {"n_realizations": self.n_realizations, "n_excluded": self.n_excluded,
               "total_zeros": int(self.counts.sum())}
        if self.analytic is not None:
            z = np.abs(self.z_scores())
            out.update(max_abs_z=float(z.max()), fraction_within_3se=float(np.mean(z <= 3)))
        if self.profile is not None and self.profile.analytic_counts is not None:
            dens, se, ana = self.profile_density()
            z = np.abs(dens - ana) / se
            out.update(profile_max_abs_z=float(z.max()), profile_fraction_within_3se=float(np.mean(z <= 3)))
        return out


def empirical_intensity(signal: SignalModel, grid: GridSpec, n: int, master_seed: int,
                        bin_size: float = 0.25, profile_edges=None, threads: int = 1,
                        batch_size: int = BATCH, stream: int = STREAM_ZEROS) -> IntensityHistogram:
    """Histogram of the zeros of ``n`` noisy realizations over ``grid``.

    ``profile_edges`` additionally bins ``r = pi |z|^2`` (used for the
    rotation-invariant Hermite family); the disc ``r <= edges[-1]`` must lie
    inside the grid.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    nx = max(1, int(round((grid.x1 - grid.x0) / bin_size)))
    ny = max(1, int(round((grid.y1 - grid.y0) / bin_size)))
    x_edges = np.linspace(grid.x0, grid.x1, nx + 1)
    y_edges = np.linspace(grid.y0, grid.y1, ny + 1)
    if profile_edges is not None:
        profile_edges = np.asarray(profile_edges, dtype=float)
        if math.sqrt(profile_edges[-1] / math.pi) > min(-grid.x0, grid.x1, -grid.y0, grid.y1):
            raise ValueError("radial profile extends beyond the grid")
    radius = grid.max_modulus() + 1.0

    def run(idx):
        batch = _noise_batch(signal, master_seed, idx, radius, stream)
        res = find_zeros_batch(batch, grid)
        H = np.zeros((ny, nx), dtype=np.int64)
        P = np.zeros(0 if profile_edges is None else len(profile_edges) - 1, dtype=np.int64)
        bad = []
        for i, zs in zip(idx, res):
            if zs is None:
                bad.append(i)
                continue
            h, _, _ = np.histogram2d(zs.locations.imag, zs.locations.real, bins=(y_edges, x_edges),
                                     weights=zs.multiplicities)
            H += h.astype(np.int64)
            if profile_edges is not None:
                p, _ = np.histogram(np.pi * np.abs(zs.locations) ** 2, bins=profile_edges,
                                    weights=zs.multiplicities)
                P += p.astype(np.int64)
        return H, P, bad

    parts = _map_batches(run, n, batch_size, threads)
    counts = sum(p[0] for p in parts)
    bad = [i for p in parts for i in p[2]]
    for i in bad:
        log.warning("realization %d (seed %d) excluded: zero search failed", i,
                    realization_seed(master_seed, i, stream))
    _check_exclusions(len(bad), n)

    prof = None
    if profile_edges is not None:
        ana = None
        if isinstance(signal, Hermite):
            ana = hermite_annulus_counts(profile_edges, signal.k, signal.gamma)
        prof = RadialProfile(profile_edges, sum(p[1] for p in parts), ana)
    return IntensityHistogram(grid, x_edges, y_edges, counts, n, len(bad),
                              _bin_average(signal, x_edges, y_edges), prof)


# --- counts -------------------------------------------------------------------------


@dataclass
class CountStatistics:
    mean: float
    variance: float
    std_error: float
    histogram: dict
    n_realizations: int
    n_excluded: int = 0

    def to_dict(self):
        return {
            "mean": self.mean, "variance": self.variance, "std_error": self.std_error,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "n_realizations": self.n_realizations, "n_excluded": self.n_excluded,
        }


def _region_counts(signal, region, n, master_seed, threads, batch_size, stream=STREAM_ZEROS):
    radius = region.max_modulus() + 1.0

    def run(idx):
        batch = _noise_batch(signal, master_seed, idx, radius, stream)
        return winding_numbers(batch, region)

    parts = _map_batches(run, n, batch_size, threads)
    w = np.concatenate([p[0] for p in parts])
    failed = np.concatenate([p[1] for p in parts])
    for i in np.flatnonzero(failed):
        log.warning("realization %d excluded: zero too close to the contour", i)
    _check_exclusions(int(failed.sum()), n)
    return w[~failed], int(failed.sum())


def count_statistics(signal: SignalModel, region, n: int, master_seed: int,
                     threads: int = 1, batch_size: int = 1024) -> CountStatistics:
    """Mean, variance and histogram of the number of zeros inside ``region``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    w, excluded = _region_counts(signal, region, n, master_seed, threads, batch_size)
    vals, cnt = np.unique(w, return_counts=True)
    m = len(w)
    var = float(np.var(w, ddof=1)) if m > 1 else 0.0
    # a mean of m integer counts resolves steps of 1/m, even when no variation was seen
    se = max(math.sqrt(var / m), 1.0 / m)
    return CountStatistics(float(np.mean(w)), var, se, dict(zip(map(int, vals), map(int, cnt))), n, excluded)


# --- supremum of the noise -------------------------------------------------------------


def _sup_samples(contour, n, discretization, master_seed, stream, batch_size, threads,
                 tail_tol=DEFAULT_TAIL_TOL):
    """Per-realization ``max_C exp(-pi|z|^2/2) Re B(xi)(z)`` on ``discretization`` points."""
    pts = contour.sample(discretization)
    N = truncation_degree(contour.max_modulus() + 1.0, tail_tol)

    def run(idx):
        xi = np.stack([standard_coefficients(realization_seed(master_seed, i, stream), N) for i in idx])
        batch = FieldBatch(None, xi, math.inf, tf=False)
        return batch.noise_normalized(pts).real.max(axis=1)

    return np.concatenate(_map_batches(run, n, batch_size, threads))


def default_discretization(contour) -> int:
    return max(64, int(math.ceil(64 * contour.length)))


@dataclass
class SupremumEstimate:
    contour: object
    mean: float  # estimate at the doubled discretization
    std_error: float
    n_realizations: int
    discretization: int
    coarse_mean: float
    doubling_ok: bool

    def to_dict(self):
        return {
            "mean": self.mean, "std_error": self.std_error, "n_realizations": self.n_realizations,
            "discretization": self.discretization, "coarse_mean": self.coarse_mean,
            "doubling_ok": self.doubling_ok,
        }


def estimate_sup_mean(contour, n: int, master_seed: int, discretization: int | None = None,
                      threads: int = 1, batch_size: int = 4096, stream: int = STREAM_SUP) -> SupremumEstimate:
    """Monte Carlo estimate of ``E sup_C exp(-pi|z|^2/2) Re B(xi)(z)``.

    The sup is taken on ``discretization`` and on twice as many points from the
    same realizations; the finer value is returned since a discrete max can only
    underestimate.
    """
    if discretization is None:
        discretization = default_discretization(contour)
    if discretization < 64 * contour.length:
        raise ValueError("discretization must be at least 64 points per unit contour length")
    coarse = _sup_samples(contour, n, discretization, master_seed, stream, batch_size, threads)
    fine = _sup_samples(contour, n, 2 * discretization, master_seed, stream, batch_size, threads)
    se = float(np.std(fine, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return SupremumEstimate(contour, float(fine.mean()), se, n, discretization, float(coarse.mean()),
                            bool(abs(fine.mean() - coarse.mean()) <= 2 * se))


@dataclass
class SupTailRow:
    u: float
    exceedance: float
    se: float
    bound: float
    ok: bool


def sup_tail_check(contour, n: int, master_seed: int, u_grid=None, m_hat: SupremumEstimate | None = None,
                   discretization: int | None = None, threads: int = 1, batch_size: int = 4096):
    """Empirical ``P(sup F > u)`` against ``exp(-(u - M)^2)`` for ``u >= M``.

    ``M`` comes from an independent estimate (``m_hat``, computed if absent).
    """
    if discretization is None:
        discretization = 2 * default_discretization(contour)
    if m_hat is None:
        m_hat = estimate_sup_mean(contour, n, master_seed, discretization // 2,
                                  threads=threads, batch_size=batch_size)
    M = m_hat.mean
    u_grid = M + np.linspace(0.0, 3.0, 10) if u_grid is None else np.asarray(u_grid, dtype=float)
    if np.any(u_grid < M):
        raise ValueError("u values must be >= the sup mean estimate")
    sups = _sup_samples(contour, n, discretization, master_seed, STREAM_TAIL, batch_size, threads)
    rows = []
    for u in u_grid:
        p = float(np.mean(sups > u))
        se = math.sqrt(p * (1 - p) / n)
        b = math.exp(-(u - M) ** 2)
        rows.append(SupTailRow(float(u), p, se, b, p <= b + 3 * se))
    return rows


# --- trapping -----------------------------------------------------------------------


@dataclass
class TrappingReport:
    region: object
    target_count: int
    empirical_prob: float
    n_realizations: int
    analytic_lower_bound: BoundReport
    count_histogram: dict
    wilson_95: tuple
    std_error: float
    verdict: str  # "pass", "fail" or "not-applicable"
    n_excluded: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "target_count": self.target_count,
            "empirical_prob": self.empirical_prob,
            "std_error": self.std_error,
            "wilson_95": list(self.wilson_95),
            "n_realizations": self.n_realizations,
            "n_excluded": self.n_excluded,
            "count_histogram": {str(k): v for k, v in sorted(self.count_histogram.items())},
            "analytic_lower_bound": self.analytic_lower_bound.to_dict(),
            "verdict": self.verdict,
            "details": self.details,
        }


def _contour_inf(signal, region, n_points=4096):
    z = region.sample(n_points)
    return float(np.min(spectrogram(signal, z)))


def trapping_experiment(signal: SignalModel, region, target_count: int, n: int, master_seed: int,
                        eps: float, m_hat: SupremumEstimate | None = None, n_sup: int = 10**4,
                        threads: int = 1, batch_size: int = 1024) -> TrappingReport:
    """Frequency of exactly ``target_count`` zeros in ``region`` against the analytic lower bound."""
    if not 0.0 < eps < 0.25:
        raise ValueError(f"eps must lie in (0, 1/4), got {eps}")
    if m_hat is None:
        m_hat = estimate_sup_mean(region, n_sup, master_seed, threads=threads)
    m = m_hat.mean

    ok: dict = {}
    details: dict = {"m_hat": m_hat.to_dict()}
    inf = _contour_inf(signal, region)
    if isinstance(signal, Hermite):
        k = signal.k
        on_circle = isinstance(region, Circle) and abs(region.center) == 0 \
            and abs(region.radius - math.sqrt(k / math.pi)) < 1e-12
        ok["trapping_circle"] = bool(on_circle and k >= 1)
        if k >= 1:
            thr = hermite_gamma_threshold(k, eps, m)
            details["gamma_threshold"] = thr
            ok["gamma_above_threshold"] = bool(signal.gamma >= thr * (1 - 1e-12))
            if on_circle:
                inf = hermite_circle_spectrogram(k, signal.gamma)
        ok["target_is_k"] = target_count == k
    elif isinstance(signal, ChirpPair):
        for chk in pair_trapping_assumptions(signal, m, eps):
            ok[chk.name] = chk.ok
            details[f"slack_{chk.name}"] = chk.slack
        if ok["unimodal_ridge"]:
            inf = min(inf, pair_contour_infimum(signal))
        fr = chirp_frame(signal)
        if signal.gamma1 == signal.gamma2:
            details["gamma_threshold"] = pair_gamma_threshold(fr.a, signal.b, eps, m)
        ok["target_is_one"] = target_count == 1
    else:
        ok["supported_family"] = False
    if is_zero_signal(signal):
        ok["nonzero_signal"] = False

    bound = BoundReport(inf, m, trapping_lower_bound(max(inf, 0.0), m), ok)

    w, excluded = _region_counts(signal, region, n, master_seed, threads, batch_size)
    vals, cnt = np.unique(w, return_counts=True)
    hist = dict(zip(map(int, vals), map(int, cnt)))
    used = len(w)
    hits = hist.get(target_count, 0)
    p = hits / used
    se = math.sqrt(p * (1 - p) / used)
    if all(ok.values()):
        verdict = "pass" if p >= bound.lower_bound - 3 * se else "fail"
    else:
        verdict = "not-applicable"
    return TrappingReport(region, target_count, p, n, bound, hist, wilson_interval(hits, used), se,
                          verdict, excluded, details)


def hermite_trapping_setup(k: int, eps: float, n_sup: int, master_seed: int, threads: int = 1):
    """Circle of radius sqrt(k/pi), its sup estimate and the Hermite signal at the SNR threshold."""
    region = Circle(0j, math.sqrt(k / math.pi))
    m_hat = estimate_sup_mean(region, n_sup, master_seed, threads=threads)
    gamma = hermite_gamma_threshold(k, eps, m_hat.mean)
    return Hermite(k, gamma), region, m_hat


def pair_trapping_setup(a: float, eps: float, n_sup: int, master_seed: int, b: float = 0.0,
                        a1: float = 0.0, cell: int = 0, threads: int = 1):
    """Equal-SNR chirp pair at rotated distance ``a`` with gamma at the threshold for ``C_cell``."""
    c = 1.0 / math.sqrt(1.0 + 4.0 * b * b)
    shape = ChirpPair(a1, a1 + a / c, b, 1.0, 1.0)
    region = rectangle_cn(shape, cell)
    m_hat = estimate_sup_mean(region, n_sup, master_seed, threads=threads)
    gamma = pair_gamma_threshold(a, b, eps, m_hat.mean)
    return ChirpPair(a1, a1 + a / c, b, gamma, gamma), region, m_hat

