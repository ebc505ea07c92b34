import math

import numpy as np
import pytest

from tfzeros.contours import Circle, Polygon, chirp_strip, rectangle, rectangle_cn
from tfzeros.experiments import (
    ExclusionError,
    _check_exclusions,
    count_statistics,
    empirical_intensity,
    estimate_sup_mean,
    sup_tail_check,
    trapping_experiment,
    wilson_interval,
)
from tfzeros.signals import ChirpPair, Hermite, LinearChirp
from tfzeros.zeros import GridSpec


def test_pure_noise_histogram_is_flat():
    h = empirical_intensity(LinearChirp(0.0, 0.4, 0.0), GridSpec.square(1.0), 400, 5)
    assert np.allclose(h.analytic, 1.0)
    assert h.fraction_within(3.0) >= 0.9
    assert h.n_excluded == 0


def test_standard_errors_are_calibrated():
    h = empirical_intensity(Hermite(1, 0.0), GridSpec.square(4.0), 500, 17)
    assert h.counts.size >= 1000
    assert 1 - h.fraction_within(3.0) <= 0.01


def test_histogram_identical_for_any_thread_count():
    args = (ChirpPair(-1.0, 0.0, 0.4, 10.0, 4.0), GridSpec(-1.5, -1.5, 1.0, 1.0), 64, 3)
    a = empirical_intensity(*args, threads=1, batch_size=16)
    b = empirical_intensity(*args, threads=3, batch_size=16)
    assert a.to_csv() == b.to_csv()


def test_hermite_radial_profile_matches():
    edges = np.linspace(0.0, 6.0, 31)
    h = empirical_intensity(Hermite(1, 100.0), GridSpec.square(1.4), 1000, 8, profile_edges=edges)
    assert h.profile_fraction_within(3.0) >= 0.95
    assert "analytic_density" in h.profile_csv().splitlines()[0]


def test_profile_must_fit_grid():
    with pytest.raises(ValueError):
        empirical_intensity(Hermite(1), GridSpec.square(1.0), 1, 0, profile_edges=[0, 6.0])


def test_histogram_csv_header():
    h = empirical_intensity(Hermite(1), GridSpec.square(0.5), 4, 0)
    assert h.to_csv().splitlines()[0] == \
        "bin_center_tau,bin_center_omega,count,density_estimate,se,analytic_density"


@pytest.mark.parametrize("gamma", [0.0, 20.0, 200.0])
def test_ball_count_independent_of_snr(gamma):
    st = count_statistics(Hermite(2, gamma), Circle(0, math.sqrt(2 / math.pi)), 2000, 4)
    assert abs(st.mean - 2.0) <= 3 * st.std_error
    assert sum(st.histogram.values()) == 2000


def test_unit_square_count_for_pure_noise():
    st = count_statistics(Hermite(3, 0.0), rectangle(-0.5, -0.5, 0.5, 0.5), 4000, 6)
    assert abs(st.mean - 1.0) <= 3 * st.std_error


def test_single_point_sup_is_centered():
    est = estimate_sup_mean(Polygon((0.3 + 0.2j,)), 20_000, 1, discretization=1)
    assert abs(est.mean) <= 3 * est.std_error


def test_sup_invariant_under_conjugation():
    c = Circle(0.4 + 0.3j, 0.5)
    a = estimate_sup_mean(c, 20_000, 1)
    b = estimate_sup_mean(c.conjugate(), 20_000, 2)
    assert abs(a.mean - b.mean) <= 3 * math.hypot(a.std_error, b.std_error)


def test_sup_discretization_floor_and_refinement():
    c = Circle(0, 1.0)
    with pytest.raises(ValueError):
        estimate_sup_mean(c, 10, 0, discretization=100)
    est = estimate_sup_mean(c, 5000, 0)
    assert est.mean >= est.coarse_mean and est.doubling_ok


def test_sup_tail_rows_monotone_and_bounded():
    rows = sup_tail_check(Circle(0, math.sqrt(1 / math.pi)), 5000, 3)
    assert rows[0].bound == 1.0
    ex = [r.exceedance for r in rows]
    assert all(a >= b for a, b in zip(ex, ex[1:]))
    assert all(r.ok for r in rows)


def test_sup_tail_rejects_u_below_mean():
    c = Circle(0, 0.5)
    m = estimate_sup_mean(c, 1000, 0)
    with pytest.raises(ValueError):
        sup_tail_check(c, 100, 0, u_grid=[m.mean - 1], m_hat=m)


def test_trapping_without_signal_is_not_applicable():
    region = Circle(0, math.sqrt(1 / math.pi))
    rep = trapping_experiment(Hermite(1, 0.0), region, 1, 200, 0, 0.05, n_sup=2000)
    assert rep.verdict == "not-applicable"
    assert not all(rep.analytic_lower_bound.assumptions_ok.values())


def test_trapping_with_violated_separation_is_not_applicable():
    pair = ChirpPair(0.0, 0.3, 0.0, 100.0, 1.0)
    rep = trapping_experiment(pair, rectangle_cn(pair, 0), 1, 200, 0, 0.05, n_sup=2000)
    assert rep.verdict == "not-applicable"
    assert rep.analytic_lower_bound.assumptions_ok["separation"] is False


def test_trapping_report_consistency():
    region = Circle(0, math.sqrt(1 / math.pi))
    rep = trapping_experiment(Hermite(1, 80.0), region, 1, 500, 2, 0.05, n_sup=5000)
    assert rep.empirical_prob == rep.count_histogram.get(1, 0) / rep.n_realizations
    lo, hi = rep.wilson_95
    assert lo <= rep.empirical_prob <= hi
    assert rep.verdict == "pass"
    assert set(rep.to_dict()) >= {"empirical_prob", "analytic_lower_bound", "verdict", "count_histogram"}


def test_trapping_eps_range():
    with pytest.raises(ValueError):
        trapping_experiment(Hermite(1, 80.0), Circle(0, 0.5), 1, 10, 0, 0.3)


def test_strip_count_against_closed_form():
    from tfzeros.analytic import expected_count_chirp_strip

    ch = LinearChirp(0.0, 0.4, 10.0)
    st = count_statistics(ch, chirp_strip(ch, 0.5), 3000, 12)
    assert abs(st.mean - expected_count_chirp_strip(0.5, 0.4, 10.0)) <= 3 * st.std_error


def test_exclusion_limit():
    _check_exclusions(1, 1000)
    with pytest.raises(ExclusionError):
        _check_exclusions(2, 1000)


def test_wilson_interval():
    lo, hi = wilson_interval(95, 100)
    assert lo < 0.95 < hi
    assert wilson_interval(100, 100)[1] == 1.0
