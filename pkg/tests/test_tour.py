import math

import numpy as np
import pytest

from config.env_config import env
from schemas.tour_schema import CountBasis
from services.instance import generate_random
from services.tour import (
    EnumerationCapError,
    TourArgumentError,
    TourDimensionError,
    can_enumerate,
    canonical_tour,
    enumerate_histogram,
    enumerate_tours,
    exact_mean,
    exact_variance,
    histogram,
    run_enumeration,
    sample_lengths,
    sample_moments,
    tour_length,
)
from tests.conftest import explicit_instance


# =========================
# Tours
# =========================

def test_length_is_rotation_and_reversal_invariant(random8):
    order = [3, 1, 7, 0, 5, 2, 6, 4]
    length = tour_length(order, random8)
    assert tour_length(order[3:] + order[:3], random8) == length
    assert tour_length(order[::-1], random8) == length


def test_length_needs_every_node(random8):
    with pytest.raises(TourDimensionError):
        tour_length([0, 1, 2], random8)


def test_canonical_form():
    tour = canonical_tour([3, 1, 0, 2, 4])
    assert tour.order == [0, 1, 3, 4, 2]
    assert tour.is_canonical
    assert canonical_tour([0, 4, 3, 2, 1]).order == [0, 1, 2, 3, 4]


# =========================
# Enumeration
# =========================

def test_enumeration_visits_each_cycle_once(random8):
    moments = enumerate_tours(random8, workers=1)
    assert moments.count == math.factorial(7) // 2
    assert moments.count_basis == CountBasis.EXACT_ENUMERATION


def test_unit_square_extremes(unit_square):
    result = run_enumeration(unit_square, workers=1)
    assert result.moments.count == 3
    assert result.best.length == pytest.approx(4.0)
    assert result.worst.length == pytest.approx(2.0 + 2.0 * math.sqrt(2.0))
    assert result.moments.mean == pytest.approx((4.0 + 2.0 * (2.0 + 2.0 * math.sqrt(2.0))) / 3.0)
    assert result.best.is_canonical


def test_enumerated_extremes_are_real_tours(random8):
    result = run_enumeration(random8, workers=1)
    assert tour_length(result.best.order, random8) == pytest.approx(result.best.length)
    assert tour_length(result.worst.order, random8) == pytest.approx(result.worst.length)
    assert result.moments.min == result.best.length


def test_kernel_matches_visitor_pass(random8):
    seen = []
    slow = run_enumeration(random8, visitor=lambda tour, length: seen.append(length))
    fast = run_enumeration(random8, workers=1)
    assert len(seen) == fast.moments.count
    assert slow.moments.mean == pytest.approx(fast.moments.mean, rel=1e-12)
    assert slow.moments.variance == pytest.approx(fast.moments.variance, rel=1e-9)
    assert slow.moments.skewness == pytest.approx(fast.moments.skewness, rel=1e-7, abs=1e-9)


def test_worker_count_does_not_change_moments(random8):
    single = enumerate_tours(random8, workers=1)
    pooled = enumerate_tours(random8, workers=2)
    assert pooled.mean == single.mean
    assert pooled.variance == single.variance
    assert pooled.kurtosis == single.kurtosis


def test_enumeration_limits():
    assert can_enumerate(12)
    assert not can_enumerate(13)
    assert can_enumerate(13, allow_long=True)
    assert not can_enumerate(15, allow_long=True)
    with pytest.raises(EnumerationCapError):
        enumerate_tours(generate_random(13, seed=1))
    with pytest.raises(EnumerationCapError):
        enumerate_tours(generate_random(15, seed=1), allow_long=True)


# =========================
# Closed-form moments
# =========================

def test_closed_form_matches_enumeration(random8):
    moments = enumerate_tours(random8, workers=1)
    assert exact_mean(random8) == pytest.approx(moments.mean, rel=1e-12)
    assert exact_variance(random8) == pytest.approx(moments.variance, rel=1e-9)


def test_closed_form_on_tsplib_costs(ulysses16):
    sub = explicit_instance(ulysses16.cost_matrix().values[:9, :9])
    moments = enumerate_tours(sub, workers=1)
    assert exact_mean(sub) == pytest.approx(moments.mean, rel=1e-12)
    assert exact_variance(sub) == pytest.approx(moments.variance, rel=1e-9)


@pytest.mark.parametrize("n", [5, 6, 7, 8, 9])
def test_closed_form_matches_enumeration_across_seeds(n):
    for seed in range(20):
        instance = generate_random(n, seed=seed)
        moments = enumerate_tours(instance, workers=1)
        assert exact_mean(instance) == pytest.approx(moments.mean, rel=1e-9)
        assert exact_variance(instance) == pytest.approx(moments.variance, rel=1e-9)


def test_burma14_closed_form_moments(burma14):
    # Off-diagonal GEO costs sum to 43369 over the 91 edges
    assert exact_mean(burma14) == pytest.approx(2.0 * 43369 / 13, rel=1e-12)
    assert exact_mean(burma14) == pytest.approx(6672.1538, abs=1e-4)
    assert exact_variance(burma14) == pytest.approx(503214.719921, rel=1e-9)


def test_equal_costs_have_zero_variance(uniform_costs):
    assert exact_mean(uniform_costs) == pytest.approx(6.0)
    assert exact_variance(uniform_costs) == 0.0


def test_small_instances_fall_back_to_enumeration(unit_square):
    expected = enumerate_tours(unit_square, workers=1).variance
    assert exact_variance(unit_square) == pytest.approx(expected)


# =========================
# Sampling
# =========================

def test_sampling_is_reproducible(random30):
    first = sample_moments(random30, sample_size=5000, seed=3, workers=1)
    second = sample_moments(random30, sample_size=5000, seed=3, workers=1)
    assert first == second
    assert first.count_basis == CountBasis.SAMPLED
    assert first.count == 5000


def test_sampled_mean_near_exact_mean(random30):
    sampled = sample_moments(random30, sample_size=20000, seed=9, workers=1)
    assert abs(sampled.mean - exact_mean(random30)) < 5.0 * sampled.mean_standard_error


def test_sample_lengths_match_sampled_moments(random30):
    lengths = sample_lengths(random30, 3000, seed=4)
    moments = sample_moments(random30, sample_size=3000, seed=4, workers=1)
    assert lengths.size == 3000
    assert float(lengths.mean()) == pytest.approx(moments.mean, rel=1e-12)


def test_sample_size_floor(random30):
    with pytest.raises(TourArgumentError):
        sample_moments(random30, sample_size=999, seed=1)


def test_sampled_moments_agree_with_enumeration():
    instance = generate_random(10, seed=5)
    exact = enumerate_tours(instance, workers=1)
    size = 200_000
    sampled = sample_moments(instance, sample_size=size, seed=21, workers=1)
    sigma2 = exact.variance
    assert abs(sampled.mean - exact.mean) < 4.0 * math.sqrt(sigma2 / size)
    assert abs(sampled.variance - sigma2) < 4.0 * sigma2 * math.sqrt((exact.kurtosis - 1.0) / size)
    assert abs(sampled.skewness - exact.skewness) < 4.0 * math.sqrt(6.0 / size)
    assert abs(sampled.kurtosis - exact.kurtosis) < 4.0 * math.sqrt(24.0 / size)


def test_sampling_does_not_depend_on_worker_count(random30, monkeypatch):
    monkeypatch.setattr(env, "sample_block", 1000)
    single = sample_moments(random30, sample_size=5000, seed=3, workers=1)
    pooled = sample_moments(random30, sample_size=5000, seed=3, workers=3)
    assert pooled == single
    assert np.array_equal(sample_lengths(random30, 5000, seed=3), sample_lengths(random30, 5000, seed=3))


# =========================
# Histograms
# =========================

def test_histogram_clamps_out_of_range_values():
    result = histogram([0.0, 0.5, 1.0, 2.0, -1.0], bins=2, hist_range=(0.0, 1.0))
    assert result.counts == [2, 3]
    assert result.total == 5
    assert sum(d * 0.5 for d in result.density) == pytest.approx(1.0)


def test_histogram_argument_checks():
    with pytest.raises(TourArgumentError):
        histogram([1.0], bins=1, hist_range=(0.0, 1.0))
    with pytest.raises(TourArgumentError):
        histogram([1.0], bins=4, hist_range=(1.0, 1.0))


def test_enumerated_histogram_covers_all_tours(random8):
    result = enumerate_histogram(random8, bins=16, workers=1)
    assert result.total == math.factorial(7) // 2
    assert len(result.bin_centers) == 16
    assert np.isclose(sum(d * (b - a) for d, a, b in zip(result.density, result.bin_edges, result.bin_edges[1:])), 1.0)
    assert result.to_csv().splitlines()[0] == "bin_center,density"


@pytest.mark.slow
def test_burma14_optimum(burma14):
    result = run_enumeration(burma14, allow_long=True)
    assert result.best.length == 3323.0
