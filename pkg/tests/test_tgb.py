import math

import numpy as np
import pytest

from schemas.beta_schema import GBParams, TruncationWindow
from services import tgb as tgb_service
from services.betadist import DomainError, fit_from_bound_and_moments, fit_from_four_moments, gb_moments, truncated_mean
from services.tgb import (
    PUBLISHED_INSTANCE_ROWS,
    PUBLISHED_RANDOM_ROWS,
    TargetRatioError,
    approximation_ratio,
    iterate_tgb,
    iteration_formula,
    min_iterations,
    printed_iteration_formula,
    published_instance_params,
    random_reference_table,
    ratio_table,
    regression_params,
    regression_upper_bound_error,
    schedule_density_series,
    upper_bound_study,
    window_bound,
)


# =========================
# Ratios
# =========================

def test_ratio_after_one_iteration_is_one_and_a_half():
    assert approximation_ratio(10.0, 1) == 1.5


@pytest.mark.parametrize("alpha,steps,expected", [
    (17.52, 91, 1.0042),
    (57.40, 101, 1.0900),
    (115.54, 2451, 1.0000),
])
def test_published_ratios(alpha, steps, expected):
    assert round(approximation_ratio(alpha, steps + 1), 4) == expected


def test_ratio_decreases_with_iterations():
    ratios = [approximation_ratio(5.0, K) for K in range(1, 50)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] > 1.0


def test_ratio_domain():
    with pytest.raises(DomainError):
        approximation_ratio(0.0, 3)
    with pytest.raises(DomainError):
        approximation_ratio(2.0, 0)


@pytest.mark.parametrize("alpha,target,steps", [(17.52, 1.0042, 91), (57.40, 1.09, 101)])
def test_min_iterations_reproduces_table(alpha, target, steps):
    K = min_iterations(alpha, target)
    assert K - 1 == steps
    assert approximation_ratio(alpha, K) <= target < approximation_ratio(alpha, K - 1)


def test_min_iterations_target_range():
    for target in (1.0, 1.5, 2.0):
        with pytest.raises(TargetRatioError):
            min_iterations(3.0, target)


@pytest.mark.parametrize("alpha", [0.5, 3.0, 17.52, 57.40, 400.0])
@pytest.mark.parametrize("target", [1.001, 1.01, 1.1, 1.3, 1.49])
def test_min_iterations_inverts_ratio(alpha, target):
    K = min_iterations(alpha, target)
    assert approximation_ratio(alpha, K) <= target
    if K > 1:
        assert approximation_ratio(alpha, K - 1) > target


def test_min_iterations_near_one():
    K = min_iterations(115.54, 1.0 + 1e-9)
    expected = math.log(2e-9) / math.log(116.54 / 117.54)
    assert abs((K - 1) - expected) <= 1.0


def test_iteration_formula_keeps_printed_value():
    formula = iteration_formula(17.52, 1.0042)
    assert formula.min_iterations == 92
    assert formula.printed_formula_value == pytest.approx(printed_iteration_formula(17.52, 1.0042))
    assert math.isfinite(formula.printed_formula_value)


def test_ratio_table_recomputes_rows():
    rows = ratio_table()
    assert len(rows) == 10
    by_name = {row.instance: row for row in rows}
    assert round(by_name["ulysses22"].ratio, 4) == 1.0042
    assert by_name["berlin52"].iterations == 101
    custom = ratio_table([("toy", 1.0, 0)])
    assert custom[0].ratio == 1.5


# =========================
# Schedule
# =========================

def test_schedule_decreases_within_bound():
    p = regression_params(50)
    schedule = iterate_tgb(p, max_K=60, stop_epsilon=1e-12)
    first = schedule.iterations[0]
    assert first.K == 1 and first.b_hat is None and first.mu_t == pytest.approx(1.5 * p.A)
    mus = [it.mu_t for it in schedule.iterations]
    assert all(b <= a for a, b in zip(mus, mus[1:]))
    assert all(it.mu_t >= p.A for it in schedule.iterations)
    for it in schedule.iterations:
        assert it.mu_t <= it.ratio_bound * p.A * (1.0 + 1e-12)
    assert not schedule.first_window_clamped


def test_schedule_windows_follow_previous_mean():
    p = GBParams(alpha=4.0, beta=6.0, A=10.0, B=40.0)
    schedule = iterate_tgb(p, max_K=5, stop_epsilon=1e-15)
    for previous, current in zip(schedule.iterations, schedule.iterations[1:]):
        assert current.b_hat == pytest.approx((previous.mu_t - p.A) / p.width)


def test_normalized_mean_respects_window_bound():
    p = GBParams(alpha=4.0, beta=6.0, A=10.0, B=40.0)
    schedule = iterate_tgb(p, max_K=8, stop_epsilon=1e-15)
    for it in schedule.iterations:
        assert (it.mu_t - p.A) / p.width <= window_bound(p, it.K) * (1.0 + 1e-12)


def test_schedule_stops_at_epsilon():
    p = GBParams(alpha=2.0, beta=3.0, A=1.0, B=5.0)
    schedule = iterate_tgb(p, max_K=10_000, stop_epsilon=1e-3)
    assert schedule.converged_at is not None
    assert schedule.final.mu_t - p.A < 1e-3 * p.A


def test_clamped_first_window():
    p = GBParams(alpha=3.0, beta=3.0, A=10.0, B=12.0)
    schedule = iterate_tgb(p, max_K=3)
    assert schedule.first_window_clamped
    assert schedule.iterations[1].b_hat == 1.0


def test_schedule_needs_positive_bound():
    with pytest.raises(DomainError):
        iterate_tgb(GBParams(alpha=2.0, beta=2.0, A=0.0, B=1.0), max_K=3)


def _random_valid_params(rng) -> GBParams:
    # alpha, beta > 1 and B - A >= 0.5 A keep the first window inside the support
    A = float(rng.uniform(1.0, 100.0))
    return GBParams(
        alpha=float(rng.uniform(1.05, 60.0)),
        beta=float(rng.uniform(1.05, 60.0)),
        A=A,
        B=A * (1.0 + float(rng.uniform(0.5, 6.0))),
    )


def _assert_dominated(p: GBParams, max_K: int) -> None:
    schedule = iterate_tgb(p, max_K=max_K, stop_epsilon=1e-15)
    for it in schedule.iterations:
        assert it.mu_t <= approximation_ratio(p.alpha, it.K) * p.A * (1.0 + 1e-12)
        assert (it.mu_t - p.A) / p.width <= window_bound(p, it.K) * (1.0 + 1e-12)


def test_schedule_dominance_over_random_draws():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        _assert_dominated(_random_valid_params(rng), max_K=40)


@pytest.mark.parametrize("name", sorted(PUBLISHED_INSTANCE_ROWS))
def test_schedule_dominance_on_published_fits(name):
    _assert_dominated(published_instance_params(name), max_K=92)


def test_first_truncated_mean_bound():
    rng = np.random.default_rng(7)
    for _ in range(200):
        p = _random_valid_params(rng)
        first = truncated_mean(p, TruncationWindow(b_hat=0.5 * p.A / p.width))
        assert first <= p.A + 0.5 * p.A * (p.alpha + 1.0) / (p.alpha + 2.0) * (1.0 + 1e-12)


def test_small_shapes_only_warn():
    p = GBParams(alpha=0.5, beta=0.8, A=1.0, B=10.0)
    schedule = iterate_tgb(p, max_K=20, stop_epsilon=1e-15)
    assert len(schedule.iterations) == 20
    assert all(it.mu_t >= p.A for it in schedule.iterations)


def test_density_series():
    p = GBParams(alpha=4.0, beta=6.0, A=10.0, B=40.0)
    schedule = iterate_tgb(p, max_K=4, stop_epsilon=1e-15)
    rows = schedule_density_series(schedule, [1, 3], points=50)
    assert len(rows) == 50
    assert set(rows[0]) == {"x", "gb", "K=1", "K=3"}
    assert rows[0]["x"] == p.A and rows[-1]["x"] == p.B
    # Truncated densities vanish beyond their window
    assert rows[-1]["K=3"] == 0.0
    with pytest.raises(DomainError):
        schedule_density_series(schedule, [9])


# =========================
# Random-instance regression
# =========================

def test_regression_at_one_hundred():
    p = regression_params(100)
    assert p.alpha == pytest.approx(159.804)
    assert p.beta == pytest.approx(95.826)
    assert p.A == pytest.approx(7.7349)
    assert p.B == pytest.approx(75.8507)


def test_regression_lower_end():
    assert regression_params(20).alpha == pytest.approx(6.228)


def test_regression_below_fitted_range_only_warns(monkeypatch):
    messages = []
    monkeypatch.setattr(tgb_service.logger, "warning", messages.append)
    p = regression_params(19)
    assert p.alpha == pytest.approx(1.9197 * 19 - 32.166)
    assert any("fitted range" in message for message in messages)
    with pytest.raises(DomainError):
        regression_params(16)


def test_regression_extrapolates_above_range():
    assert regression_params(150).B > regression_params(100).B


def test_reference_table_flags_discrepancies():
    rows = random_reference_table()
    assert [row.n for row in rows] == sorted(PUBLISHED_RANDOM_ROWS)
    by_n = {row.n: row for row in rows}
    assert by_n[90].discrepancy
    assert by_n[90].published.alpha == 179.68


def test_upper_bound_study_rows(random30):
    rows = upper_bound_study([random30], sample_size=20000, seed=1)
    assert len(rows) == 1
    row = rows[0]
    assert row.envelope == 0.065
    assert row.exceeds == (abs(row.relative_error) > row.envelope)
    assert row.A < row.B_heuristic


def test_regression_upper_bound_error_is_relative():
    error = regression_upper_bound_error(30, seed=1)
    assert 0.0 <= error < 1.0


# =========================
# Published TSPLIB fits
# =========================

@pytest.mark.parametrize("name", sorted(PUBLISHED_INSTANCE_ROWS))
def test_published_fit_round_trips_through_moments(name):
    p = published_instance_params(name)
    m = gb_moments(p)
    bounded = fit_from_bound_and_moments(p.A, m.mean, m.variance, m.skewness)
    assert bounded.alpha == pytest.approx(p.alpha, rel=1e-4)
    assert bounded.beta == pytest.approx(p.beta, rel=1e-4)
    assert bounded.B == pytest.approx(p.B, rel=1e-4)
    pearson = fit_from_four_moments(m)
    assert (pearson.alpha, pearson.beta) == pytest.approx((p.alpha, p.beta), rel=1e-4)
    assert (pearson.A, pearson.B) == pytest.approx((p.A, p.B), rel=1e-4)


def test_published_fit_lookup():
    p = published_instance_params("ulysses22")
    assert (p.A, p.B, p.alpha, p.beta) == (75.3, 241.5, 17.52, 12.79)
    with pytest.raises(DomainError):
        published_instance_params("att48")
