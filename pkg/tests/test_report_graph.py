import pytest

from graphs.report_graph import STAGES, build_report_graph, tgb_report
from schemas.tgb_schema import ASource, ReportOptions
from schemas.tour_schema import CountBasis
from services.tour import run_enumeration

FAST = ReportOptions(sample_size=5000, seed=3, workers=1, max_K=30)


def test_graph_runs_every_stage_in_order():
    graph = build_report_graph()
    nodes = set(graph.get_graph().nodes)
    assert set(STAGES) <= nodes


def test_small_instance_uses_enumeration(random8):
    report = tgb_report(random8, FAST)
    exact = run_enumeration(random8, workers=1)
    assert report.A_source == ASource.ENUMERATION
    assert report.A == exact.best.length
    assert report.B_enumerated == exact.worst.length
    assert report.moments.count_basis == CountBasis.EXACT_ENUMERATION
    # The max-tour heuristic never overshoots the true maximum
    assert report.relative_errors["B_heuristic_vs_enumerated"] <= 1e-12
    assert report.kopt_length >= report.A
    assert report.relative_errors["kopt_vs_A"] >= 0.0


def test_larger_instance_samples_moments(random30):
    report = tgb_report(random30, FAST)
    assert report.A_source == ASource.HEURISTIC_BEST
    assert report.A == min(report.christofides_length, report.kopt_length)
    assert report.B_enumerated is None
    assert report.moments.sample_size == 5000
    assert any("sampled" in warning for warning in report.warnings)


def test_completed_report_has_schedule(two_cheap_edges):
    report = tgb_report(two_cheap_edges, FAST)
    assert "fit" not in report.stage_errors
    assert report.A == 98.0 and report.moments.mean == pytest.approx(99.0)
    assert report.fitted.alpha == pytest.approx(0.25, rel=1e-6)
    assert report.fitted.beta == pytest.approx(0.25, rel=1e-6)
    assert report.fitted.B == pytest.approx(100.0, rel=1e-9)
    assert report.schedule.iterations[0].mu_t == pytest.approx(1.5 * report.A)
    assert report.schedule.first_window_clamped
    assert "mu_final_vs_kopt" in report.relative_errors
    row = report.csv_row()
    assert row["instance"] == "cheap5" and row["alpha"] == report.fitted.alpha


def test_failed_stage_does_not_abort(uniform_costs):
    report = tgb_report(uniform_costs, FAST)
    assert report.A == pytest.approx(6.0)
    assert report.stage_errors["fit"].startswith("DegenerateDistributionError")
    assert report.stage_errors["schedule"].startswith("skipped")
    assert report.fitted is None and report.schedule is None
    assert report.relative_errors["kopt_vs_A"] == 0.0


def test_equal_costs_are_reported_as_degenerate(uniform5):
    report = tgb_report(uniform5, FAST)
    assert report.moments.variance == 0.0
    assert report.stage_errors["fit"].startswith("DegenerateDistributionError")


def test_target_ratio_reported(two_cheap_edges):
    options = FAST.model_copy(update={"target_ratio": 1.05})
    report = tgb_report(two_cheap_edges, options)
    assert report.iteration_formula.target_ratio == 1.05
    # 0.5 (1 - 1/2.25)^(K-1) <= 0.05 first holds at K = 5
    assert report.iteration_formula.min_iterations == 5
