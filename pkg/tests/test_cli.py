import json

import pytest
from click.testing import CliRunner

from main import cli, run


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def instance_file(runner, tmp_path):
    path = tmp_path / "random8.json"
    result = runner.invoke(cli, ["gen", "--n", "8", "--seed", "3", "--out", str(path)])
    assert result.exit_code == 0, result.output
    return path


def _envelope(result):
    assert result.exit_code == 0, result.output
    return json.loads(result.stdout)


def test_gen_writes_envelope(runner):
    document = _envelope(runner.invoke(cli, ["gen", "--n", "6", "--seed", "1"]))
    assert document["tool"] == "tgb-tsp"
    assert document["command"] == "gen"
    assert document["seeds"] == {"seed": 1}
    assert document["result"]["n"] == 6
    assert len(document["instance_checksum"]) == 64


def test_gen_is_reproducible(runner):
    first = _envelope(runner.invoke(cli, ["gen", "--n", "6", "--seed", "4"]))
    second = _envelope(runner.invoke(cli, ["gen", "--n", "6", "--seed", "4"]))
    assert first["result"] == second["result"]
    assert first["instance_checksum"] == second["instance_checksum"]


def test_exact_moments_from_generated_instance(runner, instance_file):
    document = _envelope(runner.invoke(cli, ["moments", "--instance", str(instance_file), "--exact"]))
    assert document["result"]["count_basis"] == "exact-enumeration"
    assert document["result"]["count"] == 2520


def test_instance_from_stdin(runner, instance_file):
    text = instance_file.read_text(encoding="utf-8")
    document = _envelope(runner.invoke(cli, ["enumerate", "--format", "json"], input=text))
    assert document["result"]["best"]["order"][0] == 0


def test_tsplib_from_stdin(runner, data_dir):
    text = (data_dir / "burma14.tsp").read_text(encoding="utf-8")
    document = _envelope(runner.invoke(cli, ["christofides"], input=text))
    assert document["result"]["method"] == "christofides"
    assert document["result"]["length"] >= 3323


def test_kopt_reports_start_and_improved(runner, data_dir):
    document = _envelope(runner.invoke(
        cli, ["kopt", "--tsplib", str(data_dir / "ulysses16.tsp"), "--k", "2", "--start", "nearest-neighbor"]
    ))
    assert document["result"]["improved"]["length"] <= document["result"]["start"]["length"]


def test_maxtsp(runner, instance_file):
    document = _envelope(runner.invoke(cli, ["maxtsp", "--instance", str(instance_file)]))
    assert document["result"]["method"] == "max-transform"


def test_histogram_defaults_to_csv(runner, instance_file):
    result = runner.invoke(cli, ["histogram", "--instance", str(instance_file), "--bins", "10"])
    assert result.exit_code == 0, result.output
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "bin_center,density"
    assert len(lines) == 11


def test_histogram_needs_two_bins(runner, instance_file):
    result = runner.invoke(cli, ["histogram", "--instance", str(instance_file), "--bins", "1"])
    assert result.exit_code == 2


def test_exact_moments_above_cap_label_sampled_shape(runner):
    generated = runner.invoke(cli, ["gen", "--n", "15", "--seed", "2"])
    document = _envelope(runner.invoke(cli, ["moments", "--exact", "--sample-size", "2000"], input=generated.stdout))
    assert document["result"]["count_basis"] == "sampled"
    assert document["result"]["closed_form_fields"] == ["mean", "variance"]
    assert document["result"]["sample_size"] == 2000


def test_fit_from_given_moments(runner):
    document = _envelope(runner.invoke(cli, [
        "fit", "--lower", "100", "--mean", "129.41176470588235",
        "--variance", "115.31190926275992", "--skewness", "0.40360",
    ]))
    (report,) = document["result"]
    assert report["method"] == "bound-and-moments"
    assert report["params"]["A"] == 100.0


def test_fit_lower_bound_above_mean_fails(runner):
    result = runner.invoke(cli, ["fit", "--lower", "10", "--mean", "5", "--variance", "1", "--skewness", "0.1"])
    assert result.exit_code == 1
    assert "DomainError" in result.output


def test_fit_needs_lower_or_kurtosis(runner):
    result = runner.invoke(cli, ["fit", "--mean", "5", "--variance", "1", "--skewness", "0.1"])
    assert result.exit_code == 2


def test_tgb_ratio_arithmetic(runner):
    document = _envelope(runner.invoke(cli, ["tgb", "--alpha", "17.52", "--iterations", "92"]))
    assert round(document["result"]["ratio"], 4) == 1.0042
    document = _envelope(runner.invoke(cli, ["tgb", "--alpha", "17.52", "--target", "1.0042"]))
    assert document["result"]["iteration_formula"]["min_iterations"] == 92


def test_tgb_bad_target_exits_one(runner):
    result = runner.invoke(cli, ["tgb", "--alpha", "2", "--target", "2"])
    assert result.exit_code == 1
    assert "TargetRatioError" in result.output


def test_tgb_schedule_from_published_fit(runner):
    document = _envelope(runner.invoke(cli, ["tgb", "--published", "ulysses22", "--max-k", "92"]))
    schedule = document["result"]
    assert schedule["params"]["alpha"] == 17.52 and schedule["params"]["A"] == 75.3
    assert len(schedule["iterations"]) == 92
    assert all(it["mu_t"] <= it["ratio_bound"] * 75.3 * (1 + 1e-12) for it in schedule["iterations"])


def test_tgb_series_csv(runner):
    result = runner.invoke(cli, [
        "tgb", "--alpha", "4", "--beta", "6", "--lower", "10", "--upper", "40",
        "--max-k", "4", "--series", "1,2", "--format", "csv",
    ])
    assert result.exit_code == 0, result.output
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "x,gb,K=1,K=2"
    assert len(lines) == 201


def test_tgb_series_rejects_bad_list(runner):
    result = runner.invoke(cli, [
        "tgb", "--alpha", "4", "--beta", "6", "--lower", "10", "--upper", "40", "--series", "a,b",
    ])
    assert result.exit_code == 2


def test_report_ratio_table_csv(runner):
    result = runner.invoke(cli, ["report", "--ratio-table", "--format", "csv"])
    assert result.exit_code == 0, result.output
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "instance,alpha,iterations,ratio"
    assert len(lines) == 11


def test_report_regression_table(runner):
    document = _envelope(runner.invoke(cli, ["report", "--regression-table"]))
    assert [row["n"] for row in document["result"]] == list(range(90, 100))


def test_report_on_instance_file(runner, instance_file):
    result = runner.invoke(cli, [
        "report", "--instance", str(instance_file), "--sample-size", "2000", "--format", "csv",
    ])
    assert result.exit_code == 0, result.output
    header, row = result.stdout.strip().splitlines()
    assert header == "instance,n,A,B,alpha,beta,K,ratio"
    assert row.startswith("random8-s3,8,")


def test_enumeration_cap_exits_one(runner):
    generated = runner.invoke(cli, ["gen", "--n", "15", "--seed", "2"])
    result = runner.invoke(cli, ["enumerate"], input=generated.stdout)
    assert result.exit_code == 1
    assert "EnumerationCapError" in result.output


def test_no_input_is_usage_error(runner):
    result = runner.invoke(cli, ["moments"], input="")
    assert result.exit_code == 2


def test_csv_unsupported_for_christofides(runner, data_dir):
    result = runner.invoke(cli, ["christofides", "--tsplib", str(data_dir / "burma14.tsp"), "--format", "csv"])
    assert result.exit_code == 2


def test_missing_file_exits_one(runner, tmp_path):
    result = runner.invoke(cli, ["christofides", "--tsplib", str(tmp_path / "absent.tsp")])
    assert result.exit_code == 1


def test_run_returns_exit_codes(capsys):
    assert run(["tgb", "--alpha", "17.52", "--iterations", "2"]) == 0
    assert "ratio" in capsys.readouterr().out
    assert run(["tgb", "--alpha", "2", "--target", "2"]) == 1
    assert run(["tgb", "--no-such-flag"]) == 2
