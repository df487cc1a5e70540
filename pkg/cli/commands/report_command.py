from pathlib import Path

import click

from cli.common import (
    csv_rows, emit, enumeration_options, handle_errors, output_options, read_instance, sample_option, seed_option,
    to_csv,
)
from graphs.report_graph import tgb_report
from schemas.run_schema import Command
from schemas.tgb_schema import ReportOptions
from services.instance import generate_random, parse_tsplib
from services.tgb import random_reference_table, ratio_table, upper_bound_study


@click.command("report")
@click.option("--tsplib", "tsplib_paths", multiple=True, type=click.Path(dir_okay=False, exists=True))
@click.option("--instance", "instance_paths", multiple=True, type=click.Path(dir_okay=False, exists=True))
@click.option("--random", "random_sizes", multiple=True, type=click.IntRange(min=3),
              help="Add a seeded unit-square instance of this size (repeatable).")
@click.option("--target", type=float, default=None, help="Target ratio for the iteration count.")
@click.option("--ratio-table", "show_ratio_table", is_flag=True, default=False,
              help="Recompute the published ratio table.")
@click.option("--regression-table", "show_regression_table", is_flag=True, default=False,
              help="Published random-instance parameters against the regression.")
@click.option("--upper-bound-study", "bound_study", is_flag=True, default=False,
              help="Fitted B against the max-tour heuristic for every input.")
@sample_option
@seed_option
@enumeration_options
@output_options()
@handle_errors
def report_command(tsplib_paths, instance_paths, random_sizes, target, show_ratio_table, show_regression_table,
                   bound_study, sample_size, seed, workers, max_n, allow_long, output_format, out_path):
    """End-to-end reports over a corpus of instances, or the reference tables."""
    if show_ratio_table:
        rows = ratio_table()
        emit(Command.REPORT, rows, output_format, out_path, csv_text=csv_rows(rows))
        return
    if show_regression_table:
        rows = random_reference_table()
        emit(Command.REPORT, rows, output_format, out_path, csv_text=lambda: to_csv(
            {
                "n": row.n,
                **{f"published_{k}": v for k, v in row.published.model_dump().items()},
                **{f"regression_{k}": v for k, v in row.regression.model_dump().items()},
                "discrepancy": row.discrepancy,
            }
            for row in rows
        ))
        return

    instances = [parse_tsplib(Path(path).read_text(encoding="utf-8")) for path in tsplib_paths]
    instances += [read_instance(None, path) for path in instance_paths]
    instances += [generate_random(n, seed) for n in random_sizes]
    if not instances:
        raise click.UsageError("Give at least one --tsplib, --instance or --random input, or a table flag")

    if bound_study:
        rows = upper_bound_study(instances, sample_size=sample_size, seed=seed)
        emit(Command.REPORT, rows, output_format, out_path, seeds={"seed": seed}, csv_text=csv_rows(rows))
        return

    options = ReportOptions(
        enumeration_cap=max_n,
        allow_long=allow_long,
        sample_size=sample_size,
        seed=seed,
        workers=workers,
        target_ratio=target,
    )
    reports = [tgb_report(instance, options) for instance in instances]
    emit(Command.REPORT, reports, output_format, out_path, seeds={"seed": seed},
         csv_text=lambda: to_csv(report.csv_row() for report in reports))
