import click

from cli.common import (
    emit, enumeration_options, handle_errors, instance_options, output_options, read_instance,
    sample_option, seed_option, to_csv,
)
from schemas.beta_schema import GBParams
from schemas.run_schema import Command
from schemas.tgb_schema import ReportOptions
from graphs.report_graph import tgb_report
from services.tgb import (
    PUBLISHED_INSTANCE_ROWS, approximation_ratio, iterate_tgb, iteration_formula, published_instance_params,
    schedule_density_series,
)


def _parse_ks(_ctx, _param, value):
    if value is None:
        return None
    try:
        Ks = [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter("expected a comma-separated list of integers, e.g. 1,2,5")
    if not Ks or min(Ks) < 1:
        raise click.BadParameter("iteration numbers start at 1")
    return Ks


@click.command("tgb")
@instance_options
@click.option("--alpha", type=float, default=None, help="Shape alpha for the analytic modes.")
@click.option("--beta", type=float, default=None)
@click.option("--lower", type=float, default=None, help="Support lower bound A.")
@click.option("--upper", type=float, default=None, help="Support upper bound B.")
@click.option("--published", type=click.Choice(list(PUBLISHED_INSTANCE_ROWS)), default=None,
              help="Fill unset alpha, beta, A and B from a published TSPLIB fit.")
@click.option("--iterations", "K", type=click.IntRange(min=1), default=None,
              help="Report the approximation ratio after K iterations.")
@click.option("--target", type=float, default=None, help="Target ratio in (1, 1.5).")
@click.option("--max-k", type=click.IntRange(min=1), default=None)
@click.option("--stop-epsilon", type=float, default=None)
@click.option("--series", callback=_parse_ks, default=None,
              help="Comma-separated K values; emits GB and truncated densities over [A, B].")
@sample_option
@seed_option
@enumeration_options
@output_options()
@handle_errors
def tgb_command(tsplib_path, instance_path, alpha, beta, lower, upper, published, K, target, max_k, stop_epsilon,
                series, sample_size, seed, workers, max_n, allow_long, output_format, out_path):
    """
    Truncated Generalized Beta schedule.

    Modes, in order of precedence:
      --alpha with --iterations or --target: ratio arithmetic only.
      --alpha --beta --lower --upper: schedule (or --series densities) for given parameters.
      --published NAME fills the four parameters from a published fit.
      otherwise: full report on the instance.
    """
    if published:
        p = published_instance_params(published)
        alpha = p.alpha if alpha is None else alpha
        beta = p.beta if beta is None else beta
        lower = p.A if lower is None else lower
        upper = p.B if upper is None else upper
    shape_given = None not in (alpha, beta, lower, upper)
    if alpha is not None and not shape_given:
        if K is None and target is None:
            raise click.UsageError("--alpha needs --iterations or --target (or --beta/--lower/--upper)")
        result = {}
        if K is not None:
            result["ratio"] = approximation_ratio(alpha, K)
            result["iterations"] = K
        if target is not None:
            result["iteration_formula"] = iteration_formula(alpha, target).model_dump(mode="json")
        emit(Command.TGB, result, output_format, out_path, csv_text=lambda: to_csv([
            {key: value for key, value in result.items() if not isinstance(value, dict)}
        ]))
        return

    if shape_given:
        params = GBParams(alpha=alpha, beta=beta, A=lower, B=upper)
        schedule = iterate_tgb(params, max_K=max_k, stop_epsilon=stop_epsilon)
        if series:
            rows = schedule_density_series(schedule, series)
            emit(Command.TGB, rows, output_format, out_path, csv_text=lambda: to_csv(rows))
        else:
            emit(Command.TGB, schedule, output_format, out_path, csv_text=lambda: to_csv(
                it.model_dump(mode="json") for it in schedule.iterations
            ))
        return

    instance = read_instance(tsplib_path, instance_path)
    options = ReportOptions(
        enumeration_cap=max_n,
        allow_long=allow_long,
        sample_size=sample_size,
        seed=seed,
        workers=workers,
        max_K=max_k,
        stop_epsilon=stop_epsilon,
        target_ratio=target,
    )
    report = tgb_report(instance, options)
    if series:
        if report.schedule is None:
            raise click.ClickException(f"No schedule: {report.stage_errors}")
        rows = schedule_density_series(report.schedule, series)
        emit(Command.TGB, rows, output_format, out_path, seeds={"seed": seed}, instance=instance,
             csv_text=lambda: to_csv(rows))
        return
    emit(Command.TGB, report, output_format, out_path, seeds={"seed": seed}, instance=instance,
         csv_text=lambda: to_csv([report.csv_row()]))
