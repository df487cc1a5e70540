import click

from cli.common import emit, enumeration_options, handle_errors, instance_options, output_options, read_instance, sample_option, seed_option, to_csv
from schemas.run_schema import Command
from schemas.tour_schema import CountBasis, MomentSet
from services.betadist import fit_from_bound_and_moments, fit_from_four_moments, fit_report
from services.tgb import best_heuristic_length
from services.tour import can_enumerate, run_enumeration, sample_moments, with_exact_mean_variance
from utils.errors import TspAnalysisError
from utils.logger_utils import setup_logger

logger = setup_logger(__name__)


@click.command("fit")
@instance_options
@click.option("--lower", type=float, default=None, help="Known lower bound A.")
@click.option("--mean", type=float, default=None)
@click.option("--variance", type=float, default=None)
@click.option("--skewness", type=float, default=None)
@click.option("--kurtosis", type=float, default=None, help="Ordinary (non-excess) kurtosis.")
@sample_option
@seed_option
@enumeration_options
@output_options()
@handle_errors
def fit_command(tsplib_path, instance_path, lower, mean, variance, skewness, kurtosis, sample_size, seed,
                workers, max_n, allow_long, output_format, out_path):
    """
    Fit Generalized Beta parameters.

    With --mean/--variance/--skewness the fit uses the given moments (plus
    --lower or --kurtosis); otherwise moments and A come from the instance.
    """
    instance = None
    diagnostics = []
    if mean is not None and variance is not None and skewness is not None:
        moments = MomentSet(mean=mean, variance=variance, skewness=skewness,
                            kurtosis=kurtosis if kurtosis is not None else 3.0,
                            count_basis=CountBasis.CLOSED_FORM)
        A = lower
    else:
        instance = read_instance(tsplib_path, instance_path)
        if can_enumerate(instance.n, allow_long, max_n):
            enumeration = run_enumeration(instance, workers=workers, allow_long=allow_long, cap=max_n)
            moments, A = enumeration.moments, enumeration.best.length
            diagnostics.append("A and moments are enumerated")
        else:
            sampled = sample_moments(instance, sample_size=sample_size, seed=seed, workers=workers)
            moments = with_exact_mean_variance(sampled, instance)
            A = best_heuristic_length(instance)
            diagnostics.append("A is the best heuristic tour length; skewness is sampled")
        if lower is not None:
            A = lower
            diagnostics.append("A supplied")

    reports = []
    if A is not None:
        params = fit_from_bound_and_moments(A, moments.mean, moments.variance, moments.skewness)
        reports.append(fit_report("bound-and-moments", params, moments, diagnostics))
    if kurtosis is not None or instance is not None:
        try:
            reports.append(fit_report("four-moments", fit_from_four_moments(moments), moments))
        except TspAnalysisError as exc:
            if not reports:
                raise
            logger.warning(f"Four-moment fit skipped: {exc}")
    if not reports:
        raise click.UsageError("Give --lower or --kurtosis together with --mean/--variance/--skewness")

    flat = [
        {"method": r.method, **r.params.model_dump(), **{f"residual_{k}": v for k, v in r.residuals.items()}}
        for r in reports
    ]
    emit(
        Command.FIT, reports, output_format, out_path,
        seeds={"seed": seed}, instance=instance,
        csv_text=lambda: to_csv(flat),
    )
