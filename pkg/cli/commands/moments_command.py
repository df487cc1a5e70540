import click

from cli.common import emit, enumeration_options, handle_errors, instance_options, output_options, read_instance, sample_option, seed_option, to_csv
from schemas.run_schema import Command
from services.tour import can_enumerate, enumerate_tours, sample_moments, with_exact_mean_variance


@click.command("moments")
@instance_options
@click.option("--exact", is_flag=True, default=False,
              help="Closed-form mean and variance; shape moments enumerated when n allows.")
@sample_option
@seed_option
@enumeration_options
@output_options()
@handle_errors
def moments_command(tsplib_path, instance_path, exact, sample_size, seed, workers, max_n, allow_long,
                    output_format, out_path):
    """Four moments of the tour-length distribution."""
    instance = read_instance(tsplib_path, instance_path)

    if exact and can_enumerate(instance.n, allow_long, max_n):
        moments = enumerate_tours(instance, workers=workers, allow_long=allow_long, cap=max_n)
    elif exact:
        sampled = sample_moments(instance, sample_size=sample_size, seed=seed, workers=workers)
        moments = with_exact_mean_variance(sampled, instance)
    else:
        moments = sample_moments(instance, sample_size=sample_size, seed=seed, workers=workers)

    emit(
        Command.MOMENTS, moments, output_format, out_path,
        seeds={"seed": seed}, instance=instance,
        csv_text=lambda: to_csv([{
            **moments.model_dump(mode="json"), "closed_form_fields": ";".join(moments.closed_form_fields),
        }]),
    )
