import click

from cli.common import emit, enumeration_options, handle_errors, instance_options, output_options, read_instance, to_csv
from schemas.run_schema import Command
from services.tour import run_enumeration


@click.command("enumerate")
@instance_options
@enumeration_options
@output_options()
@handle_errors
def enumerate_command(tsplib_path, instance_path, workers, max_n, allow_long, output_format, out_path):
    """Exact moments plus the shortest and longest tours by full enumeration."""
    instance = read_instance(tsplib_path, instance_path)
    result = run_enumeration(instance, workers=workers, allow_long=allow_long, cap=max_n)
    emit(
        Command.ENUMERATE, result, output_format, out_path,
        instance=instance,
        csv_text=lambda: to_csv([result.moments.model_dump(mode="json")]),
    )
