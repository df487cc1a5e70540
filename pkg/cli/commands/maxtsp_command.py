import click

from cli.common import emit, handle_errors, instance_options, output_options, read_instance
from schemas.run_schema import Command
from services.heuristics import max_tour_result


@click.command("maxtsp")
@instance_options
@output_options()
@handle_errors
def maxtsp_command(tsplib_path, instance_path, output_format, out_path):
    """Estimate the longest tour through the M - c transformation."""
    instance = read_instance(tsplib_path, instance_path)
    emit(Command.MAXTSP, max_tour_result(instance), output_format, out_path, instance=instance)
