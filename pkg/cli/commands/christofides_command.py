import click

from cli.common import emit, handle_errors, instance_options, output_options, read_instance
from schemas.run_schema import Command
from services.heuristics import christofides


@click.command("christofides")
@instance_options
@click.option("--greedy-matching", is_flag=True, default=False,
              help="Greedy matching instead of the exact blossom solve (voids the 1.5 bound).")
@output_options()
@handle_errors
def christofides_command(tsplib_path, instance_path, greedy_matching, output_format, out_path):
    """Christofides tour."""
    instance = read_instance(tsplib_path, instance_path)
    result = christofides(instance, exact_matching=not greedy_matching)
    emit(Command.CHRISTOFIDES, result, output_format, out_path, instance=instance)
