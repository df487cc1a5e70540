import click

from cli.common import emit, handle_errors, instance_options, output_options, read_instance
from schemas.heuristics_schema import ImprovementStrategy
from schemas.run_schema import Command
from services.heuristics import christofides, k_opt_improve, nearest_neighbor_tour


@click.command("kopt")
@instance_options
@click.option("--k", "k", type=click.Choice(["2", "3"]), default="3", show_default=True)
@click.option("--strategy", type=click.Choice([s.value for s in ImprovementStrategy]),
              default=ImprovementStrategy.FIRST.value, show_default=True)
@click.option("--start", type=click.Choice(["christofides", "nearest-neighbor"]), default="christofides",
              show_default=True, help="Construction the local search starts from.")
@click.option("--max-passes", type=click.IntRange(min=1), default=None)
@output_options()
@handle_errors
def kopt_command(tsplib_path, instance_path, k, strategy, start, max_passes, output_format, out_path):
    """2-opt or 3-opt improvement of a constructed tour."""
    instance = read_instance(tsplib_path, instance_path)
    initial = christofides(instance) if start == "christofides" else nearest_neighbor_tour(instance)
    result = k_opt_improve(initial.tour, instance, k=int(k), strategy=ImprovementStrategy(strategy),
                           max_passes=max_passes)
    emit(Command.KOPT, {"start": initial, "improved": result}, output_format, out_path, instance=instance)
