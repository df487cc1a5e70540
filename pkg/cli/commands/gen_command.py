import click

from cli.common import emit, handle_errors, output_options, seed_option
from schemas.run_schema import Command
from services.instance import generate_random
from utils.logger_utils import setup_logger

logger = setup_logger(__name__)


@click.command("gen")
@click.option("--n", "n", type=click.IntRange(min=3), required=True, help="Number of nodes.")
@seed_option
@output_options()
@handle_errors
def gen_command(n: int, seed: int, output_format: str, out_path: str):
    """Draw a random unit-square instance and write it as JSON."""
    instance = generate_random(n, seed)
    logger.info(f"Generated '{instance.name}'")
    emit(Command.GEN, instance, output_format, out_path, seeds={"seed": seed}, instance=instance)
