"""
    Main entry point for the tgb-tsp command line.

    This module builds the click group, applies the logging level from the
    settings (or --log-level), and registers the available subcommands.

    Commands:
        - gen, moments, enumerate, fit (distribution statistics)
        - christofides, kopt, maxtsp (heuristics)
        - tgb, histogram, report (truncated Generalized Beta analysis)

    Exit codes:
        0 on success, 1 on analysis or input errors, 2 on usage errors.
"""

import logging
import sys
from typing import Optional, Sequence

import click

from config.env_config import env
from schemas.run_schema import TOOL_NAME, TOOL_VERSION
from utils.logger_utils import setup_logger

logger = setup_logger(__name__)

# Import commands
from cli.commands.christofides_command import christofides_command
from cli.commands.enumerate_command import enumerate_command
from cli.commands.fit_command import fit_command
from cli.commands.gen_command import gen_command
from cli.commands.histogram_command import histogram_command
from cli.commands.kopt_command import kopt_command
from cli.commands.maxtsp_command import maxtsp_command
from cli.commands.moments_command import moments_command
from cli.commands.report_command import report_command
from cli.commands.tgb_command import tgb_command


@click.group(name=TOOL_NAME)
@click.version_option(TOOL_VERSION, prog_name=TOOL_NAME)
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="Overrides TGB_LOG_LEVEL.")
def cli(log_level):
    """Tour-length distribution analysis for the symmetric TSP."""
    level = (log_level or env.log_level).upper()
    logging.getLogger().setLevel(level)
    for name in list(logging.root.manager.loggerDict):
        logging.getLogger(name).setLevel(level)
    logger.debug(f"{TOOL_NAME} {TOOL_VERSION} starting")


# Register the commands
for command in (
    gen_command,
    moments_command,
    enumerate_command,
    fit_command,
    christofides_command,
    kopt_command,
    maxtsp_command,
    tgb_command,
    histogram_command,
    report_command,
):
    cli.add_command(command)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Invoke the command line without exiting the interpreter; returns the exit code."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name=TOOL_NAME, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(run())
