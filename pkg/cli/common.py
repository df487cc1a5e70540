import csv
import io
import json
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional

import click
from pydantic import BaseModel, ValidationError

from config.env_config import env
from schemas.instance_schema import Instance
from schemas.run_schema import Command, OutputEnvelope, OutputFormat
from services.instance import instance_checksum, load_instance_json, parse_tsplib
from utils.errors import TspAnalysisError
from utils.get_date import get_date
from utils.logger_utils import setup_logger

logger = setup_logger(__name__)


# =========================
# Shared options
# =========================

def instance_options(fn: Callable) -> Callable:
    """--tsplib / --instance; standard input when neither is given."""
    fn = click.option("--instance", "instance_path", type=click.Path(dir_okay=False),
                      help="Instance JSON written by `gen` (or its envelope).")(fn)
    fn = click.option("--tsplib", "tsplib_path", type=click.Path(dir_okay=False),
                      help="TSPLIB file (EUC_2D, GEO or EXPLICIT).")(fn)
    return fn


def output_options(default_format: OutputFormat = OutputFormat.JSON) -> Callable:
    def decorator(fn: Callable) -> Callable:
        fn = click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
                          help="Write to this file instead of standard output.")(fn)
        fn = click.option("--format", "output_format", type=click.Choice([f.value for f in OutputFormat]),
                          default=default_format.value, show_default=True)(fn)
        return fn
    return decorator


def seed_option(fn: Callable) -> Callable:
    return click.option("--seed", type=int, default=lambda: env.seed, show_default="TGB_SEED",
                        help="Seed for every random draw.")(fn)


def enumeration_options(fn: Callable) -> Callable:
    fn = click.option("--allow-long", is_flag=True, default=False,
                      help="Permit enumerations above TGB_LONG_ENUMERATION_N.")(fn)
    fn = click.option("--max-n", type=click.IntRange(min=3), default=None,
                      help="Override the enumeration cap.")(fn)
    fn = click.option("--workers", type=click.IntRange(min=1), default=lambda: env.workers,
                      show_default="TGB_WORKERS")(fn)
    return fn


def sample_option(fn: Callable) -> Callable:
    return click.option("--sample-size", type=click.IntRange(min=1), default=lambda: env.sample_size,
                        show_default="TGB_SAMPLE_SIZE")(fn)


def handle_errors(fn: Callable) -> Callable:
    """Report analysis failures and unreadable inputs as exit code 1."""
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (TspAnalysisError, OSError, ValidationError, ValueError) as exc:
            logger.debug("Command failed", exc_info=True)
            raise click.ClickException(f"{type(exc).__name__}: {exc}")
    return wrapper


# =========================
# Input
# =========================

def _instance_from_json(text: str) -> Instance:
    document = json.loads(text)
    if isinstance(document, dict) and "tool" in document and "result" in document:
        document = document["result"]
    return load_instance_json(json.dumps(document))


def read_instance(tsplib_path: Optional[str], instance_path: Optional[str]) -> Instance:
    """Load from --tsplib, --instance or standard input (JSON or TSPLIB, sniffed)."""
    if tsplib_path and instance_path:
        raise click.UsageError("Pass at most one of --tsplib and --instance")
    if tsplib_path:
        return parse_tsplib(Path(tsplib_path).read_text(encoding="utf-8"))
    if instance_path:
        return _instance_from_json(Path(instance_path).read_text(encoding="utf-8"))
    text = click.get_text_stream("stdin").read()
    if not text.strip():
        raise click.UsageError("No instance given: use --tsplib, --instance or standard input")
    return _instance_from_json(text) if text.lstrip().startswith("{") else parse_tsplib(text)


# =========================
# Output
# =========================

def _jsonable(result: Any) -> Any:
    if isinstance(result, BaseModel):
        return result.model_dump(mode="json")
    if isinstance(result, list):
        return [_jsonable(item) for item in result]
    if isinstance(result, dict):
        return {key: _jsonable(value) for key, value in result.items()}
    return result


def to_csv(rows: Iterable[Dict[str, Any]]) -> str:
    rows = list(rows)
    if not rows:
        return ""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def emit(
    command: Command,
    result: Any,
    output_format: str,
    out_path: Optional[str],
    seeds: Optional[Dict[str, int]] = None,
    instance: Optional[Instance] = None,
    csv_text: Optional[Callable[[], str]] = None,
) -> None:
    """Write the envelope (json) or the command's CSV rendering (csv)."""
    if output_format == OutputFormat.CSV.value:
        if csv_text is None:
            raise click.UsageError(f"`{command.value}` has no CSV output")
        text = csv_text()
    else:
        envelope = OutputEnvelope(
            command=command,
            seeds=seeds or {},
            instance_checksum=instance_checksum(instance) if instance is not None else None,
            timestamp=get_date(),
            result=_jsonable(result),
        )
        text = envelope.model_dump_json(indent=2) + "\n"

    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {command.value} output to {out_path}")
    else:
        click.echo(text, nl=False)


def csv_rows(rows: List[BaseModel]) -> Callable[[], str]:
    return lambda: to_csv(row.model_dump(mode="json") for row in rows)
