from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel

# -------------------------------------------------
# Schemas for CLI runs and the output envelope
# -------------------------------------------------

TOOL_NAME = "tgb-tsp"
TOOL_VERSION = "0.3.0"


class Command(str, Enum):
    GEN = "gen"
    MOMENTS = "moments"
    ENUMERATE = "enumerate"
    FIT = "fit"
    CHRISTOFIDES = "christofides"
    KOPT = "kopt"
    MAXTSP = "maxtsp"
    TGB = "tgb"
    HISTOGRAM = "histogram"
    REPORT = "report"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class OutputEnvelope(BaseModel):
    """
    Every JSON document the CLI emits.

    Attributes:
        tool, version (str): Producer identity.
        command (Command): Subcommand that produced `result`.
        seeds (Dict[str, int]): Seeds used by the run.
        instance_checksum (Optional[str]): SHA-256 of the canonical instance JSON.
        timestamp (str): UTC creation time; excluded from reproducibility checks.
        result (Any): Command payload.
    """
    tool: str = TOOL_NAME
    version: str = TOOL_VERSION
    command: Command
    seeds: Dict[str, int]
    instance_checksum: Optional[str] = None
    timestamp: str
    result: Any
