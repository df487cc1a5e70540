import hashlib
import json
import math
from typing import Dict, List, TextIO, Tuple, Union

import numpy as np

from schemas.instance_schema import CostMatrix, Geometry, Instance
from utils.errors import TspAnalysisError
from utils.logger_utils import setup_logger

logger = setup_logger(__name__)

# TSPLIB constants for the GEO kernel (kept at the published precision)
GEO_PI = 3.141592
EARTH_RADIUS = 6378.388

SUPPORTED_WEIGHT_TYPES = {"EUC_2D": Geometry.EUCLIDEAN_2D, "GEO": Geometry.GEOGRAPHIC, "EXPLICIT": Geometry.EXPLICIT}
EXPLICIT_LAYOUTS = {"FULL_MATRIX", "LOWER_DIAG_ROW", "UPPER_ROW", "UPPER_DIAG_ROW", "LOWER_ROW"}


class TsplibHeaderError(TspAnalysisError):
    """Malformed or missing TSPLIB header entry."""
    pass

class UnsupportedEdgeWeightError(TspAnalysisError):
    """EDGE_WEIGHT_TYPE or EDGE_WEIGHT_FORMAT outside the supported subset."""
    pass

class DimensionMismatchError(TspAnalysisError):
    """Section contents disagree with DIMENSION."""
    pass

class AsymmetricMatrixError(TspAnalysisError):
    """Explicit FULL_MATRIX that is not symmetric."""
    pass

class NodeIndexError(TspAnalysisError):
    """Node index outside 0..n-1."""
    pass

class InstanceSizeError(TspAnalysisError):
    """Fewer than three nodes."""
    pass


# =========================
# TSPLIB ingestion
# =========================

def _split_header(line: str) -> Tuple[str, str]:
    key, _, value = line.partition(":")
    return key.strip().upper(), value.strip()


def parse_tsplib(text: Union[str, TextIO]) -> Instance:
    """
    Parse a TSPLIB file (EUC_2D, GEO or EXPLICIT edge weights).

    Args:
        text (str | TextIO): File contents or an open character stream.

    Raises:
        TsplibHeaderError: Missing/invalid NAME, TYPE or DIMENSION entries.
        UnsupportedEdgeWeightError: Edge weight type or explicit layout not supported.
        DimensionMismatchError: Section sizes disagree with DIMENSION.
        AsymmetricMatrixError: Explicit full matrix is not symmetric.

    Returns:
        Instance: Coordinates verbatim for geometric types, a symmetrized
        cost matrix for EXPLICIT.
    """
    raw = text.read() if hasattr(text, "read") else text
    lines = [ln.strip() for ln in raw.splitlines()]

    header: Dict[str, str] = {}
    sections: Dict[str, List[str]] = {}
    current = None
    for line in lines:
        if not line:
            continue
        upper = line.upper()
        if upper == "EOF":
            break
        if upper.endswith("_SECTION"):
            current = upper
            sections[current] = []
            continue
        if ":" in line and _split_header(line)[0].replace("_", "").isalpha():
            key, value = _split_header(line)
            header[key] = value
            current = None
        elif current is not None:
            sections[current].append(line)
        else:
            raise TsplibHeaderError(f"Malformed header line: {line!r}")

    if "DIMENSION" not in header:
        raise TsplibHeaderError("Missing DIMENSION entry")
    try:
        n = int(header["DIMENSION"])
    except ValueError:
        raise TsplibHeaderError(f"DIMENSION is not an integer: {header['DIMENSION']!r}")
    if n < 3:
        raise InstanceSizeError(f"DIMENSION must be at least 3, got {n}")

    problem_type = (header.get("TYPE") or "TSP").split()[0].upper()
    if problem_type != "TSP":
        raise TsplibHeaderError(f"Only symmetric TSP files are supported, got TYPE {problem_type}")

    weight_type = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if weight_type not in SUPPORTED_WEIGHT_TYPES:
        raise UnsupportedEdgeWeightError(f"Unsupported EDGE_WEIGHT_TYPE {weight_type or '<missing>'}")
    geometry = SUPPORTED_WEIGHT_TYPES[weight_type]
    name = header.get("NAME", "unnamed")

    if geometry == Geometry.EXPLICIT:
        layout = header.get("EDGE_WEIGHT_FORMAT", "").upper()
        if layout not in EXPLICIT_LAYOUTS:
            raise UnsupportedEdgeWeightError(f"Unsupported EDGE_WEIGHT_FORMAT {layout or '<missing>'}")
        tokens = " ".join(sections.get("EDGE_WEIGHT_SECTION", [])).split()
        values = np.array([float(t) for t in tokens], dtype=np.float64)
        matrix = _explicit_matrix(values, n, layout)
        logger.info(f"Parsed explicit instance '{name}' (n={n}, layout={layout})")
        return Instance(name=name, n=n, geometry=geometry, costs=CostMatrix(n=n, values=matrix))

    rows = sections.get("NODE_COORD_SECTION", [])
    if len(rows) != n:
        raise DimensionMismatchError(f"NODE_COORD_SECTION has {len(rows)} rows, DIMENSION is {n}")
    coords = []
    for row in rows:
        parts = row.split()
        if len(parts) < 3:
            raise DimensionMismatchError(f"Coordinate row needs id, x, y: {row!r}")
        coords.append((float(parts[1]), float(parts[2])))

    logger.info(f"Parsed {weight_type} instance '{name}' (n={n})")
    return Instance(name=name, n=n, geometry=geometry, rounded=True, coords=coords)


def _explicit_matrix(values: np.ndarray, n: int, layout: str) -> np.ndarray:
    expected = {
        "FULL_MATRIX": n * n,
        "LOWER_DIAG_ROW": n * (n + 1) // 2,
        "UPPER_DIAG_ROW": n * (n + 1) // 2,
        "UPPER_ROW": n * (n - 1) // 2,
        "LOWER_ROW": n * (n - 1) // 2,
    }[layout]
    if values.size != expected:
        raise DimensionMismatchError(f"{layout} needs {expected} weights for n={n}, found {values.size}")

    matrix = np.zeros((n, n), dtype=np.float64)
    if layout == "FULL_MATRIX":
        matrix = values.reshape(n, n).copy()
        if not np.array_equal(matrix, matrix.T):
            raise AsymmetricMatrixError("FULL_MATRIX is not symmetric")
        np.fill_diagonal(matrix, 0.0)
        return matrix

    if layout == "LOWER_DIAG_ROW":
        idx = np.tril_indices(n)
    elif layout == "UPPER_DIAG_ROW":
        idx = np.triu_indices(n)
    elif layout == "UPPER_ROW":
        idx = np.triu_indices(n, k=1)
    else:
        idx = np.tril_indices(n, k=-1)
    matrix[idx] = values
    matrix = np.where(matrix != 0.0, matrix, matrix.T)
    np.fill_diagonal(matrix, 0.0)
    return matrix


def write_tsplib_explicit(instance: Instance) -> str:
    """Render an instance as an EXPLICIT / FULL_MATRIX TSPLIB file."""
    values = instance.cost_matrix().values
    integral = instance.cost_matrix().is_integral
    fmt = (lambda v: str(int(v))) if integral else repr
    rows = [" ".join(fmt(float(v)) for v in row) for row in values]
    return "\n".join([
        f"NAME : {instance.name}",
        "TYPE : TSP",
        f"DIMENSION : {instance.n}",
        "EDGE_WEIGHT_TYPE : EXPLICIT",
        "EDGE_WEIGHT_FORMAT : FULL_MATRIX",
        "EDGE_WEIGHT_SECTION",
        *rows,
        "EOF",
    ]) + "\n"


# =========================
# Random unit-square instances
# =========================

def generate_random(n: int, seed: int) -> Instance:
    """
    Draw n points independently and uniformly from the unit square.

    Distances are exact (unrounded) Euclidean norms; the draw is
    deterministic given the seed.
    """
    if n < 3:
        raise InstanceSizeError(f"Random instances need n >= 3, got {n}")
    rng = np.random.default_rng(seed)
    points = rng.random((n, 2))
    coords = [(float(x), float(y)) for x, y in points]
    return Instance(name=f"random{n}-s{seed}", n=n, geometry=Geometry.EUCLIDEAN_2D, rounded=False, coords=coords)


# =========================
# Distance kernels
# =========================

def _nint(x: float) -> int:
    return int(x + 0.5)


def _geo_radians(value: float) -> float:
    # DDD.MM: integer degrees plus minutes, truncating conversion
    degrees = int(value)
    minutes = value - degrees
    return GEO_PI * (degrees + 5.0 * minutes / 3.0) / 180.0


def _geo_distance(p: Tuple[float, float], q: Tuple[float, float]) -> int:
    lat_i, lon_i = _geo_radians(p[0]), _geo_radians(p[1])
    lat_j, lon_j = _geo_radians(q[0]), _geo_radians(q[1])
    q1 = math.cos(lon_i - lon_j)
    q2 = math.cos(lat_i - lat_j)
    q3 = math.cos(lat_i + lat_j)
    arg = 0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)
    return int(EARTH_RADIUS * math.acos(max(-1.0, min(1.0, arg))) + 1.0)


def _pair_distance(instance: Instance, i: int, j: int) -> float:
    p, q = instance.coords[i], instance.coords[j]
    if instance.geometry == Geometry.GEOGRAPHIC:
        return float(_geo_distance(p, q))
    norm = math.hypot(p[0] - q[0], p[1] - q[1])
    return float(_nint(norm)) if instance.rounded else norm


def distance(instance: Instance, i: int, j: int) -> float:
    """
    Edge cost between nodes i and j.

    EUC_2D: nearest integer of the Euclidean norm. GEO: TSPLIB geographic
    distance. EXPLICIT: stored value. Random instances: exact real norm.

    Raises:
        NodeIndexError: i or j outside 0..n-1.
    """
    for k in (i, j):
        if not 0 <= k < instance.n:
            raise NodeIndexError(f"Node index {k} outside 0..{instance.n - 1}")
    if i == j:
        return 0.0
    if instance.geometry == Geometry.EXPLICIT:
        return float(instance.costs.values[i, j])
    a, b = min(i, j), max(i, j)
    return _pair_distance(instance, a, b)


def materialize_costs(instance: Instance) -> CostMatrix:
    """Build the full symmetric matrix from the scalar distance kernel."""
    n = instance.n
    matrix = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            matrix[i, j] = matrix[j, i] = _pair_distance(instance, i, j)
    logger.debug(f"Materialized {n}x{n} cost matrix for '{instance.name}'")
    return CostMatrix(n=n, values=matrix)


def as_cost_matrix(source: Union[Instance, CostMatrix]) -> CostMatrix:
    return source.cost_matrix() if isinstance(source, Instance) else source


# =========================
# maxTSP transformation
# =========================

def transform_offset(costs: CostMatrix) -> float:
    """M = largest off-diagonal cost plus one."""
    off_diagonal = costs.values[~np.eye(costs.n, dtype=bool)]
    return float(off_diagonal.max()) + 1.0


def transform_max(instance: Union[Instance, CostMatrix]) -> CostMatrix:
    """
    Replace every off-diagonal cost c by M - c.

    A minimum tour of the result is a maximum tour of the original; its
    original length is n * M - (transformed length).
    """
    costs = as_cost_matrix(instance)
    offset = transform_offset(costs)
    values = offset - costs.values
    np.fill_diagonal(values, 0.0)
    return CostMatrix(n=costs.n, values=values)


def check_triangle_inequality(costs: CostMatrix, slack: float = 0.0) -> int:
    """Count ordered triples (i, j, k) with c_ik > c_ij + c_jk + slack."""
    values = costs.values
    violations = 0
    for j in range(costs.n):
        violations += int(np.count_nonzero(values > values[:, j:j + 1] + values[j:j + 1, :] + slack))
    return violations


# =========================
# JSON documents
# =========================

def serialize_instance(instance: Instance) -> str:
    """Canonical JSON document {name, n, geometry, rounded, coords|costs}."""
    payload = instance.model_dump(mode="json", exclude_none=True)
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def load_instance_json(text: str) -> Instance:
    return Instance.model_validate_json(text)


def instance_checksum(instance: Instance) -> str:
    return hashlib.sha256(serialize_instance(instance).encode("utf-8")).hexdigest()
