from enum import Enum
from typing import List, Tuple

from pydantic import BaseModel, Field, field_validator

from schemas.tour_schema import Tour

# -------------------------------------------------
# Schemas for graph pieces and heuristic results
# -------------------------------------------------

class EdgeSet(BaseModel):
    """
    Weighted edge list; repeated edges are allowed (multigraph).

    Attributes:
        edges (List[Tuple[int, int, float]]): (u, v, weight) with u < v.
    """
    edges: List[Tuple[int, int, float]]

    @field_validator("edges")
    @classmethod
    def _ordered_endpoints(cls, v):
        for u, w, _ in v:
            if not 0 <= u < w:
                raise ValueError(f"edge ({u}, {w}) must satisfy 0 <= u < v")
        return v

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def __len__(self) -> int:
        return len(self.edges)


class HeuristicMethod(str, Enum):
    CHRISTOFIDES = "christofides"
    TWO_OPT = "two-opt"
    THREE_OPT = "three-opt"
    NEAREST_NEIGHBOR = "nearest-neighbor"
    MAX_TRANSFORM = "max-transform"


class ImprovementStrategy(str, Enum):
    FIRST = "first-improvement"
    BEST = "best-improvement"


class HeuristicResult(BaseModel):
    """
    Tour produced by a construction or improvement heuristic.

    Attributes:
        tour (Tour): Canonical tour.
        length (float): Its length.
        method (HeuristicMethod): Heuristic that produced it.
        improvement_steps (int): Accepted improving moves.
        exact_matching (bool): False when a greedy matching replaced the exact
            one, voiding the 1.5 guarantee.
    """
    tour: Tour
    length: float
    method: HeuristicMethod
    improvement_steps: int = Field(0, ge=0)
    exact_matching: bool = True
