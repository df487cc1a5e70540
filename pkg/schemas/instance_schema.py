from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_serializer, field_validator, model_validator

# -------------------------------------------------
# Schemas for TSP instances and their cost matrices
# -------------------------------------------------

class Geometry(str, Enum):
    EUCLIDEAN_2D = "euclidean-2d"
    GEOGRAPHIC = "geographic"
    EXPLICIT = "explicit"


class CostMatrix(BaseModel):
    """
    Dense symmetric matrix of edge costs.

    Attributes:
        n (int): Node count.
        values (np.ndarray): Read-only (n, n) float64 array, zero diagonal.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(..., ge=2)
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_array(cls, v):
        arr = np.array(v, dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check_shape(self):
        if self.values.shape != (self.n, self.n):
            raise ValueError(f"cost matrix shape {self.values.shape} does not match n={self.n}")
        if np.any(np.diag(self.values) != 0.0):
            raise ValueError("cost matrix diagonal must be zero")
        if not np.array_equal(self.values, self.values.T):
            raise ValueError("cost matrix must be symmetric")
        if np.any(self.values < 0.0):
            raise ValueError("cost matrix must be non-negative")
        return self

    @field_serializer("values")
    def _serialize_values(self, values: np.ndarray):
        return values.tolist()

    @property
    def is_integral(self) -> bool:
        return bool(np.all(self.values == np.round(self.values)))


class Instance(BaseModel):
    """
    A symmetric TSP instance.

    Attributes:
        name (str): Text label.
        n (int): Node count (>= 3).
        geometry (Geometry): euclidean-2d, geographic or explicit.
        rounded (bool): TSPLIB integer distance conventions apply (false for
            generated unit-square instances, which keep exact real norms).
        coords (Optional[List[Tuple[float, float]]]): Node coordinates when geometric.
        costs (Optional[CostMatrix]): Stored matrix for explicit instances.
    """
    model_config = ConfigDict(frozen=True)

    name: str
    n: int = Field(..., ge=3)
    geometry: Geometry
    rounded: bool = True
    coords: Optional[List[Tuple[float, float]]] = None
    costs: Optional[CostMatrix] = None

    _materialized: Optional[CostMatrix] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_payload(self):
        if self.geometry == Geometry.EXPLICIT:
            if self.costs is None or self.costs.n != self.n:
                raise ValueError("explicit instances need an n x n cost matrix")
        else:
            if self.coords is None or len(self.coords) != self.n:
                raise ValueError("geometric instances need exactly n coordinate pairs")
        return self

    def cost_matrix(self) -> CostMatrix:
        """Materialize (once) and return the full cost matrix."""
        if self.costs is not None:
            return self.costs
        if self._materialized is None:
            # Local import: the distance kernels live in the service layer
            from services.instance import materialize_costs
            self._materialized = materialize_costs(self)
        return self._materialized
