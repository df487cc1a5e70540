import math
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

# -------------------------------------------------
# Schemas for tours and tour-length statistics
# -------------------------------------------------

class Tour(BaseModel):
    """
    A Hamiltonian cycle given as a permutation of node indices.

    Attributes:
        order (List[int]): Bijection on {0..n-1}. The canonical form has
            order[0] == 0 and order[1] < order[n-1].
        length (Optional[float]): Cached tour length, when known.
    """
    model_config = ConfigDict(frozen=True)

    order: List[int]
    length: Optional[float] = None

    @field_validator("order")
    @classmethod
    def _check_permutation(cls, v):
        if sorted(v) != list(range(len(v))):
            raise ValueError("tour order must be a permutation of 0..n-1")
        return v

    @property
    def n(self) -> int:
        return len(self.order)

    @property
    def is_canonical(self) -> bool:
        return self.order[0] == 0 and (self.n < 3 or self.order[1] < self.order[-1])


class CountBasis(str, Enum):
    EXACT_ENUMERATION = "exact-enumeration"
    CLOSED_FORM = "closed-form"
    SAMPLED = "sampled"


class MomentSet(BaseModel):
    """
    Four moments of a tour-length distribution.

    Attributes:
        mean, variance, skewness (float): Central statistics.
        kurtosis (float): Ordinary (non-excess) kurtosis.
        min, max (Optional[float]): Known extremes of the support.
        count_basis (CountBasis): How the moments were obtained.
        count (Optional[int]): Number of tours aggregated.
        sample_size, seed (Optional[int]): Set for sampled moments.
        mean_standard_error (Optional[float]): Standard error of a sampled mean.
        closed_form_fields (List[str]): Fields computed in closed form when the
            rest come from `count_basis` (sampled shape moments with exact mean and variance).
    """
    mean: float
    variance: float = Field(..., ge=0.0)
    skewness: float
    kurtosis: float
    min: Optional[float] = None
    max: Optional[float] = None
    count_basis: CountBasis
    count: Optional[int] = None
    sample_size: Optional[int] = None
    seed: Optional[int] = None
    mean_standard_error: Optional[float] = None
    closed_form_fields: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_extremes(self):
        if self.count_basis == CountBasis.EXACT_ENUMERATION and self.min is not None and self.max is not None:
            # One ulp of slack for the streaming mean
            slack = 1e-9 * max(1.0, abs(self.mean))
            if not (self.min - slack <= self.mean <= self.max + slack):
                raise ValueError("enumerated moments must satisfy min <= mean <= max")
        return self

    @property
    def excess_kurtosis(self) -> float:
        return self.kurtosis - 3.0

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


class Histogram(BaseModel):
    """
    Binned tour lengths.

    Attributes:
        bin_edges (List[float]): Strictly increasing, len(counts) + 1 entries.
        counts (List[int]): Non-negative counts per half-open bin.
        total (int): Sum of counts.
    """
    bin_edges: List[float]
    counts: List[int]
    total: int

    @model_validator(mode="after")
    def _check_bins(self):
        if len(self.bin_edges) != len(self.counts) + 1:
            raise ValueError("histogram needs len(counts) + 1 edges")
        if any(b <= a for a, b in zip(self.bin_edges, self.bin_edges[1:])):
            raise ValueError("histogram edges must be strictly increasing")
        if any(c < 0 for c in self.counts) or sum(self.counts) != self.total:
            raise ValueError("histogram counts must be non-negative and sum to total")
        return self

    @computed_field
    @property
    def bin_centers(self) -> List[float]:
        return [0.5 * (a + b) for a, b in zip(self.bin_edges, self.bin_edges[1:])]

    @computed_field
    @property
    def density(self) -> List[float]:
        if self.total == 0:
            return [0.0] * len(self.counts)
        return [
            c / (self.total * (b - a))
            for c, a, b in zip(self.counts, self.bin_edges, self.bin_edges[1:])
        ]

    def to_csv(self) -> str:
        lines = ["bin_center,density"]
        lines.extend(f"{x!r},{d!r}" for x, d in zip(self.bin_centers, self.density))
        return "\n".join(lines) + "\n"


class EnumerationResult(BaseModel):
    """
    Output of an exhaustive pass over the canonical tours.

    Attributes:
        moments (MomentSet): Exact moments.
        best, worst (Tour): Canonical argmin and argmax tours with their lengths.
        histogram (Optional[Histogram]): Filled when binning was requested.
    """
    moments: MomentSet
    best: Tour
    worst: Tour
    histogram: Optional[Histogram] = None
