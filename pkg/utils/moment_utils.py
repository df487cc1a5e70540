import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from schemas.tour_schema import CountBasis, MomentSet

# -------------------------------------------------
# Streaming central moments (count, mean, M2, M3, M4)
# -------------------------------------------------


@dataclass
class MomentAccumulator:
    """
    One-pass accumulator of the first four central moments.

    Partial accumulators merge exactly (pairwise update), so a fixed merge
    order gives results independent of how the stream was split.
    """
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0
    min: float = field(default=math.inf)
    max: float = field(default=-math.inf)

    def push(self, x: float) -> None:
        n1 = self.count
        self.count += 1
        n = self.count
        delta = x - self.mean
        delta_n = delta / n
        delta_n2 = delta_n * delta_n
        term1 = delta * delta_n * n1
        self.mean += delta_n
        self.m4 += term1 * delta_n2 * (n * n - 3 * n + 3) + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3
        self.m3 += term1 * delta_n * (n - 2) - 3.0 * delta_n * self.m2
        self.m2 += term1
        self.min = min(self.min, x)
        self.max = max(self.max, x)

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        """Fold `other` into this accumulator and return self."""
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean = other.count, other.mean
            self.m2, self.m3, self.m4 = other.m2, other.m3, other.m4
            self.min, self.max = other.min, other.max
            return self

        na, nb = float(self.count), float(other.count)
        n = na + nb
        d = other.mean - self.mean
        d2 = d * d
        m2 = self.m2 + other.m2 + d2 * na * nb / n
        m3 = (
            self.m3 + other.m3
            + d2 * d * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * other.m2 - nb * self.m2) / n
        )
        m4 = (
            self.m4 + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n ** 3)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * other.m3 - nb * self.m3) / n
        )
        self.mean = self.mean + d * nb / n
        self.count = self.count + other.count
        self.m2, self.m3, self.m4 = m2, m3, m4
        self.min = min(self.min, other.min)
        self.max = max(self.max, other.max)
        return self

    @classmethod
    def from_array(cls, values: np.ndarray) -> "MomentAccumulator":
        """Two-pass central sums of a block of values."""
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        centered = values - mean
        sq = centered * centered
        return cls(
            count=int(values.size),
            mean=mean,
            m2=float(sq.sum()),
            m3=float((sq * centered).sum()),
            m4=float((sq * sq).sum()),
            min=float(values.min()),
            max=float(values.max()),
        )

    @classmethod
    def from_stats(cls, stats: np.ndarray) -> "MomentAccumulator":
        """Rebuild from the flat array returned by the jitted kernels."""
        return cls(
            count=int(stats[0]),
            mean=float(stats[1]),
            m2=float(stats[2]),
            m3=float(stats[3]),
            m4=float(stats[4]),
            min=float(stats[5]),
            max=float(stats[6]),
        )

    @property
    def variance(self) -> float:
        return self.m2 / self.count if self.count else 0.0

    @property
    def skewness(self) -> float:
        if self.m2 <= 0.0:
            return 0.0
        return math.sqrt(self.count) * self.m3 / self.m2 ** 1.5

    @property
    def kurtosis(self) -> float:
        if self.m2 <= 0.0:
            return 0.0
        return self.count * self.m4 / (self.m2 * self.m2)

    def to_moment_set(
        self,
        count_basis: CountBasis,
        sample_size: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> MomentSet:
        """Population moments; sampled sets also carry the mean's standard error."""
        standard_error = None
        if count_basis == CountBasis.SAMPLED and self.count > 1:
            standard_error = math.sqrt(self.m2 / (self.count - 1) / self.count)
        return MomentSet(
            mean=self.mean,
            variance=max(self.variance, 0.0),
            skewness=self.skewness,
            kurtosis=self.kurtosis,
            min=self.min if self.count else None,
            max=self.max if self.count else None,
            count_basis=count_basis,
            count=self.count,
            sample_size=sample_size,
            seed=seed,
            mean_standard_error=standard_error,
        )
