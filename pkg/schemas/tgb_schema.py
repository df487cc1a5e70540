from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from schemas.beta_schema import GBParams
from schemas.tour_schema import MomentSet

# -------------------------------------------------
# Schemas for the truncation schedule and reports
# -------------------------------------------------

REPORT_SCHEMA_VERSION = 1

PRINTED_ITERATION_FORMULA = "1+log2(C0-1)/log(1-1/(alpha+1))"


class TgbIteration(BaseModel):
    """
    One step of the truncation schedule.

    Attributes:
        K (int): Iteration number, starting at 1.
        b_hat (Optional[float]): Normalized window used at this step (None for K=1,
            whose value is pinned to the 1.5A ceiling).
        mu_t (float): Truncated mean after this step.
        ratio_bound (float): 1 + 0.5((alpha+1)/(alpha+2))^(K-1).
    """
    K: int = Field(..., ge=1)
    b_hat: Optional[float] = None
    mu_t: float
    ratio_bound: float


class TgbSchedule(BaseModel):
    """
    Iterated truncated means for one parameter set.

    Attributes:
        params (GBParams): Distribution being truncated.
        iterations (List[TgbIteration]): Steps in order.
        converged_at (Optional[int]): K at which mu_t - A fell below stop_epsilon * A.
        first_window_clamped (bool): True when 1.5A > B forced b_hat_2 = 1.
    """
    params: GBParams
    iterations: List[TgbIteration]
    converged_at: Optional[int] = None
    first_window_clamped: bool = False

    @property
    def final(self) -> TgbIteration:
        return self.iterations[-1]


class ASource(str, Enum):
    ENUMERATION = "enumeration"
    HEURISTIC_BEST = "heuristic-best"
    SUPPLIED = "supplied"


class IterationFormula(BaseModel):
    """
    Minimum iteration count at a target ratio, next to the printed formula.
    """
    target_ratio: float
    min_iterations: int
    printed_formula: str = PRINTED_ITERATION_FORMULA
    printed_formula_value: float


class TgbReport(BaseModel):
    """
    End-to-end analysis of one instance.

    Completed stages fill their fields; failed stages leave them unset and
    record a message in `stage_errors`.
    """
    schema_version: int = REPORT_SCHEMA_VERSION
    instance_name: str
    n: int
    A_source: Optional[ASource] = None
    A: Optional[float] = None
    B: Optional[float] = None
    B_enumerated: Optional[float] = None
    moments: Optional[MomentSet] = None
    fitted: Optional[GBParams] = None
    schedule: Optional[TgbSchedule] = None
    christofides_length: Optional[float] = None
    kopt_length: Optional[float] = None
    observed_ratio: Optional[float] = None
    iteration_formula: Optional[IterationFormula] = None
    relative_errors: Dict[str, float] = {}
    stage_errors: Dict[str, str] = {}
    warnings: List[str] = []

    def csv_row(self) -> Dict[str, object]:
        """Corpus-level row: instance, n, A, B, alpha, beta, K, ratio."""
        final = self.schedule.final if self.schedule else None
        return {
            "instance": self.instance_name,
            "n": self.n,
            "A": self.A,
            "B": self.B,
            "alpha": self.fitted.alpha if self.fitted else None,
            "beta": self.fitted.beta if self.fitted else None,
            "K": final.K if final else None,
            "ratio": final.ratio_bound if final else None,
        }


class ReportOptions(BaseModel):
    """
    Knobs of one end-to-end report; unset values fall back to the settings.

    Attributes:
        enumeration_cap (Optional[int]): Largest n whose A and moments are enumerated.
        allow_long (bool): Permit enumerations above the long-run threshold.
        sample_size (Optional[int]): Tours sampled when enumeration is not used.
        seed (Optional[int]): Sampling seed.
        workers (Optional[int]): Worker processes.
        max_K (Optional[int]): Schedule iteration cap.
        stop_epsilon (Optional[float]): Schedule convergence threshold (relative to A).
        target_ratio (Optional[float]): Ratio whose minimum iteration count is reported;
            defaults to the observed k-opt / A ratio when that lies in (1, 1.5).
    """
    enumeration_cap: Optional[int] = None
    allow_long: bool = False
    sample_size: Optional[int] = None
    seed: Optional[int] = None
    workers: Optional[int] = None
    max_K: Optional[int] = None
    stop_epsilon: Optional[float] = None
    target_ratio: Optional[float] = None


class RatioRow(BaseModel):
    """One (alpha, K-1, ratio) row of an approximation-ratio table."""
    instance: str
    alpha: float
    iterations: int = Field(..., ge=0, description="K - 1")
    ratio: float


class ReferenceRow(BaseModel):
    """
    Published random-instance parameters next to the regression values.

    Attributes:
        n (int): Instance size.
        published (GBParams): Tabulated A, B, alpha, beta.
        regression (GBParams): Closed-form regression at n.
        discrepancy (bool): True when alpha or beta differ by more than the tolerance.
    """
    n: int
    published: GBParams
    regression: GBParams
    discrepancy: bool


class UpperBoundRow(BaseModel):
    """
    Fitted upper bound B against the max-tour heuristic for one instance.

    Attributes:
        relative_error (float): (B_fitted - B_heuristic) / B_heuristic.
        envelope (float): Tolerated |relative_error| for this instance family.
        exceeds (bool): |relative_error| > envelope.
    """
    instance: str
    n: int
    A: float
    B_fitted: float
    B_heuristic: float
    relative_error: float
    envelope: float
    exceeds: bool
