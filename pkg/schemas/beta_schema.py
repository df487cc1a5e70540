from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, model_validator

# -------------------------------------------------
# Schemas for Generalized Beta parameters and fits
# -------------------------------------------------

class GBParams(BaseModel):
    """
    Generalized Beta parameters: shapes (alpha, beta) on support [A, B].
    """
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., gt=0.0)
    beta: float = Field(..., gt=0.0)
    A: float
    B: float

    @model_validator(mode="after")
    def _check_support(self):
        if not self.B > self.A:
            raise ValueError(f"support upper bound B={self.B} must exceed A={self.A}")
        return self

    @property
    def width(self) -> float:
        return self.B - self.A


class TruncationWindow(BaseModel):
    """
    Window in normalized coordinates x_hat = (x - A) / (B - A).
    """
    model_config = ConfigDict(frozen=True)

    a_hat: float = Field(0.0, ge=0.0, lt=1.0)
    b_hat: float = Field(..., gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_order(self):
        if not self.a_hat < self.b_hat:
            raise ValueError("truncation window needs a_hat < b_hat")
        return self


class FitReport(BaseModel):
    """
    A fitted parameter set with the residuals of the moment equations.

    Attributes:
        method (str): "four-moments" or "bound-and-moments".
        params (GBParams): Fitted parameters.
        residuals (Dict[str, float]): Per-moment residuals.
        diagnostics (List[str]): Feasibility notes.
    """
    method: str
    params: GBParams
    residuals: Dict[str, float]
    diagnostics: List[str] = []
