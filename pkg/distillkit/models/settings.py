"""
Settings Models

Pydantic models for the tolerance policy, search budgets and the
config.yaml document that carries their defaults.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class TolerancePolicy(BaseModel):
    """
    Single source of every rank and zero decision

    Attributes:
        rank_rtol: Relative threshold for singular/eigenvalue truncation
        zero_atol: Absolute threshold for residual checks
    """
    model_config = ConfigDict(frozen=True)

    rank_rtol: float = Field(1e-8, description="Relative truncation threshold")
    zero_atol: float = Field(1e-10, description="Absolute residual threshold")

    @field_validator('rank_rtol', 'zero_atol')
    @classmethod
    def validate_threshold(cls, v):
        """Both thresholds live strictly inside (0, 1)"""
        if not 0.0 < v < 1.0:
            raise ValueError(f"Tolerance must satisfy 0 < t < 1, got {v}")
        return v


class SearchBudget(BaseModel):
    """Budget for the Schmidt-rank-two witness search"""
    model_config = ConfigDict(frozen=True)

    restarts: int = Field(64, gt=0, description="Seeded random restarts")
    max_iters: int = Field(500, gt=0, description="Alternating half-steps per start")
    seed: int = Field(0, ge=0, description="Root seed for random frames")
    threads: int = Field(1, gt=0, description="Concurrent workers for restarts")


class ProductSearchBudget(BaseModel):
    """Budget for product-vector and low-Schmidt-rank subspace searches"""
    model_config = ConfigDict(frozen=True)

    restarts: int = Field(32, gt=0)
    max_iters: int = Field(500, gt=0)
    seed: int = Field(0, ge=0)


class NegdetSettings(BaseModel):
    """Negative-determinant submatrix enumeration"""
    model_config = ConfigDict(frozen=True)

    k_max: int = Field(4, ge=2, description="Largest principal submatrix order")


class DecideSettings(BaseModel):
    """Decision tree knobs"""
    model_config = ConfigDict(frozen=True)

    spot_checks: int = Field(16, ge=0, description="Rank-2 compressions attached to sr-3 verdicts")


class Settings(BaseModel):
    """
    Complete configuration document (config.yaml)

    Attributes:
        tolerance: Tolerance policy shared by every module
        search: Witness search defaults
        product_search: Product-vector search defaults
        negdet: Negative-determinant enumeration defaults
        decide: Decision tree defaults
        source: Path the settings were read from (None for built-in defaults)
    """
    model_config = ConfigDict(frozen=True)

    tolerance: TolerancePolicy = Field(default_factory=TolerancePolicy)
    search: SearchBudget = Field(default_factory=SearchBudget)
    product_search: ProductSearchBudget = Field(default_factory=ProductSearchBudget)
    negdet: NegdetSettings = Field(default_factory=NegdetSettings)
    decide: DecideSettings = Field(default_factory=DecideSettings)
    source: Optional[str] = None
