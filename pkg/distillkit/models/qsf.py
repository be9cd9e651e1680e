"""
qsf-1 Document Model

Pydantic schema of the JSON state file format:
{"format": "qsf-1", "dimA": M, "dimB": N, "matrix": [[re, im], ...]}
with M^2 N^2 entries row-major in A-major index order.
"""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator


class FactorDocument(BaseModel):
    """Optional attached block factor: M blocks of R x N entries"""
    R: int = Field(..., ge=0)
    blocks: List[List[List[List[float]]]]

    def validate_blocks(self, dim_a: int, dim_b: int):
        """Each of the dim_a blocks is R rows of dim_b [re, im] pairs"""
        if len(self.blocks) != dim_a:
            raise ValueError(f"factor has {len(self.blocks)} blocks, expected {dim_a}")
        for i, block in enumerate(self.blocks):
            if len(block) != self.R:
                raise ValueError(f"factor block {i} has {len(block)} rows, expected R={self.R}")
            for r, row in enumerate(block):
                if len(row) != dim_b:
                    raise ValueError(f"factor block {i} row {r} has {len(row)} entries, expected {dim_b}")
                if any(len(pair) != 2 for pair in row):
                    raise ValueError(f"factor block {i} row {r} entries must be [re, im]")


class QSFDocument(BaseModel):
    """A qsf-1 state file"""
    format: Literal["qsf-1"] = "qsf-1"
    dimA: int = Field(..., gt=0, description="Dimension of side A")
    dimB: int = Field(..., gt=0, description="Dimension of side B")
    matrix: List[List[float]] = Field(..., description="Row-major [re, im] entries")
    factor: Optional[FactorDocument] = None
    meta: Dict[str, Any] = Field(default_factory=dict, description="Generator ground truth")

    @model_validator(mode='after')
    def validate_shape(self):
        expected = (self.dimA * self.dimB) ** 2
        if len(self.matrix) != expected:
            raise ValueError(
                f"matrix has {len(self.matrix)} entries, expected {expected} for dims "
                f"({self.dimA}, {self.dimB})"
            )
        for idx, pair in enumerate(self.matrix):
            if len(pair) != 2:
                raise ValueError(f"matrix entry {idx} must be [re, im]")
        if self.factor is not None:
            self.factor.validate_blocks(self.dimA, self.dimB)
        return self
