"""
Report Models

Pydantic model for the report-1 document every CLI command prints.
"""

from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

REPORT_SCHEMA = "report-1"


class InputDescriptor(BaseModel):
    """Where the analyzed state came from"""
    source: str
    dimA: Optional[int] = None
    dimB: Optional[int] = None


class Report(BaseModel):
    """
    Output of one CLI command

    Reports are deterministic for identical input, seed and budget. Timings
    are only present when requested.
    """
    model_config = ConfigDict(frozen=True)

    schema_: Literal["report-1"] = Field(REPORT_SCHEMA, alias="schema")
    tool_version: str
    command: str
    input: InputDescriptor
    facts: Dict[str, Any] = Field(default_factory=dict)
    verdict: Optional[Dict[str, Any]] = None
    result: Optional[Dict[str, Any]] = None
    certificates: Dict[str, Any] = Field(default_factory=dict)
    budget: Dict[str, Any] = Field(default_factory=dict)
    timings: Optional[Dict[str, float]] = None

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True, exclude_none=True)


class ErrorDetail(BaseModel):
    type: str
    message: str
    module: Optional[str] = None


class ErrorReport(BaseModel):
    """JSON object printed on stdout when a command fails"""
    error: ErrorDetail
