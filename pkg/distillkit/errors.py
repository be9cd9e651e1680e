"""
Errors

Exception hierarchy shared by every distillkit module. The CLI maps the
three top-level families onto exit codes (input 2, contract 3, suite 4).
"""

from typing import Any, Dict, Optional


class DistillError(Exception):
    """Base class for all distillkit errors"""
    pass


class InputError(DistillError):
    """Raised when user-supplied input cannot be accepted"""
    pass


class FormatError(InputError):
    """Raised when a qsf-1 document or JSON payload is malformed"""
    pass


class PSDViolationError(InputError):
    """Raised when a matrix is negative beyond the tolerance policy"""
    pass


class ConfigError(InputError):
    """Raised when config.yaml or an override is invalid"""
    pass


class ContractViolation(DistillError):
    """Raised when an operation is called outside its preconditions"""
    pass


class SingularityError(ContractViolation):
    """Raised when a matrix that must be invertible is numerically singular"""
    pass


class NotNPTError(ContractViolation):
    """Raised when an NPT state is required but the input is PPT"""
    pass


class NotPPTError(ContractViolation):
    """Raised when a PPT state is required but the input is NPT"""
    pass


class SchmidtRankMismatch(ContractViolation):
    """Raised when the operator Schmidt rank differs from the one required"""
    pass


class RealificationError(ContractViolation):
    """Raised when a congruence fails to make side-A factors real symmetric"""
    pass


class GenerationError(ContractViolation):
    """Raised when a generator exhausts its resampling budget or mislabels"""
    pass


class SuiteFailure(DistillError):
    """Raised when a verification suite records a property violation"""

    def __init__(self, message: str, summary: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.summary = summary or {}


EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONTRACT = 3
EXIT_SUITE = 4


def exit_code_for(error: BaseException) -> int:
    """Map an exception onto the CLI exit code contract"""
    if isinstance(error, SuiteFailure):
        return EXIT_SUITE
    if isinstance(error, InputError):
        return EXIT_INPUT
    return EXIT_CONTRACT
