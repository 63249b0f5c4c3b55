"""
Exception hierarchy shared by every SpanLab module
"""

from typing import Optional


class SpanLabError(Exception):
    """Base class for laboratory errors"""
    exit_code = 1


class ParameterError(SpanLabError, ValueError):
    """Inadmissible input parameters"""
    exit_code = 2


class InfeasibleSizeError(SpanLabError):
    """Instance is above a brute-force feasibility guard"""
    exit_code = 3


class BudgetExceededError(SpanLabError):
    """Enumeration or search budget exhausted"""
    exit_code = 3

    def __init__(self, message: str, reached: Optional[int] = None, visited: int = 0):
        super().__init__(message)
        self.reached = reached
        self.visited = visited


class RetryExhaustedError(SpanLabError):
    """Rejection sampler hit its attempt cap"""
    exit_code = 3


class SmoothingRefusedError(SpanLabError):
    """No matching covers every cut piece"""
    exit_code = 1


class DecodeError(SpanLabError, ValueError):
    """Malformed reconstruction tuple"""
    exit_code = 2


class ConsistencyError(SpanLabError):
    """An exact identity the implementation relies on failed"""
    exit_code = 1
