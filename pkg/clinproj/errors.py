"""
Exception hierarchy for clinproj.

Each error also derives from the builtin a caller would naturally catch, so
``except ValueError`` keeps working around config and format problems.
"""

from typing import Optional, Sequence


class ClinProjError(Exception):
    """Base class for all clinproj errors."""


class RegistryError(ClinProjError, ValueError):
    """Malformed vital-range or score configuration."""

    def __init__(self, message: str, row: Optional[str] = None):
        self.row = row
        if row is not None:
            message = f"{message} (row: {row})"
        super().__init__(message)


class TransformDomainError(ClinProjError, ValueError):
    """Raw value outside the domain of a vital's transform."""


class PSVFormatError(ClinProjError, ValueError):
    """Unreadable or ill-formed PSV file or JSON artifact."""


class NodeQPError(ClinProjError, RuntimeError):
    """Node QP could not be certified against its KKT conditions."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual={residual:.3e})")


class SolverFailure(ClinProjError, RuntimeError):
    """One or more windows finished with a non-optimal status."""

    def __init__(self, message: str, sub_ids: Sequence[str] = ()):
        self.sub_ids = list(sub_ids)
        super().__init__(message)


class TrainingError(ClinProjError, ValueError):
    """Training inputs cannot produce a model."""


class ResamplingError(TrainingError):
    """Minority class too small for the requested SMOTE neighbourhood."""
