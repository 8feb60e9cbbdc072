"""Record handling: imputation, solve-space transform, windows and severity scores."""

from .impute import impute
from .onset import derive_sepsis_onset, onset_hour
from .record import PatientRecord
from .scores import load_score_tables, sirs, sofa_partial, standard_scores
from .transform import inverse_matrix, inverse_transform, transform, transform_matrix
from .windows import SubPatient, make_subpatients, window_starts

__all__ = [
    "PatientRecord",
    "SubPatient",
    "derive_sepsis_onset",
    "impute",
    "inverse_matrix",
    "inverse_transform",
    "load_score_tables",
    "make_subpatients",
    "onset_hour",
    "sirs",
    "sofa_partial",
    "standard_scores",
    "transform",
    "transform_matrix",
    "window_starts",
]
