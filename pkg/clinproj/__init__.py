"""
clinproj - constraint projection, trust scores and cluster-then-predict
sepsis detection for hourly ICU records.
"""

__version__ = "0.1.0"
