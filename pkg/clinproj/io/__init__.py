"""Patient files and run artifacts."""

from .base import ArtifactStore
from .json_store import JSONStore, load_json, save_json
from .psv import psv_files, read_psv, write_corrected, write_psv

__all__ = [
    "ArtifactStore",
    "JSONStore",
    "create_store",
    "load_json",
    "psv_files",
    "read_psv",
    "save_json",
    "write_corrected",
    "write_psv",
]


def create_store(root: str = "runs/latest") -> ArtifactStore:
    """Create the default artifact store."""
    return JSONStore(root)
