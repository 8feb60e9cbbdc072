"""
Vital registry: the ordered set of modeled vitals and their ranges.

Ranges are data; they live in ``config/vitals.yaml`` and are validated into
:class:`~clinproj.schemas.VitalSpec` records on load.
"""

import hashlib
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Sequence, Union

import yaml
from pydantic import ValidationError

from ..errors import RegistryError
from ..schemas import VitalSpec
from ..settings import DEFAULT_REGISTRY_PATH

logger = logging.getLogger(__name__)

AGE_COLUMN = "Age"
GENDER_COLUMN = "Gender"
LABEL_COLUMN = "SepsisLabel"


class VitalRegistry:
    """Ordered, name-unique collection of vital specs."""

    def __init__(self, specs: Sequence[VitalSpec]):
        self.specs = tuple(specs)
        self._by_key: Dict[str, int] = {}
        for i, spec in enumerate(self.specs):
            for key in {spec.name, spec.column}:
                if key in self._by_key and self._by_key[key] != i:
                    raise RegistryError("duplicate vital name or column", row=key)
                self._by_key[key] = i

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self) -> Iterator[VitalSpec]:
        return iter(self.specs)

    def __contains__(self, key: str) -> bool:
        return key in self._by_key

    @property
    def names(self) -> List[str]:
        return [s.name for s in self.specs]

    @property
    def columns(self) -> List[str]:
        return [s.column for s in self.specs]

    def index(self, key: str) -> int:
        """Position of a vital, by registry name or PSV column."""
        try:
            return self._by_key[key]
        except KeyError:
            raise KeyError(f"unknown vital: {key}") from None

    def lookup(self, key: str) -> VitalSpec:
        return self.specs[self.index(key)]

    def subset(self, keys: Iterable[str]) -> "VitalRegistry":
        """Registry restricted to ``keys``, keeping registry order."""
        wanted = sorted({self.index(k) for k in keys})
        return VitalRegistry([self.specs[i] for i in wanted])

    def content_hash(self) -> str:
        payload = json.dumps([s.model_dump() for s in self.specs], sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def load_registry(path: Union[str, Path]) -> VitalRegistry:
    """Load and validate a vital-range config file."""
    path = Path(path)
    if not path.exists():
        logger.error(f"Vital registry not found: {path}")
        raise FileNotFoundError(f"Vital registry not found: {path}")

    with open(path, "r") as f:
        try:
            raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise RegistryError(f"cannot parse {path}: {e}") from e

    rows = raw.get("vitals") if isinstance(raw, dict) else None
    if not rows:
        raise RegistryError(f"{path} has no 'vitals' list")

    specs = []
    for i, row in enumerate(rows):
        name = row.get("name", f"#{i}") if isinstance(row, dict) else f"#{i}"
        if not isinstance(row, dict):
            raise RegistryError("vital record must be a mapping", row=name)
        row = dict(row)
        row.setdefault("column", row.get("name"))
        try:
            specs.append(VitalSpec(**row))
        except (ValidationError, TypeError) as e:
            raise RegistryError(f"invalid vital record: {e}", row=name) from e
        spec = specs[-1]
        if not (spec.phys_lo <= spec.norm_lo and spec.norm_hi <= spec.phys_hi):
            logger.warning(
                f"Normal range of {spec.name} is not inside its physical range",
                extra={"vital": spec.name},
            )

    registry = VitalRegistry(specs)
    logger.debug(f"Loaded {len(registry)} vitals from {path}", extra={"path": str(path)})
    return registry


@lru_cache(maxsize=1)
def standard_registry() -> VitalRegistry:
    """The bundled 30-vital registry."""
    return load_registry(DEFAULT_REGISTRY_PATH)
