"""
Settings and configuration loader for clinproj.

Loads configuration from:
1. Environment variables (.env file)
2. YAML run config (config/run.yaml)
"""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import find_dotenv, load_dotenv

logger = logging.getLogger(__name__)

PACKAGE_ROOT = Path(__file__).resolve().parents[1]
DEFAULT_CONFIG_PATH = PACKAGE_ROOT / "config" / "run.yaml"
DEFAULT_REGISTRY_PATH = PACKAGE_ROOT / "config" / "vitals.yaml"
DEFAULT_SCORES_PATH = PACKAGE_ROOT / "config" / "scores.yaml"


def _load_environment() -> None:
    """Load environment variables from the most likely project .env file."""
    explicit_env = PACKAGE_ROOT / ".env"
    if explicit_env.exists():
        load_dotenv(explicit_env, override=False)
        return

    found = find_dotenv(usecwd=True)
    if found:
        load_dotenv(found, override=False)


_load_environment()


@dataclass
class PreprocessConfig:
    """Windowing parameters."""
    window: int = 6
    stride: int = 3
    label_lead_hours: int = 6


@dataclass
class SolverConfig:
    """Branch-and-bound options for the physical projection."""
    gap_tol: float = 1e-6
    feas_tol: float = 1e-6
    node_budget: int = 100_000


@dataclass
class GBTConfig:
    """Gradient-boosted tree hyperparameters."""
    max_depth: int = 4
    n_rounds: int = 200
    learning_rate: float = 0.1
    min_child_weight: float = 1.0
    reg_lambda: float = 1.0
    gamma: float = 0.0


@dataclass
class MLConfig:
    """Cluster-then-predict parameters."""
    clusters: int = 25
    train_ratio: float = 0.75
    minority_frac: float = 0.25
    smote_k: int = 5
    smote_multiplier: int = 3
    kmeans_restarts: int = 10
    threshold_step: float = 0.01
    gbt: GBTConfig = field(default_factory=GBTConfig)


@dataclass
class DataGenConfig:
    """Synthetic cohort parameters."""
    n_patients: int = 400
    hours_min: int = 24
    hours_max: int = 60
    sepsis_rate: float = 0.2
    corruption: Dict[str, Any] = field(default_factory=dict)


@dataclass
class IOConfig:
    """Default input and output locations."""
    input: str = "data/psv"
    output: str = "runs/latest"


@dataclass
class RunConfig:
    """Full run configuration."""
    registry_path: str = str(DEFAULT_REGISTRY_PATH)
    scores_path: str = str(DEFAULT_SCORES_PATH)
    seed: int = 7
    workers: int = 1
    iterations: int = 1
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    ml: MLConfig = field(default_factory=MLConfig)
    datagen: DataGenConfig = field(default_factory=DataGenConfig)
    io: IOConfig = field(default_factory=IOConfig)
    # Directory of the YAML file this config came from; not part of the hash.
    source_dir: Optional[str] = None

    def __post_init__(self):
        window, stride = self.preprocess.window, self.preprocess.stride
        if not window > stride > 0:
            raise ValueError(f"need window > stride > 0, got window={window} stride={stride}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        self.registry_path = str(_resolve(self.registry_path))
        self.scores_path = str(_resolve(self.scores_path))
        for label, path in (("registry", self.registry_path), ("scores", self.scores_path)):
            if not Path(path).exists():
                logger.error(f"{label} config not found: {path}")
                raise FileNotFoundError(f"{label} config not found: {path}")

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Return a copy with CLI flag values applied; ``None`` means not given."""
        top, pre, solver, ml, io = {}, {}, {}, {}, {}
        routes = {
            "seed": top, "workers": top, "iterations": top, "registry_path": top,
            "window": pre, "stride": pre,
            "gap_tol": solver, "node_budget": solver, "feas_tol": solver,
            "clusters": ml,
            "input": io, "output": io,
        }
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in routes:
                raise ValueError(f"unknown override: {key}")
            routes[key][key] = value
        return replace(
            self,
            preprocess=replace(self.preprocess, **pre),
            solver=replace(self.solver, **solver),
            ml=replace(self.ml, **ml),
            io=replace(self.io, **io),
            **top,
        )


def _resolve(path: Union[str, Path]) -> Path:
    """Expand ~ and resolve relative paths against cwd, then the package root."""
    p = Path(path).expanduser()
    if p.is_absolute() or p.exists():
        return p
    return PACKAGE_ROOT / p


def load_config(config_path: Optional[Union[str, Path]] = None) -> RunConfig:
    """Load run configuration from YAML file."""
    if config_path is None:
        config_path = os.getenv("CLINPROJ_CONFIG", str(DEFAULT_CONFIG_PATH))
    config_path = Path(config_path)

    if not config_path.exists():
        logger.error(f"Config file not found: {config_path}")
        raise FileNotFoundError(f"Config file not found: {config_path}")

    logger.info(f"Loading config from {config_path}")
    with open(config_path, "r") as f:
        raw = yaml.safe_load(f) or {}

    return parse_config(raw, source_dir=config_path.resolve().parent)


def parse_config(raw: Dict[str, Any], source_dir: Optional[Union[str, Path]] = None) -> RunConfig:
    """Parse raw YAML dict into RunConfig."""
    logger.debug("Parsing configuration dictionary")
    pre_raw = raw.get("preprocess", {})
    preprocess = PreprocessConfig(
        window=int(pre_raw.get("window", 6)),
        stride=int(pre_raw.get("stride", 3)),
        label_lead_hours=int(pre_raw.get("label_lead_hours", 6)),
    )

    solver_raw = raw.get("solver", {})
    solver = SolverConfig(
        gap_tol=float(solver_raw.get("gap_tol", 1e-6)),
        feas_tol=float(solver_raw.get("feas_tol", 1e-6)),
        node_budget=int(solver_raw.get("node_budget", 100_000)),
    )

    ml_raw = raw.get("ml", {})
    gbt_raw = ml_raw.get("gbt", {})
    ml = MLConfig(
        clusters=int(ml_raw.get("clusters", 25)),
        train_ratio=float(ml_raw.get("train_ratio", 0.75)),
        minority_frac=float(ml_raw.get("minority_frac", 0.25)),
        smote_k=int(ml_raw.get("smote_k", 5)),
        smote_multiplier=int(ml_raw.get("smote_multiplier", 3)),
        kmeans_restarts=int(ml_raw.get("kmeans_restarts", 10)),
        threshold_step=float(ml_raw.get("threshold_step", 0.01)),
        gbt=GBTConfig(
            max_depth=int(gbt_raw.get("max_depth", 4)),
            n_rounds=int(gbt_raw.get("n_rounds", 200)),
            learning_rate=float(gbt_raw.get("learning_rate", 0.1)),
            min_child_weight=float(gbt_raw.get("min_child_weight", 1.0)),
            reg_lambda=float(gbt_raw.get("reg_lambda", 1.0)),
            gamma=float(gbt_raw.get("gamma", 0.0)),
        ),
    )

    gen_raw = raw.get("datagen", {})
    datagen = DataGenConfig(
        n_patients=int(gen_raw.get("n_patients", 400)),
        hours_min=int(gen_raw.get("hours_min", 24)),
        hours_max=int(gen_raw.get("hours_max", 60)),
        sepsis_rate=float(gen_raw.get("sepsis_rate", 0.2)),
        corruption=dict(gen_raw.get("corruption", {})),
    )

    io_raw = raw.get("io", {})
    io = IOConfig(
        input=io_raw.get("input", "data/psv"),
        output=io_raw.get("output", "runs/latest"),
    )

    return RunConfig(
        registry_path=raw.get("registry_path", str(DEFAULT_REGISTRY_PATH)),
        scores_path=raw.get("scores_path", str(DEFAULT_SCORES_PATH)),
        seed=int(raw.get("seed", 7)),
        workers=int(raw.get("workers", get_default_workers())),
        iterations=int(raw.get("iterations", 1)),
        preprocess=preprocess,
        solver=solver,
        ml=ml,
        datagen=datagen,
        io=io,
        source_dir=None if source_dir is None else str(source_dir),
    )


def _portable(path: str, base: Path) -> str:
    if not Path(path).is_absolute():
        return Path(path).as_posix()
    try:
        return Path(os.path.relpath(Path(path).resolve(), base.resolve())).as_posix()
    except ValueError:
        return Path(path).as_posix()


def config_hash(config: RunConfig) -> str:
    """
    Stable sha256 over the canonical JSON form of a config.

    Paths are hashed relative to the config file's directory (the package
    root for configs built in code), so a copied checkout hashes the same.
    """
    base = Path(config.source_dir) if config.source_dir else PACKAGE_ROOT
    data = asdict(config)
    data.pop("source_dir")
    for key in ("registry_path", "scores_path"):
        data[key] = _portable(data[key], base)
    for key in ("input", "output"):
        data["io"][key] = _portable(data["io"][key], base)
    payload = json.dumps(data, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# Environment variable helpers
def get_log_level(debug: bool = False) -> str:
    """Log level from --debug, then CLINPROJ_LOG_LEVEL, then INFO."""
    if debug:
        return "DEBUG"
    return os.getenv("CLINPROJ_LOG_LEVEL", "INFO").upper()


def get_default_workers() -> int:
    """Projection worker count from CLINPROJ_WORKERS."""
    try:
        return max(1, int(os.getenv("CLINPROJ_WORKERS", "1")))
    except ValueError:
        return 1
