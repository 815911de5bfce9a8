"""
Study configuration: built-in defaults, YAML file, CLI overrides.

Precedence (lowest to highest): dataclass defaults -> study_defaults.yaml or
the file named by DGCONTACT_CONFIG -> explicit overrides (CLI flags, API body).
"""
import logging
import os
from dataclasses import dataclass, field, fields, asdict, replace
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from utils.errors import ConfigError

load_dotenv(dotenv_path=os.getenv("DGCONTACT_ENV_FILE", ".env"))

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "study_defaults.yaml"

METHODS = ("sipg", "nipg")
STRATEGIES = ("uniform", "adaptive")


@dataclass(frozen=True)
class StudyConfig:
    """Flags of one convergence or adaptive study."""

    problem: int = 1
    method: str = "sipg"
    strategy: str = "uniform"
    levels: int = 5
    theta: float = 0.4
    penalty: Optional[float] = None  # None -> 70 for both forms
    initial_n: Optional[int] = None  # None -> 1 (uniform) / 4 (adaptive)
    max_dofs: int = 200_000
    max_iterations: int = 60
    quad_degree: int = 7
    output: Optional[str] = None
    emit_meshes: Optional[str] = None
    verbose: bool = False
    problem_overrides: Dict[str, Any] = field(default_factory=dict)

    def resolved_initial_n(self) -> int:
        if self.initial_n is not None:
            return self.initial_n
        return 1 if self.strategy == "uniform" else 4

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _validate(config: StudyConfig) -> StudyConfig:
    if config.problem not in (1, 2):
        raise ConfigError(f"problem must be 1 or 2, got {config.problem}")
    if config.method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {config.method!r}")
    if config.strategy not in STRATEGIES:
        raise ConfigError(f"strategy must be one of {STRATEGIES}, got {config.strategy!r}")
    if config.levels < 1:
        raise ConfigError("levels must be >= 1")
    if not 0.0 < config.theta <= 1.0:
        raise ConfigError("theta must lie in (0, 1]")
    if config.penalty is not None and config.penalty <= 0:
        raise ConfigError("penalty must be positive")
    if config.initial_n is not None and config.initial_n < 1:
        raise ConfigError("initial_n must be >= 1")
    if config.quad_degree < 5:
        raise ConfigError("quad_degree must be >= 5")
    if not isinstance(config.problem_overrides, dict):
        raise ConfigError("problem_overrides must be a mapping")
    return config


def merge_overrides(config: StudyConfig, overrides: Dict[str, Any]) -> StudyConfig:
    """Return a copy of config with non-None overrides applied."""
    known = {f.name for f in fields(StudyConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"Unknown configuration keys: {sorted(unknown)}")

    updates = {k: v for k, v in overrides.items() if v is not None}
    if "problem_overrides" in updates:
        merged = dict(config.problem_overrides)
        merged.update(updates["problem_overrides"] or {})
        updates["problem_overrides"] = merged
    try:
        return _validate(replace(config, **updates))
    except TypeError as e:
        raise ConfigError(f"Invalid configuration value: {e}") from e


def load_study_config(yaml_path: Optional[Path] = None) -> StudyConfig:
    """
    Load a StudyConfig from YAML.

    A missing default file yields the built-in defaults; a missing explicit
    file is an error.
    """
    explicit = yaml_path is not None or os.getenv("DGCONTACT_CONFIG")
    path = Path(yaml_path or os.getenv("DGCONTACT_CONFIG") or DEFAULT_CONFIG_PATH)

    if not path.exists():
        if explicit:
            raise ConfigError(f"Configuration file not found: {path}")
        return StudyConfig()

    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Could not parse {path}: {e}") from e

    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping at top level")

    # YAML keys may use the CLI spelling (initial-n)
    data = {str(k).replace("-", "_"): v for k, v in data.items()}
    logger.debug(f"Loaded study configuration from {path}: {sorted(data)}")
    return merge_overrides(StudyConfig(), data)


def log_level_from_env(default: int = logging.INFO) -> int:
    name = os.getenv("DGCONTACT_LOG_LEVEL")
    if not name:
        return default
    return getattr(logging, name.upper(), default)
