#!/usr/bin/env python3
"""
SCALEFLOW - Run Configuration (Validation and Config Files)
pydantic RunConfig with the experiment parameters, the flat key = value file grammar and
the defaults < file < flags merge

Dependencies:
- errors.py: ConfigError for every rejected file, key or value
- example_systems.py: Preset names checked against PRESETS
- cli_runner.py: Builds one RunConfig per invocation

Provides:
- RunConfig (pydantic model, frozen)
- parse_config_text / load_config_file (flat grammar, values through yaml.safe_load)
- parse_periods / parse_pair for the two non-scalar value forms
- build_config (merge and validate)

Config file grammar:
    # comment
    key = value
Keys are RunConfig field names (dashes are accepted for underscores). periods takes
"a..b" (inclusive integer range) or a comma list, t_window and adpt_window take "lo,hi".
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .example_systems import PRESETS
from .measure_model import GrowthClass

logger = logging.getLogger(__name__)

EXPERIMENTS = ("approximate", "orbit-dist", "chain", "embed", "adpt")

DEFAULT_PRESETS = {
    "approximate": "two-mass-default",
    "orbit-dist": "two-mass-default",
    "chain": "torus-golden",
    "embed": "torus-golden",
    "adpt": "torus-golden",
}

DEFAULT_PERIODS = {
    "approximate": [float(p) for p in range(1, 21)],
    "orbit-dist": [2.0, 4.0, 8.0, 16.0],
}

Experiment = Literal["approximate", "orbit-dist", "chain", "embed", "adpt"]


class RunConfig(BaseModel):
    """All parameters of one experiment run"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: Experiment
    preset: Optional[str] = None

    # measure side
    rho: float = 1.0
    sigma: float = 1.0
    epsilon: float = 0.1
    periods: Optional[List[float]] = None
    t_window: Tuple[float, float] = (-8.0, 8.0)
    dt: float = 0.01
    family_size: int = 64

    # chain search
    s: float = 10.0
    net_size: int = 64
    max_nodes: int = 64

    # embedding
    t_cut: float = 8.0
    kernel_dt: float = 0.01
    anchors: int = 16
    y_min: float = -6.0
    y_max: float = 6.0
    dy: float = 0.05
    tau: float = 0.5

    # pseudo-trajectories
    curve: Literal["orbit", "constant"] = "orbit"
    adpt_t: float = 1.0
    adpt_window: Tuple[float, float] = (0.0, 1.0)
    tau_step: float = 0.01
    reading: Literal["corrected", "literal"] = "corrected"

    output: Optional[str] = None
    format: Optional[Literal["csv", "json"]] = None

    @field_validator(
        "rho", "sigma", "epsilon", "dt", "s", "t_cut", "kernel_dt", "dy", "tau_step"
    )
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Parameters that must be finite and strictly positive"""
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"must be a positive finite number, got {v}")
        return v

    @field_validator("family_size", "net_size", "max_nodes")
    @classmethod
    def validate_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"must be at least 1, got {v}")
        return v

    @field_validator("anchors")
    @classmethod
    def validate_anchors(cls, v: int) -> int:
        if v < 2:
            raise ValueError(f"a Keller map needs at least 2 anchors, got {v}")
        return v

    @field_validator("tau", "adpt_t", "y_min", "y_max")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v

    @field_validator("periods")
    @classmethod
    def validate_periods(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        """Periods are positive and strictly increasing"""
        if v is None:
            return v
        if not v:
            raise ValueError("at least one period is required")
        if any(not (math.isfinite(p) and p > 0) for p in v):
            raise ValueError("periods must be positive")
        if any(later <= earlier for earlier, later in zip(v, v[1:])):
            raise ValueError("periods must be strictly increasing")
        return v

    @field_validator("t_window", "adpt_window")
    @classmethod
    def validate_window(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        lo, hi = v
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("window bounds must be finite")
        if hi < lo:
            raise ValueError(f"window [{lo}, {hi}] is empty")
        return v

    @field_validator("preset")
    @classmethod
    def validate_preset(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and v not in PRESETS:
            raise ValueError(f"unknown preset {v!r}, expected one of {sorted(PRESETS)}")
        return v

    @model_validator(mode="after")
    def validate_ranges(self) -> "RunConfig":
        if not self.y_max > self.y_min:
            raise ValueError(f"y grid [{self.y_min}, {self.y_max}] is empty")
        if self.experiment == "orbit-dist" and not self.t_window[1] > self.t_window[0]:
            raise ValueError("orbit-dist needs a nonempty t_window")
        return self

    @property
    def resolved_preset(self) -> str:
        return self.preset or DEFAULT_PRESETS[self.experiment]

    @property
    def resolved_periods(self) -> List[float]:
        if self.periods is not None:
            return list(self.periods)
        return list(DEFAULT_PERIODS.get(self.experiment, DEFAULT_PERIODS["approximate"]))

    @property
    def resolved_format(self) -> str:
        """Tables default to csv, reports to json"""
        if self.format is not None:
            return self.format
        return "csv" if self.experiment in ("approximate", "orbit-dist") else "json"

    @property
    def growth_class(self) -> GrowthClass:
        return GrowthClass(self.rho, self.sigma)


FILE_KEYS = frozenset(RunConfig.model_fields) - {"experiment"}


# ---------------------------------------------------------------------------------------
# Value parsing
# ---------------------------------------------------------------------------------------


def parse_periods(text: str) -> List[float]:
    """
    "a..b" is the inclusive integer range, anything else a comma list.

    Raises:
        ConfigError: Malformed range or list
    """
    raw = text.strip()
    try:
        if ".." not in raw:
            return [float(part) for part in raw.split(",") if part.strip()]
        lo, hi = (int(part) for part in raw.split("..", 1))
    except ValueError as exc:
        raise ConfigError(f"cannot parse periods {raw!r}: expected a..b or a comma list") from exc
    if hi < lo:
        raise ConfigError(f"period range {raw!r} is empty")
    return [float(p) for p in range(lo, hi + 1)]


def parse_pair(text: str) -> Tuple[float, float]:
    """
    "lo,hi" as a pair of floats.

    Raises:
        ConfigError: Not exactly two numbers
    """
    parts = [part.strip() for part in text.split(",")]
    try:
        if len(parts) != 2:
            raise ValueError
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError(f"cannot parse {text!r}: expected lo,hi") from None


_STRUCTURED = {
    "periods": parse_periods,
    "t_window": parse_pair,
    "adpt_window": parse_pair,
}


def parse_value(key: str, raw: str) -> Any:
    if key in _STRUCTURED:
        return _STRUCTURED[key](raw)
    try:
        return yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value of {key}: {exc}") from exc


def _normalize_key(key: str) -> str:
    return key.strip().replace("-", "_")


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    """
    Parse the flat key = value grammar.

    Raises:
        ConfigError: Malformed line, unknown or repeated key
    """
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = _normalize_key(key)
        if key not in FILE_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: key {key!r} given twice")
        values[key] = parse_value(key, value.strip())
    return values


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Raises:
        ConfigError: The file cannot be read or is invalid
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        where = ".".join(str(p) for p in error["loc"]) or "config"
        parts.append(f"{where}: {error['msg']}")
    return "; ".join(parts)


def build_config(
    experiment: str,
    file_values: Optional[Mapping[str, Any]] = None,
    flag_values: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Merge defaults < config file < flags and validate.

    Flag values for periods and the windows may be given as their raw strings.

    Raises:
        ConfigError: Unknown key or a value fails validation
    """
    merged: Dict[str, Any] = dict(file_values or {})
    for key, value in (flag_values or {}).items():
        if value is None:
            continue
        key = _normalize_key(key)
        if key not in FILE_KEYS:
            raise ConfigError(f"unknown option {key!r}")
        if key in _STRUCTURED and isinstance(value, str):
            value = _STRUCTURED[key](value)
        merged[key] = value
    try:
        config = RunConfig(experiment=experiment, **merged)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc
    logger.debug("run config: %s", config.model_dump())
    return config
