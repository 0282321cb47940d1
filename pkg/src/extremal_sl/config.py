"""Configuration management for extremal-sl."""

from __future__ import annotations

import dataclasses
import json
import os
import platform
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

from extremal_sl.errors import ParameterError

THREADS_ENV = "EXTREMAL_SL_THREADS"

DEFAULT_CONFIG = {
    "grid_n": 4096,
    "tol_alg": 1e-10,
    "tol_quad": 1e-10,
    "max_iters": 10000,
    "grad_tol": 1e-8,
    "zeta": 1e-3,
    "init_amplitude": 0.05,
    "armijo": 1e-4,
    "monotonicity_slack": 1e-3,
    "format": "csv",
    "threads": None,
}

FORMATS = ("csv", "json")


def get_config_dir() -> Path:
    """Return the platform-specific config directory."""
    system = platform.system()
    if system == "Windows":
        base = os.environ.get("APPDATA", Path.home() / "AppData" / "Roaming")
        return Path(base) / "extremal-sl"
    elif system == "Darwin":
        return Path.home() / "Library" / "Application Support" / "extremal-sl"
    else:  # Linux and others
        xdg = os.environ.get("XDG_CONFIG_HOME", Path.home() / ".config")
        return Path(xdg) / "extremal-sl"


def get_config_path() -> Path:
    """Return the path to the configuration file."""
    return get_config_dir() / "config.json"


def load_config(path: Optional[Path] = None) -> dict[str, Any]:
    """Load configuration from disk, falling back to defaults."""
    config = dict(DEFAULT_CONFIG)
    config_path = Path(path) if path is not None else get_config_path()
    if config_path.exists():
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                user_config = json.load(f)
            if isinstance(user_config, dict):
                config.update({k: v for k, v in user_config.items() if k in DEFAULT_CONFIG})
        except (json.JSONDecodeError, OSError):
            pass
    return config


def save_config(config: Mapping[str, Any], path: Optional[Path] = None) -> None:
    """Persist the configuration to disk."""
    config_path = Path(path) if path is not None else get_config_path()
    config_path.parent.mkdir(parents=True, exist_ok=True)
    with open(config_path, "w", encoding="utf-8") as f:
        json.dump(dict(config), f, indent=2)


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings shared by the optimizer, the period module and the CLI."""

    grid_n: int = DEFAULT_CONFIG["grid_n"]
    tol_alg: float = DEFAULT_CONFIG["tol_alg"]
    tol_quad: float = DEFAULT_CONFIG["tol_quad"]
    max_iters: int = DEFAULT_CONFIG["max_iters"]
    grad_tol: float = DEFAULT_CONFIG["grad_tol"]
    zeta: float = DEFAULT_CONFIG["zeta"]
    init_amplitude: float = DEFAULT_CONFIG["init_amplitude"]
    armijo: float = DEFAULT_CONFIG["armijo"]
    monotonicity_slack: float = DEFAULT_CONFIG["monotonicity_slack"]
    format: str = DEFAULT_CONFIG["format"]
    threads: Optional[int] = DEFAULT_CONFIG["threads"]
    output_path: Optional[Path] = None

    def __post_init__(self) -> None:
        if int(self.grid_n) != self.grid_n or self.grid_n < 64:
            raise ParameterError(f"grid_n must be an integer >= 64, got {self.grid_n!r}")
        for name in ("tol_alg", "tol_quad", "grad_tol", "zeta", "armijo", "monotonicity_slack"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be at least 1, got {self.max_iters!r}")
        if self.format not in FORMATS:
            raise ParameterError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.threads is not None and self.threads < 1:
            raise ParameterError(f"threads must be positive, got {self.threads!r}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in mapping.items() if k in names})

    def to_mapping(self) -> dict[str, Any]:
        """The persisted settings, keyed like DEFAULT_CONFIG."""
        return {key: getattr(self, key) for key in DEFAULT_CONFIG}

    def replace(self, **overrides: Any) -> "RunConfig":
        """Copy with the non-None overrides applied."""
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})


def resolve_threads(config: RunConfig) -> int:
    """Worker cap: EXTREMAL_SL_THREADS, then config.threads, then the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            value = 0
        if value > 0:
            return value
    if config.threads:
        return config.threads
    return os.cpu_count() or 1
