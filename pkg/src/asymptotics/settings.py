"""
Run defaults

One YAML table (config/defaults.yaml) holds the grids, tolerances, slack and
seeds for every stage. ${VAR:default} placeholders are resolved from the
environment before parsing. The typed view is RunSettings.
"""

import logging
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, validator

from .errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULTS_PATH = Path(__file__).resolve().parents[2] / "config" / "defaults.yaml"

_ENV_PATTERN = re.compile(r'\$\{([^}]+)\}')


class SpectralSettings(BaseModel):
    """Decomposition tolerances"""
    tol_zero: float = 1e-9
    tol_ortho: float = 1e-10
    tol_pair: float = 1e-9
    tol_distinct: float = 1e-8
    tol_solv: float = 1e-9


class ExpansionSettings(BaseModel):
    """Profile grids and step restrictions"""
    dzeta: float = Field(0.01, gt=0.0)
    diffusion_safety: float = Field(0.4, gt=0.0, le=0.5)
    reaction_safety: float = Field(0.1, gt=0.0)
    blowup: float = 1e6
    zeta_margin: float = Field(2.0, ge=0.0)
    matching_tol: float = 1e-6


class SolverSettings(BaseModel):
    """Reference solver resolution"""
    cfl: float = Field(0.9, gt=0.0, le=1.0)
    relaxation_step: float = Field(0.02, gt=0.0)
    grid_step: float = Field(0.02, gt=0.0)
    kernel: str = "spline"
    blowup: float = 1e6
    decay_width: float = Field(6.0, gt=0.0)

    @validator('kernel')
    def known_kernel(cls, v):
        """Only the shipped advection kernels"""
        if v not in ('spline', 'cubic', 'monotone', 'linear'):
            raise ValueError(f"unknown advection kernel '{v}'")
        return v


class PrinciplesSettings(BaseModel):
    """Lemma suite sizes and seeds"""
    samples: int = Field(50, ge=1)
    lemma4_samples: int = Field(100, ge=1)
    seed: int = 20240611
    tolerance_floor: float = 1e-12
    cells: int = Field(200, ge=20)
    max_halvings: int = Field(20, ge=1)


class HarnessSettings(BaseModel):
    """Sweep layout"""
    eps: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    slack: float = Field(0.3, ge=0.0)
    horizon_cap: float = Field(0.5, gt=0.0)
    fractions: List[float] = Field(default_factory=lambda: [0.1, 0.25, 0.5, 0.75, 1.0])
    layer_tau: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    dense_delta: float = Field(0.01, gt=0.0)
    edge_cells: int = Field(2, ge=0)
    workers: int = Field(4, ge=1)
    check_separation: bool = True


class RunSettings(BaseModel):
    """Every tunable number of a run"""
    spectral: SpectralSettings = Field(default_factory=SpectralSettings)
    expansion: ExpansionSettings = Field(default_factory=ExpansionSettings)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    principles: PrinciplesSettings = Field(default_factory=PrinciplesSettings)
    harness: HarnessSettings = Field(default_factory=HarnessSettings)


def substitute_env(content: str) -> str:
    """Replace ${VAR:default} patterns with environment values."""
    def replace_env(match):
        var_expr = match.group(1)
        if ':' in var_expr:
            var_name, default = var_expr.split(':', 1)
        else:
            var_name, default = var_expr, ''
        return os.environ.get(var_name, default)

    return _ENV_PATTERN.sub(replace_env, content)


def load_defaults(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load the raw defaults table.

    Args:
        config_path: YAML file; the shipped config/defaults.yaml when omitted

    Returns:
        Parsed mapping (empty when the shipped file is missing)
    """
    path = Path(config_path) if config_path else DEFAULTS_PATH
    if not path.exists():
        if config_path:
            raise ConfigError(f"defaults file not found: {path}")
        logger.warning(f"Defaults table missing at {path}, using built-in values")
        return {}

    with open(path, 'r', encoding='utf-8') as f:
        content = substitute_env(f.read())

    try:
        data = yaml.safe_load(content) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"defaults table is not valid YAML: {e}")
    if not isinstance(data, dict):
        raise ConfigError("defaults table must be a mapping")
    return data


def load_settings(config_path: Optional[str] = None) -> RunSettings:
    """Load and validate the defaults table into RunSettings."""
    data = load_defaults(config_path)
    try:
        settings = RunSettings(**data)
    except ValidationError as e:
        raise ConfigError(f"invalid defaults table: {e}")
    logger.debug(f"Run settings resolved: {settings.model_dump()}")
    return settings
