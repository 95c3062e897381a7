"""
Sampled field containers

Plain dataclasses around numpy arrays; the pydantic models in schemas.py
carry the scalar metadata.
"""

from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np


@dataclass
class GridField:
    """Values of U(·, t, ·) on a uniform x-grid, indexed (x-point, state)"""
    x_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.x_grid.size:
            raise ValueError(f"values shape {self.values.shape} does not match grid of {self.x_grid.size}")
        if self.x_grid.size > 1 and not np.all(np.diff(self.x_grid) > 0.0):
            raise ValueError("grid spacing must be strictly positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field has non-finite entries")

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0]) if self.x_grid.size > 1 else 0.0

    @property
    def states(self) -> int:
        return self.values.shape[1]

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass
class SpaceTimeField:
    """Snapshots of U indexed (time, x-point, state) plus scheme metadata"""
    x_grid: np.ndarray
    times: np.ndarray
    values: np.ndarray
    eps: float
    scheme: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[:2] != (self.times.size, self.x_grid.size):
            raise ValueError(f"values shape {self.values.shape} does not match "
                             f"{self.times.size} snapshots x {self.x_grid.size} points")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0.0):
            raise ValueError("snapshots must be strictly increasing in t")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field has non-finite entries")

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    def snapshot(self, index: int) -> GridField:
        return GridField(x_grid=self.x_grid, values=self.values[index])
