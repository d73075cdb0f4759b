"""Rectangular mesh shared by all modules.

The fluid solver is a staggered (MAC) scheme, so the mesh object only fixes
cell counts and extents; face/center array shapes are derived where needed.
Cells must be square: the compact stencils below assume a single spacing h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one cell per axis")
        hx, hy = self.lx / self.nx, self.ly / self.ny
        if abs(hx - hy) > 1e-12 * max(hx, hy):
            raise ValueError("cells must be square (lx/nx == ly/ny)")

    @property
    def h(self) -> float:
        return self.lx / self.nx

    @property
    def ncells(self) -> int:
        return self.nx * self.ny

    @property
    def cell_volume(self) -> float:
        return self.h * self.h

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.lx, self.ly))

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates as (nx, ny) arrays (ij indexing)."""
        x = (np.arange(self.nx) + 0.5) * self.h
        y = (np.arange(self.ny) + 0.5) * self.h
        return np.meshgrid(x, y, indexing="ij")

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Strict interior test for an (n, 2) array of positions."""
        x, y = points[:, 0], points[:, 1]
        return (x > 0) & (x < self.lx) & (y > 0) & (y < self.ly)
