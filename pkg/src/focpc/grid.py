"""Uniform time grids and vector-valued samples living on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from focpc.errors import DomainError

__all__ = ["GridFunction", "TimeGrid", "check_order", "reflect"]


def check_order(alpha: float) -> float:
    """Validate a fractional order ``alpha`` in ``(0, 1]`` and return it as float."""
    alpha = float(alpha)
    if not (math.isfinite(alpha) and 0.0 < alpha <= 1.0):
        raise DomainError(f"fractional order must lie in (0, 1], got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of ``[t0, tf]`` into ``n_steps`` cells."""

    t0: float
    tf: float
    n_steps: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t0) and math.isfinite(self.tf)):
            raise DomainError("grid endpoints must be finite")
        if not self.tf > self.t0:
            raise DomainError(f"need tf > t0, got t0={self.t0!r}, tf={self.tf!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise DomainError(f"n_steps must be an integer >= 2, got {self.n_steps!r}")

    @property
    def h(self) -> float:
        return (self.tf - self.t0) / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_steps + 1) * self.h

    def __len__(self) -> int:
        return self.n_steps + 1

    def refine(self) -> TimeGrid:
        """Same interval with the step halved."""
        return TimeGrid(self.t0, self.tf, 2 * self.n_steps)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a ``d``-dimensional function at the nodes of a grid.

    ``values`` always has shape ``(n_steps + 1, d)``; a 1-D input is read as
    a scalar function.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != len(self.grid):
            raise DomainError(
                f"values of shape {np.shape(self.values)} do not match "
                f"a grid with {len(self.grid)} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise DomainError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: TimeGrid, fn: Callable[[np.ndarray], np.ndarray]) -> GridFunction:
        """Sample ``fn`` (vectorised over time) on ``grid``."""
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def component(self, i: int = 0) -> np.ndarray:
        return self.values[:, i]

    def with_values(self, values: np.ndarray) -> GridFunction:
        return GridFunction(self.grid, values)


def reflect(f: GridFunction) -> GridFunction:
    """Time reversal ``s = t0 + tf - t``; applying it twice is the identity."""
    return GridFunction(f.grid, f.values[::-1])
