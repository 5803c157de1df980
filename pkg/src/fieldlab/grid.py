"""Uniform 1-D grids and grid-aligned regions.

All quadrature in the package is the Riemann sum ``h * sum(values)``
over the grid points.  Regions resolve their interval endpoints to
grid-point indices with left-closed cells, so integrals over a region
and its complement add up to the full-grid integral exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Snap tolerance for endpoint -> index resolution, in units of the spacing h.
_SNAP_TOL = 1e-9


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``n`` points on ``[x_min, x_max]`` with spacing ``h``."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"grid needs at least 2 points, got n={self.n}")
        if not self.x_max > self.x_min:
            raise ValueError(f"grid bounds must satisfy x_min < x_max, got [{self.x_min}, {self.x_max}]")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    def to_json(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n": self.n}

    @classmethod
    def from_json(cls, obj: dict) -> "Grid1D":
        return cls(float(obj["x_min"]), float(obj["x_max"]), int(obj["n"]))


def build_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), int(n))


def cell_centered_grid(a: float, b: float, n: int) -> Grid1D:
    """Grid whose points are the centers of ``n`` equal cells covering [a, b].

    The point weight h equals the cell width (b - a) / n, so piecewise
    constant profiles aligned with the cells integrate exactly.
    """
    if n < 2:
        raise ValueError(f"grid needs at least 2 points, got n={n}")
    w = (b - a) / n
    return Grid1D(a + 0.5 * w, b - 0.5 * w, n)


@dataclass(frozen=True)
class Region:
    """Disjoint union of intervals, resolved to grid indices on demand.

    Membership convention: a grid point belongs to [a, b) (left-closed
    cells); an endpoint at or beyond x_max closes the last cell so that
    [x_min, x_max] covers every point.
    """

    intervals: tuple[tuple[float, float], ...]

    def __init__(self, intervals):
        ivals = tuple((float(a), float(b)) for a, b in intervals)
        for a, b in ivals:
            if not a < b:
                raise ValueError(f"region interval needs a < b, got [{a}, {b}]")
        ivals = tuple(sorted(ivals))
        for (_, b0), (a1, _) in zip(ivals, ivals[1:]):
            if a1 < b0:
                raise ValueError("region intervals overlap")
        object.__setattr__(self, "intervals", ivals)

    def indices(self, grid: Grid1D) -> np.ndarray:
        """Sorted indices of the grid points inside the region."""
        h = grid.h
        tol = _SNAP_TOL * h
        chunks = []
        prev_hi = -1
        for a, b in self.intervals:
            if a < grid.x_min - tol or b > grid.x_max + tol:
                raise ValueError(f"region interval [{a}, {b}] not within grid [{grid.x_min}, {grid.x_max}]")
            i_lo = int(np.ceil((a - grid.x_min) / h - _SNAP_TOL))
            if b >= grid.x_max - tol:
                i_hi = grid.n
            else:
                i_hi = int(np.ceil((b - grid.x_min) / h - _SNAP_TOL))
            i_lo = max(i_lo, 0)
            i_hi = min(i_hi, grid.n)
            if i_lo < prev_hi:
                raise ValueError("region intervals overlap after snapping to the grid")
            prev_hi = i_hi
            if i_lo < i_hi:
                chunks.append(np.arange(i_lo, i_hi, dtype=np.int64))
        if not chunks:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(chunks)

    def mask(self, grid: Grid1D) -> np.ndarray:
        m = np.zeros(grid.n, dtype=bool)
        m[self.indices(grid)] = True
        return m

    def complement(self, grid: Grid1D) -> "Region":
        """Region holding exactly the grid points this one excludes."""
        m = ~self.mask(grid)
        return region_from_mask(m, grid)

    def to_json(self) -> list:
        return [[a, b] for a, b in self.intervals]

    @classmethod
    def from_json(cls, obj) -> "Region":
        return cls(tuple((float(a), float(b)) for a, b in obj))


def full_region(grid: Grid1D) -> Region:
    return Region(((grid.x_min, grid.x_max),))


def region_from_mask(mask: np.ndarray, grid: Grid1D) -> Region:
    """Build a Region whose resolved indices equal the True entries of mask."""
    if mask.shape != (grid.n,):
        raise ValueError("mask length does not match grid")
    if not mask.any():
        raise ValueError("empty mask has no region representation")
    x = grid.points
    padded = np.concatenate(([False], mask, [False]))
    starts = np.nonzero(padded[1:] & ~padded[:-1])[0]
    stops = np.nonzero(~padded[1:] & padded[:-1])[0]
    intervals = []
    for i0, i1 in zip(starts, stops):
        # Midpoints between neighbouring points resolve back to exactly [i0, i1).
        a = grid.x_min if i0 == 0 else 0.5 * (x[i0 - 1] + x[i0])
        b = grid.x_max if i1 == grid.n else 0.5 * (x[i1 - 1] + x[i1])
        intervals.append((a, b))
    return Region(tuple(intervals))
