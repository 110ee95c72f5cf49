"""Grid, geometry, and randomness primitives shared by all localization schemes.

The estimation schemes operate on a rectangular deployment area discretized
into square cells. Probability mass is stored as a dense row-major density
grid: cell (row, col) covers
``[col*res, (col+1)*res] x [row*res, (row+1)*res]`` and its center is the
point the density value refers to. A ``GridEstimate`` integrates to 1 over
the area (sum of densities times cell area), a ``Constraint`` is an
arbitrary nonnegative likelihood surface on the same grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

NodeId = int
RngSeed = int

# Densities below this are flushed to exact zero to keep long constraint
# chains from drifting into denormal territory.
DENSITY_FLOOR = 1e-300

# |sum * cell_area - 1| must stay within this for any GridEstimate.
NORMALIZATION_TOL = 1e-9


class GridShapeError(ValueError):
    """Raised when a cell array does not match its grid specification."""


class GridIndexError(IndexError):
    """Raised for out-of-range (row, col) cell lookups."""


class NegativeDensityError(ValueError):
    """Raised when a density or likelihood surface contains negatives."""


class NormalizationError(ValueError):
    """Raised when a GridEstimate does not integrate to 1 over the area."""


class ContradictionError(ValueError):
    """Raised when intersecting constraints leaves zero mass everywhere."""


@dataclass(frozen=True)
class Point:
    """A position in meters within (or near) the deployment area."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got {self}")


def euclidean(a: Point, b: Point) -> float:
    """Straight-line distance between two points."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class GridSpec:
    """Discretization of a ``width x height`` meter area into square cells.

    ``n_cols``/``n_rows`` round up, so the last column/row may overhang the
    area when the side is not a multiple of ``resolution``.
    """

    width: float
    height: float
    resolution: float = 2.0

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("area sides must be positive")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")

    @property
    def n_cols(self) -> int:
        return math.ceil(self.width / self.resolution)

    @property
    def n_rows(self) -> int:
        return math.ceil(self.height / self.resolution)

    @property
    def n_cells(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def cell_area(self) -> float:
        return self.resolution * self.resolution


def cell_center(spec: GridSpec, row: int, col: int) -> Point:
    """Center point of cell (row, col); raises GridIndexError off the grid."""
    if not (0 <= row < spec.n_rows and 0 <= col < spec.n_cols):
        raise GridIndexError(
            f"cell ({row}, {col}) outside grid {spec.n_rows}x{spec.n_cols}"
        )
    half = spec.resolution / 2.0
    return Point(col * spec.resolution + half, row * spec.resolution + half)


@lru_cache(maxsize=64)
def cell_center_arrays(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """(xs, ys) arrays of shape (n_rows, n_cols) with every cell center.

    Cached per spec: sweeps reuse a handful of grid shapes thousands of
    times. Returned arrays are read-only.
    """
    half = spec.resolution / 2.0
    xs_1d = np.arange(spec.n_cols) * spec.resolution + half
    ys_1d = np.arange(spec.n_rows) * spec.resolution + half
    xs, ys = np.meshgrid(xs_1d, ys_1d)
    xs.setflags(write=False)
    ys.setflags(write=False)
    return xs, ys


def _as_cell_grid(spec: GridSpec, cells: np.ndarray, kind: str) -> np.ndarray:
    arr = np.asarray(cells, dtype=np.float64)
    if arr.shape != (spec.n_rows, spec.n_cols):
        raise GridShapeError(
            f"{kind} cells have shape {arr.shape}, grid needs "
            f"({spec.n_rows}, {spec.n_cols})"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{kind} cells must be finite")
    if np.any(arr < 0):
        raise NegativeDensityError(f"{kind} cells must be nonnegative")
    return arr


@dataclass(frozen=True, eq=False)
class Constraint:
    """A nonnegative likelihood surface over the grid (not normalized)."""

    spec: GridSpec
    cells: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_cell_grid(self.spec, self.cells, "constraint")
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)


@dataclass(frozen=True, eq=False)
class GridEstimate:
    """A probability density over the grid: sum(cells) * cell_area == 1."""

    spec: GridSpec
    cells: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_cell_grid(self.spec, self.cells, "estimate")
        total = float(arr.sum()) * self.spec.cell_area
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NormalizationError(
                f"estimate integrates to {total!r}, expected 1 within "
                f"{NORMALIZATION_TOL}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)


@dataclass(frozen=True)
class RangeMeasurement:
    """One noisy range reading: mean distance in meters and its stdev."""

    mean: float
    stdev: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean) and self.mean >= 0):
            raise ValueError(f"measurement mean must be >= 0, got {self.mean}")
        if not (math.isfinite(self.stdev) and self.stdev > 0):
            raise ValueError(f"measurement stdev must be > 0, got {self.stdev}")


@dataclass(frozen=True)
class BeaconLogRow:
    """One beacon flood as recorded by a receiving node.

    ``hops[0]`` is the sink's own broadcast range; each later entry is one
    more relay on the path to the receiver. ``hops`` is ordered
    sink-to-receiver.
    """

    beacon_position: Point
    hops: tuple[RangeMeasurement, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "hops", tuple(self.hops))
        if len(self.hops) < 1:
            raise ValueError("a beacon log row needs at least one hop")


def substream(seed: RngSeed, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key), stable across call order.

    Every random draw in the simulator comes from one of these, so results
    are a pure function of the seed and the logical position of the draw,
    never of execution interleaving.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def substream_token(seed: RngSeed, *key: int) -> int:
    """uint64 fingerprint of a substream, for reporting which one a run used."""
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1, np.uint64)[0])
