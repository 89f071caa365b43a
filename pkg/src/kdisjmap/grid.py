"""Unit lattices for Kohonen maps.

Units are indexed row-major, ``index = row * cols + col``.  Distances between
units use the Chebyshev metric, so the radius-1 neighbourhood of an interior
unit is the 3x3 block around it.  A cylinder wraps the column axis, a torus
wraps both axes.
"""

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, InvalidUnitError

TOPOLOGIES = ("string", "rectangle", "cylinder", "torus")


@dataclass(frozen=True)
class GridSpec:
    """Shape and topology of a map.

    Parameters
    ----------
    rows, cols : int
        Lattice size; ``rows * cols`` units.
    topology : {"string", "rectangle", "cylinder", "torus"}
        ``string`` is a one-dimensional chain and needs ``rows == 1`` or
        ``cols == 1``.
    """

    rows: int
    cols: int
    topology: str = "rectangle"

    def __post_init__(self):
        if int(self.rows) < 1 or int(self.cols) < 1:
            raise ConfigError(f"grid must have positive size, got {self.rows}x{self.cols}")
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}; expected one of {TOPOLOGIES}")
        if self.topology == "string" and self.rows != 1 and self.cols != 1:
            raise ConfigError("string topology requires rows == 1 or cols == 1")

    @property
    def n_units(self) -> int:
        return self.rows * self.cols

    def coords(self, u: int) -> tuple[int, int]:
        u = _check_unit(self, u)
        return divmod(u, self.cols)

    def index(self, row: int, col: int) -> int:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise InvalidUnitError(f"({row}, {col}) outside a {self.rows}x{self.cols} grid")
        return row * self.cols + col


def _check_unit(spec, u):
    u = int(u)
    if not 0 <= u < spec.n_units:
        raise InvalidUnitError(f"unit {u} outside [0, {spec.n_units})")
    return u


def _axis_gap(a, b, size, wrap):
    d = np.abs(a - b)
    if wrap:
        d = np.minimum(d, size - d)
    return d


def grid_distance(spec: GridSpec, u: int, v: int) -> int:
    """Chebyshev distance between units ``u`` and ``v``."""
    ru, cu = spec.coords(u)
    rv, cv = spec.coords(v)
    wrap_rows = spec.topology == "torus"
    wrap_cols = spec.topology in ("cylinder", "torus")
    dr = _axis_gap(ru, rv, spec.rows, wrap_rows)
    dc = _axis_gap(cu, cv, spec.cols, wrap_cols)
    return int(max(dr, dc))


@lru_cache(maxsize=64)
def _distance_matrix(spec):
    rows, cols = np.divmod(np.arange(spec.n_units), spec.cols)
    dr = _axis_gap(rows[:, None], rows[None, :], spec.rows, spec.topology == "torus")
    dc = _axis_gap(cols[:, None], cols[None, :], spec.cols, spec.topology in ("cylinder", "torus"))
    out = np.maximum(dr, dc)
    out.setflags(write=False)
    return out


def distance_matrix(spec: GridSpec) -> np.ndarray:
    """All pairwise unit distances as a read-only ``U x U`` integer array."""
    return _distance_matrix(spec)


@lru_cache(maxsize=1024)
def _neighbor_array(spec, u, radius):
    out = np.flatnonzero(_distance_matrix(spec)[u] <= radius)
    out.setflags(write=False)
    return out


def neighbor_array(spec: GridSpec, u: int, radius: int) -> np.ndarray:
    """Sorted indices of the units within ``radius`` of ``u`` (``u`` included)."""
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    return _neighbor_array(spec, _check_unit(spec, u), int(radius))


def neighbors(spec: GridSpec, u: int, radius: int) -> set[int]:
    return {int(v) for v in neighbor_array(spec, u, radius)}


def is_connected(spec: GridSpec, units) -> bool:
    """True if ``units`` form a single component under radius-1 adjacency."""
    units = {_check_unit(spec, u) for u in units}
    if not units:
        raise ValueError("is_connected needs a non-empty set of units")
    start = next(iter(units))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in _neighbor_array(spec, u, 1):
            v = int(v)
            if v in units and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(units)
