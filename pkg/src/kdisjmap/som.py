"""Stochastic Kohonen training on real-valued data.

The codebook holds one code vector per grid unit.  Training draws one
observation at a time, finds the winning unit by squared Euclidean distance
and moves the winner and every unit within the current radius toward the
observation.  Learning rate and radius both decay linearly.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NumericError, ShapeError
from .grid import GridSpec, neighbor_array

DEFAULT_EPS0 = 0.5
DEFAULT_EPS_MIN = 0.01


@dataclass(frozen=True)
class ComponentRange:
    """Contiguous block of code-vector components ``[start, start + length)``."""

    start: int
    length: int

    def __post_init__(self):
        if self.start < 0 or self.length < 1:
            raise ValueError(f"invalid component range start={self.start} length={self.length}")

    @property
    def stop(self) -> int:
        return self.start + self.length

    @property
    def slice(self) -> slice:
        return slice(self.start, self.stop)

    @classmethod
    def full(cls, dim):
        return cls(0, dim)


@dataclass(frozen=True)
class Schedule:
    """Linear learning-rate and radius decay over ``total_steps`` steps.

    ``epsilon(t)`` goes from ``eps0`` at ``t = 0`` to ``eps_min`` at
    ``t = T - 1``.  ``radius(t)`` is ``radius0 * (1 - t / T)`` rounded half
    up, so it shrinks to 0 before the end of training.
    """

    total_steps: int
    eps0: float = DEFAULT_EPS0
    eps_min: float = DEFAULT_EPS_MIN
    radius0: int = 1

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError("total_steps must be positive")
        if not (self.eps0 >= self.eps_min > 0):
            raise ValueError(f"need eps0 >= eps_min > 0, got {self.eps0}, {self.eps_min}")
        if self.radius0 < 0:
            raise ValueError("radius0 must be non-negative")

    def epsilon(self, t: int) -> float:
        if self.total_steps == 1:
            return float(self.eps0)
        return self.eps0 + (self.eps_min - self.eps0) * t / (self.total_steps - 1)

    def radius(self, t: int) -> int:
        return int(math.floor(self.radius0 * (1.0 - t / self.total_steps) + 0.5))

    def epsilons(self) -> np.ndarray:
        return np.array([self.epsilon(t) for t in range(self.total_steps)])

    def radii(self) -> np.ndarray:
        return np.array([self.radius(t) for t in range(self.total_steps)], dtype=int)


def default_radius0(spec: GridSpec) -> int:
    return max(1, max(spec.rows, spec.cols) // 2)


def default_schedule(spec: GridSpec, n_items: int, **kwargs) -> Schedule:
    """Schedule with ``T = 20 * n_items`` and a radius starting at half the grid."""
    kwargs.setdefault("radius0", default_radius0(spec))
    return Schedule(total_steps=20 * n_items, **kwargs)


@dataclass
class Codebook:
    spec: GridSpec
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != self.spec.n_units:
            raise ShapeError(
                f"codebook needs shape ({self.spec.n_units}, dim), got {self.vectors.shape}"
            )

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def copy(self):
        return Codebook(self.spec, self.vectors.copy())

    def check_finite(self):
        if not np.all(np.isfinite(self.vectors)):
            raise NumericError("codebook contains non-finite values")


def init_codebook(spec: GridSpec, dim: int, lower, upper, seed=None, rng=None) -> Codebook:
    """Draw every component uniformly in ``[lower[c], upper[c]]``.

    Pass either ``seed`` or an existing ``numpy.random.Generator``.
    """
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (dim,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (dim,))
    if np.any(lower > upper):
        bad = int(np.flatnonzero(lower > upper)[0])
        raise ValueError(f"invalid bounds at component {bad}: {lower[bad]} > {upper[bad]}")
    if rng is None:
        rng = np.random.default_rng(seed)
    u = rng.random((spec.n_units, dim))
    return Codebook(spec, lower + u * (upper - lower))


def _sq_distances(vectors, x, sl):
    diff = vectors[:, sl] - x[sl]
    return np.einsum("ij,ij->i", diff, diff)


def winner(cb: Codebook, x, restrict: ComponentRange | None = None) -> int:
    """Index of the unit closest to ``x`` over the restricted components.

    Ties go to the smallest unit index.
    """
    x = np.asarray(x, dtype=float)
    if restrict is None:
        restrict = ComponentRange.full(cb.dim)
    if x.ndim != 1 or x.shape[0] < restrict.stop or restrict.stop > cb.dim:
        raise ShapeError(f"vector of length {x.shape} does not cover components {restrict}")
    return int(np.argmin(_sq_distances(cb.vectors, x, restrict.slice)))


def _move(vectors, units, target, eps, sl):
    # target is already restricted to the components in sl; the convex form
    # makes eps = 1 an exact copy and eps = 0 an exact no-op
    vectors[units, sl] = (1.0 - eps) * vectors[units, sl] + eps * target


def update_step(cb: Codebook, x, u_star: int, t: int, sched: Schedule,
                restrict_update: ComponentRange | None = None):
    """Move ``u_star`` and its radius-``r(t)`` neighbours toward ``x`` in place."""
    if not 0 <= t < sched.total_steps:
        raise ValueError(f"step {t} outside [0, {sched.total_steps})")
    if restrict_update is None:
        restrict_update = ComponentRange.full(cb.dim)
    sl = restrict_update.slice
    units = neighbor_array(cb.spec, u_star, sched.radius(t))
    _move(cb.vectors, units, np.asarray(x, dtype=float)[sl], sched.epsilon(t), sl)


def _check_matrix(data, name="data"):
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise DataError(f"{name} contains missing or non-finite values")
    return data


def train_quantitative(data, spec: GridSpec, sched: Schedule | None = None, seed=0) -> Codebook:
    """Classic stochastic SOM.

    The codebook starts uniform within the per-column range of ``data``; each
    of the ``T`` steps draws one row uniformly at random.
    """
    data = _check_matrix(data)
    if sched is None:
        sched = default_schedule(spec, data.shape[0])
    rng = np.random.default_rng(seed)
    cb = init_codebook(spec, data.shape[1], data.min(axis=0), data.max(axis=0), rng=rng)
    draws = rng.integers(0, data.shape[0], size=sched.total_steps)
    eps = sched.epsilons()
    radii = sched.radii()
    vectors = cb.vectors
    full = slice(None)
    for t in range(sched.total_steps):
        x = data[draws[t]]
        u = int(np.argmin(_sq_distances(vectors, x, full)))
        _move(vectors, neighbor_array(spec, u, radii[t]), x, eps[t], full)
    cb.check_finite()
    return cb


def classify(cb: Codebook, data, restrict: ComponentRange | None = None) -> np.ndarray:
    """Winning unit for every row of ``data``."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("classify needs a non-empty 2-D array")
    if restrict is None:
        restrict = ComponentRange.full(cb.dim)
    if data.shape[1] < restrict.stop or restrict.stop > cb.dim:
        raise ShapeError(f"rows of length {data.shape[1]} do not cover components {restrict}")
    sl = restrict.slice
    vectors = cb.vectors
    return np.array([np.argmin(_sq_distances(vectors, x, sl)) for x in data], dtype=int)


def quantization_error(cb: Codebook, data, restrict: ComponentRange | None = None) -> float:
    """Mean squared distance of the rows of ``data`` to their winning code vectors."""
    data = np.asarray(data, dtype=float)
    if restrict is None:
        restrict = ComponentRange.full(cb.dim)
    sl = restrict.slice
    units = classify(cb, data, restrict)
    diff = data[:, sl] - cb.vectors[units, sl]
    return float((diff ** 2).sum(axis=1).mean())


def save_codebook(cb: Codebook, path, header_lines=()):
    """Write the codebook as text: ``rows cols topology dim`` then one unit per line.

    Values are printed with 17 significant digits so that rereading
    reproduces them exactly.  ``header_lines`` are written first, each
    prefixed with ``#``.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"{cb.spec.rows} {cb.spec.cols} {cb.spec.topology} {cb.dim}\n")
        for row in cb.vectors:
            fh.write(" ".join(format(float(v), ".17g") for v in row))
            fh.write("\n")


def load_codebook(path) -> Codebook:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise DataError(f"{path}: empty codebook file")
    try:
        rows, cols, topology, dim = lines[0].split()
        spec = GridSpec(int(rows), int(cols), topology)
        vectors = np.array([[float(v) for v in ln.split()] for ln in lines[1:]], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: malformed codebook ({exc})") from exc
    if vectors.shape != (spec.n_units, int(dim)):
        raise DataError(f"{path}: expected {spec.n_units}x{dim} values, got {vectors.shape}")
    return Codebook(spec, vectors)
