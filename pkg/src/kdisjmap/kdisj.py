"""Joint Kohonen map of individuals and modalities (KDISJ).

Each unit holds a code vector of ``M + N`` components: the first ``M`` live
in the space of individuals (rows of the adjusted table) and the last ``N``
in the space of modalities (its columns).  Training alternates two kinds of
step:

* an individual ``i`` is drawn and extended with the column of its rarest
  modality ``j(i)``; the winner is searched on the first ``M`` components
  and the whole code vector of the winner and its neighbours moves toward
  the extended vector;
* a modality ``j`` is drawn; the winner is searched on the last ``N``
  components and only those components move toward column ``j``.

After training, individuals are classified on the first ``M`` components and
modalities on the last ``N``, so both land on the same map.
"""

from dataclasses import dataclass, field

import numpy as np

from .disjunctive import AdjustedTable, rarest_modalities, rarest_modality
from .errors import ShapeError
from .grid import GridSpec, neighbor_array
from .som import Codebook, ComponentRange, Schedule, _move, _sq_distances, classify, \
    default_radius0, init_codebook


@dataclass
class KdisjModel:
    """A trained (or in-training) joint codebook.

    ``n_modalities`` is M and ``n_rows`` is N; ``codebook.dim`` is always
    ``M + N``.  ``meta`` records how the model was produced.
    """

    codebook: Codebook
    n_rows: int
    n_modalities: int
    modality_names: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.codebook.dim != self.n_rows + self.n_modalities:
            raise ShapeError(
                f"code vectors have {self.codebook.dim} components, "
                f"expected M + N = {self.n_modalities} + {self.n_rows}"
            )

    @property
    def spec(self) -> GridSpec:
        return self.codebook.spec

    @property
    def individual_part(self) -> ComponentRange:
        return ComponentRange(0, self.n_modalities)

    @property
    def modality_part(self) -> ComponentRange:
        return ComponentRange(self.n_modalities, self.n_rows)


def default_schedule(spec: GridSpec, adjusted: AdjustedTable, **kwargs) -> Schedule:
    """``T = 20 * (N + M)`` iteration pairs."""
    kwargs.setdefault("radius0", default_radius0(spec))
    return Schedule(total_steps=20 * (adjusted.n_rows + adjusted.n_modalities), **kwargs)


def _check_table(model, adjusted):
    if adjusted.values.shape != (model.n_rows, model.n_modalities):
        raise ShapeError(
            f"adjusted table is {adjusted.values.shape}, model expects "
            f"({model.n_rows}, {model.n_modalities})"
        )


def extended_vector(adjusted: AdjustedTable, i: int) -> np.ndarray:
    """Row ``i`` of the adjusted table followed by the column of ``j(i)``."""
    j = rarest_modality(adjusted, i)
    return np.concatenate([adjusted.values[i], adjusted.values[:, j]])


def _extended_matrix(adjusted):
    jj = rarest_modalities(adjusted)
    return np.hstack([adjusted.values, adjusted.values.T[jj]])


def step_individual(model: KdisjModel, adjusted: AdjustedTable, i: int, t: int, sched: Schedule) -> int:
    """One individual step; returns the winning unit."""
    _check_table(model, adjusted)
    if not 0 <= t < sched.total_steps:
        raise ValueError(f"step {t} outside [0, {sched.total_steps})")
    x = extended_vector(adjusted, i)
    return _individual_step(model.codebook.vectors, model.spec, x, model.n_modalities,
                            sched.epsilon(t), sched.radius(t))


def step_modality(model: KdisjModel, adjusted: AdjustedTable, j: int, t: int, sched: Schedule) -> int:
    """One modality step; returns the winning unit.  The first M components are not touched."""
    _check_table(model, adjusted)
    if not 0 <= t < sched.total_steps:
        raise ValueError(f"step {t} outside [0, {sched.total_steps})")
    y = np.ascontiguousarray(adjusted.values[:, j])
    return _modality_step(model.codebook.vectors, model.spec, y, model.n_modalities,
                          sched.epsilon(t), sched.radius(t))


def _individual_step(vectors, spec, x, M, eps, radius):
    u = int(np.argmin(_sq_distances(vectors, x, slice(0, M))))
    _move(vectors, neighbor_array(spec, u, radius), x, eps, slice(None))
    return u


def _modality_step(vectors, spec, y, M, eps, radius):
    tail = slice(M, None)
    diff = vectors[:, tail] - y
    u = int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
    _move(vectors, neighbor_array(spec, u, radius), y, eps, tail)
    return u


def train(adjusted: AdjustedTable, spec: GridSpec, sched: Schedule | None = None, seed=0) -> KdisjModel:
    """Train a joint map on an adjusted disjunctive table.

    The codebook starts uniform in ``[0, max(D^c)]``.  Each of the ``T``
    iterations is one individual step (row drawn uniformly) followed by one
    modality step (column drawn uniformly), both at the same learning rate
    and radius.  The result depends only on the inputs and ``seed``.
    """
    N, M = adjusted.values.shape
    if N < 1 or M < 1:
        raise ShapeError(f"adjusted table must be non-empty, got {adjusted.values.shape}")
    if sched is None:
        sched = default_schedule(spec, adjusted)
    rng = np.random.default_rng(seed)
    top = float(adjusted.values.max())
    cb = init_codebook(spec, M + N, 0.0, top, rng=rng)
    rows = rng.integers(0, N, size=sched.total_steps)
    cols = rng.integers(0, M, size=sched.total_steps)

    ext = _extended_matrix(adjusted)
    col_vectors = np.ascontiguousarray(adjusted.values.T)
    eps = sched.epsilons()
    radii = sched.radii()
    vectors = cb.vectors
    for t in range(sched.total_steps):
        _individual_step(vectors, spec, ext[rows[t]], M, eps[t], radii[t])
        _modality_step(vectors, spec, col_vectors[cols[t]], M, eps[t], radii[t])
    cb.check_finite()

    meta = {
        "seed": seed,
        "steps": sched.total_steps,
        "eps0": sched.eps0,
        "eps_min": sched.eps_min,
        "radius0": sched.radius0,
    }
    return KdisjModel(cb, N, M, list(adjusted.names), meta)


def classify_individuals(model: KdisjModel, adjusted: AdjustedTable) -> np.ndarray:
    """Unit of every individual, matched on the first M components."""
    _check_table(model, adjusted)
    return classify(model.codebook, adjusted.values, model.individual_part)


def classify_modalities(model: KdisjModel, adjusted: AdjustedTable) -> np.ndarray:
    """Unit of every modality, matched on the last N components."""
    _check_table(model, adjusted)
    M = model.n_modalities
    padded = np.hstack([np.zeros((M, M)), adjusted.values.T])
    return classify(model.codebook, padded, model.modality_part)
