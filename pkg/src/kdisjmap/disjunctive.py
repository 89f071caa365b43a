"""Complete disjunctive coding of categorical records.

Each of the K qualitative variables contributes one block of columns, one
column per modality, and every individual marks exactly one column in each
block.  The adjusted table divides every entry by ``sqrt(K * d_.j)`` where
``d_.j`` is the number of individuals holding modality ``j``; Euclidean
distances on the adjusted rows and columns are then chi-square distances.

Row sums are written ``d_i.`` (always K) and column sums ``d_.j``.
"""

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, EmptyModalityError, IncompleteRecordError, SchemaViolationError

MISSING = (None, "", "NA", "NaN", "nan")


@dataclass(frozen=True)
class CategoricalVariable:
    name: str
    modalities: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "modalities", tuple(self.modalities))
        if not self.modalities:
            raise ConfigError(f"variable {self.name!r} declares no modalities")
        if len(set(self.modalities)) != len(self.modalities):
            raise ConfigError(f"variable {self.name!r} has duplicate modality labels")


@dataclass(frozen=True)
class CategoricalSchema:
    """K qualitative variables, plus the names of Q quantitative ones.

    The global modality index concatenates the variables in declared order.
    """

    variables: tuple[CategoricalVariable, ...]
    quantitative: tuple[str, ...] = ()
    id_column: str | None = None
    _offsets: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "quantitative", tuple(self.quantitative))
        if not self.variables:
            raise ConfigError("schema declares no categorical variables")
        names = [v.name for v in self.variables] + list(self.quantitative)
        if self.id_column is not None:
            names.append(self.id_column)
        if len(set(names)) != len(names):
            raise ConfigError("schema variable names must be unique")
        offsets = np.cumsum([0] + [len(v.modalities) for v in self.variables])
        object.__setattr__(self, "_offsets", tuple(int(o) for o in offsets))

    @classmethod
    def from_dict(cls, variables: Mapping[str, Sequence[str]], quantitative=(), id_column=None):
        return cls(tuple(CategoricalVariable(k, tuple(v)) for k, v in variables.items()),
                   tuple(quantitative), id_column)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_modalities(self) -> int:
        return self._offsets[-1]

    def block(self, k: int) -> slice:
        """Global column range of variable ``k``."""
        return slice(self._offsets[k], self._offsets[k + 1])

    def blocks(self) -> list[slice]:
        return [self.block(k) for k in range(self.n_variables)]

    def variable_of(self, j: int) -> int:
        return int(np.searchsorted(self._offsets, j, side="right") - 1)

    def variable_index(self, name: str) -> int:
        for k, v in enumerate(self.variables):
            if v.name == name:
                return k
        raise KeyError(name)

    def modality_labels(self) -> list[str]:
        return [m for v in self.variables for m in v.modalities]

    def modality_names(self) -> list[str]:
        """Global names of the form ``variable.modality``."""
        return [f"{v.name}.{m}" for v in self.variables for m in v.modalities]


@dataclass
class DisjunctiveTable:
    values: np.ndarray = field(repr=False)
    schema: CategoricalSchema

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_modalities(self) -> int:
        return self.values.shape[1]


@dataclass
class AdjustedTable:
    """The chi-square adjusted table and the bookkeeping needed to use it.

    ``columns`` maps each retained column back to its global modality index
    in the schema; it differs from ``range(M)`` only when empty modalities
    were dropped.
    """

    values: np.ndarray = field(repr=False)
    column_counts: np.ndarray
    n_variables: int
    columns: np.ndarray
    names: list[str]
    dropped: list[str] = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_modalities(self) -> int:
        return self.values.shape[1]


def _record_values(record, schema):
    if isinstance(record, Mapping):
        return [record.get(v.name) for v in schema.variables]
    return list(record)


def encode(records, schema: CategoricalSchema) -> DisjunctiveTable:
    """One-hot encode ``records`` against ``schema``.

    A record is either a mapping from variable name to label or a sequence
    of labels in schema order.
    """
    lookups = [{m: i for i, m in enumerate(v.modalities)} for v in schema.variables]
    starts = [schema.block(k).start for k in range(schema.n_variables)]
    records = list(records)
    out = np.zeros((len(records), schema.n_modalities), dtype=np.int8)
    for i, record in enumerate(records):
        labels = _record_values(record, schema)
        if len(labels) < schema.n_variables:
            raise IncompleteRecordError(i, schema.variables[len(labels)].name)
        if len(labels) > schema.n_variables:
            raise SchemaViolationError(i, "<extra field>", labels[schema.n_variables])
        for k, label in enumerate(labels):
            var = schema.variables[k]
            if label in MISSING:
                raise IncompleteRecordError(i, var.name)
            pos = lookups[k].get(str(label))
            if pos is None:
                raise SchemaViolationError(i, var.name, label)
            out[i, starts[k] + pos] = 1
    return DisjunctiveTable(out, schema)


def decode(table: DisjunctiveTable) -> list[tuple[str, ...]]:
    """Recover the records from a disjunctive table (argmax per block)."""
    schema = table.schema
    picks = [np.argmax(table.values[:, schema.block(k)], axis=1) for k in range(schema.n_variables)]
    return [tuple(schema.variables[k].modalities[picks[k][i]] for k in range(schema.n_variables))
            for i in range(table.n_rows)]


def column_counts(table: DisjunctiveTable) -> np.ndarray:
    """``d_.j``: how many individuals hold each modality."""
    return np.asarray(table.values, dtype=np.int64).sum(axis=0)


def adjust(table: DisjunctiveTable, empty_policy: str = "error") -> AdjustedTable:
    """Divide each entry by ``sqrt(K * d_.j)``.

    Parameters
    ----------
    table : DisjunctiveTable
    empty_policy : {"error", "drop"}
        What to do with a modality no individual holds.  ``"drop"`` removes
        the column and lists it in ``AdjustedTable.dropped``.
    """
    if empty_policy not in ("error", "drop"):
        raise ConfigError(f"unknown empty-modality policy {empty_policy!r}")
    K = table.schema.n_variables
    counts = column_counts(table)
    names = table.schema.modality_names()
    empty = np.flatnonzero(counts == 0)
    if len(empty) and empty_policy == "error":
        raise EmptyModalityError(names[empty[0]])
    keep = np.flatnonzero(counts > 0)
    d = np.asarray(table.values, dtype=float)[:, keep]
    kept_counts = counts[keep]
    values = d / np.sqrt(K * kept_counts.astype(float))
    return AdjustedTable(values=values, column_counts=kept_counts, n_variables=K,
                         columns=keep, names=[names[j] for j in keep],
                         dropped=[names[j] for j in empty])


def rarest_modalities(adjusted: AdjustedTable) -> np.ndarray:
    """``j(i)`` for every row: the held modality with the fewest holders.

    Ties go to the smallest column index.  Indices refer to the columns of
    ``adjusted``.
    """
    held = adjusted.values > 0
    counts = np.where(held, adjusted.column_counts[None, :], np.iinfo(np.int64).max)
    return np.argmin(counts, axis=1)


def rarest_modality(adjusted: AdjustedTable, i: int) -> int:
    row = adjusted.values[i]
    held = np.flatnonzero(row > 0)
    if len(held) == 0:
        raise ValueError(f"row {i} holds no retained modality")
    return int(held[np.argmin(adjusted.column_counts[held])])
