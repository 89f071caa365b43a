"""Reading and writing datasets, schemas, run configurations and reports.

Data files are comma-delimited with a header row.  A schema file lists one
variable per line::

    # name   role          modalities
    ID       id
    CONTRACT categorical   OEC,FTC
    DMIN     quantitative

A run configuration is ``key = value`` lines; unknown keys are rejected.
"""

import csv
import hashlib
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .disjunctive import MISSING, CategoricalSchema, CategoricalVariable
from .errors import ConfigError, DataError, IncompleteRecordError, SchemaViolationError
from .grid import GridSpec

log = logging.getLogger(__name__)

ROLES = ("id", "categorical", "quantitative")


@dataclass
class Dataset:
    """Clean records: ids, one label per categorical variable, Q reals."""

    ids: list[str]
    records: list[tuple[str, ...]]
    quant: np.ndarray
    schema: CategoricalSchema
    dropped: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self):
        self.quant = np.asarray(self.quant, dtype=float).reshape(len(self.records), len(self.schema.quantitative))
        if not self.records:
            raise DataError("dataset has no usable records")

    @property
    def n_rows(self) -> int:
        return len(self.records)

    def column(self, name: str) -> list[str]:
        k = self.schema.variable_index(name)
        return [r[k] for r in self.records]


def load_schema(path) -> CategoricalSchema:
    variables, quantitative, id_column = [], [], None
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read schema {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 2 or parts[1] not in ROLES:
            raise ConfigError(f"{path}:{lineno}: expected 'name role [modalities]'")
        name, role = parts[0], parts[1]
        if role == "categorical":
            if len(parts) != 3:
                raise ConfigError(f"{path}:{lineno}: categorical variable needs a comma-separated modality list")
            variables.append(CategoricalVariable(name, tuple(m.strip() for m in parts[2].split(","))))
        elif len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: {role} variable takes no modality list")
        elif role == "quantitative":
            quantitative.append(name)
        else:
            if id_column is not None:
                raise ConfigError(f"{path}:{lineno}: more than one id column")
            id_column = name
    return CategoricalSchema(tuple(variables), tuple(quantitative), id_column)


def write_schema(schema: CategoricalSchema, path, provenance_line=None):
    width = max(len(n) for n in [v.name for v in schema.variables] + list(schema.quantitative)
                + ([schema.id_column] if schema.id_column else []))
    lines = [f"# {provenance_line}"] if provenance_line else []
    if schema.id_column:
        lines.append(f"{schema.id_column:<{width}} id")
    for v in schema.variables:
        lines.append(f"{v.name:<{width}} categorical {','.join(v.modalities)}")
    for q in schema.quantitative:
        lines.append(f"{q:<{width}} quantitative")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load(data_path, schema_path, policy: str = "error") -> Dataset:
    """Read a delimited data file and validate every row against the schema.

    Parameters
    ----------
    policy : {"error", "drop"}
        ``error`` aborts on the first bad row (missing value, unknown
        modality, non-numeric quantity); ``drop`` skips bad rows and records
        them in ``Dataset.dropped`` as ``(line number, reason)``.
    """
    if policy not in ("error", "drop"):
        raise ConfigError(f"unknown incomplete-record policy {policy!r}")
    schema = schema_path if isinstance(schema_path, CategoricalSchema) else load_schema(schema_path)
    try:
        with open(data_path, newline="", encoding="utf-8") as fh:
            numbered = [(n, ln) for n, ln in enumerate(fh.read().splitlines(), 1)
                        if not ln.startswith("#")]
    except OSError as exc:
        raise DataError(f"cannot read data {data_path}: {exc}") from exc
    parsed = list(csv.reader(ln for _, ln in numbered))
    if not parsed or not parsed[0]:
        raise DataError(f"{data_path}: missing header row")
    header = [h.strip() for h in parsed[0]]
    needed = [v.name for v in schema.variables] + list(schema.quantitative)
    if schema.id_column:
        needed.append(schema.id_column)
    missing = [n for n in needed if n not in header]
    if missing or len(set(header)) != len(header):
        raise DataError(f"{data_path}: malformed header; missing columns {missing}")
    cat_pos = [header.index(v.name) for v in schema.variables]
    q_pos = [header.index(q) for q in schema.quantitative]
    id_pos = header.index(schema.id_column) if schema.id_column else None
    lookups = [set(v.modalities) for v in schema.variables]

    ids, records, quant, dropped = [], [], [], []
    for (lineno, _), row in zip(numbered[1:], parsed[1:]):
        if not row:
            continue
        try:
            rec, q = _parse_row(row, len(header), cat_pos, q_pos, lookups, schema, lineno)
        except DataError as exc:
            if policy == "error":
                raise
            dropped.append((lineno, str(exc)))
            continue
        ids.append(row[id_pos].strip() if id_pos is not None else str(len(ids) + 1))
        records.append(rec)
        quant.append(q)
    if dropped:
        log.info("dropped %d invalid rows from %s", len(dropped), data_path)
    return Dataset(ids, records, np.array(quant, dtype=float), schema, dropped)


def _parse_row(row, width, cat_pos, q_pos, lookups, schema, lineno):
    if len(row) != width:
        raise DataError(f"line {lineno}: expected {width} fields, got {len(row)}")
    rec = []
    for k, pos in enumerate(cat_pos):
        label = row[pos].strip()
        name = schema.variables[k].name
        if label in MISSING:
            raise IncompleteRecordError(lineno, name)
        if label not in lookups[k]:
            raise SchemaViolationError(lineno, name, label)
        rec.append(label)
    q = []
    for c, pos in enumerate(q_pos):
        text = row[pos].strip()
        if text in MISSING:
            raise IncompleteRecordError(lineno, schema.quantitative[c])
        try:
            value = float(text)
        except ValueError:
            raise DataError(f"line {lineno}: non-numeric value {text!r} for {schema.quantitative[c]!r}") from None
        if not math.isfinite(value):
            raise DataError(f"line {lineno}: non-finite value for {schema.quantitative[c]!r}")
        q.append(value)
    return tuple(rec), q


def write_data(dataset: Dataset, path, provenance_line=None):
    schema = dataset.schema
    id_name = schema.id_column or "ID"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if provenance_line:
            fh.write(f"# {provenance_line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([id_name] + [v.name for v in schema.variables] + list(schema.quantitative))
        for rid, rec, q in zip(dataset.ids, dataset.records, dataset.quant):
            w.writerow([rid, *rec, *(format(float(x), ".10g") for x in q)])


@dataclass(frozen=True)
class RunConfig:
    """Every setting of a pipeline run.

    ``steps = 0`` means the default ``20 * (N + M)`` iteration pairs and
    ``radius0 = -1`` means half the larger grid side.
    """

    rows: int = 7
    cols: int = 7
    topology: str = "rectangle"
    steps: int = 0
    eps0: float = 0.5
    eps_min: float = 0.01
    radius0: int = -1
    seed: int | None = None
    superclasses: int = 10
    linkage: str = "ward"
    cluster_on: str = "individual"
    empty_policy: str = "error"
    incomplete_policy: str = "error"
    split_variable: str = ""

    def __post_init__(self):
        from .superclass import LINKAGES

        self.grid  # validates rows, cols, topology
        if self.steps < 0:
            raise ConfigError("steps must be >= 0")
        if not (self.eps0 >= self.eps_min > 0) or self.eps0 > 1:
            raise ConfigError("need 1 >= eps0 >= eps_min > 0")
        if self.radius0 < -1:
            raise ConfigError("radius0 must be >= 0 (or -1 for the default)")
        if not 1 <= self.superclasses <= self.rows * self.cols:
            raise ConfigError("superclasses must be between 1 and rows * cols")
        if self.linkage not in LINKAGES:
            raise ConfigError(f"linkage must be one of {LINKAGES}")
        if self.cluster_on not in ("full", "individual"):
            raise ConfigError("cluster_on must be 'full' or 'individual'")
        for key in ("empty_policy", "incomplete_policy"):
            if getattr(self, key) not in ("error", "drop"):
                raise ConfigError(f"{key} must be 'error' or 'drop'")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.rows, self.cols, self.topology)

    def replace(self, **changes):
        values = asdict(self)
        values.update(changes)
        return RunConfig(**values)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {'' if getattr(self, f.name) is None else getattr(self, f.name)}\n"
                       for f in fields(self))

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _coerce(field_type, key, text):
    text = text.strip()
    try:
        if field_type in (int, "int"):
            return int(text)
        if field_type in (float, "float"):
            return float(text)
        if "None" in str(field_type):
            return None if text == "" else int(text)
    except ValueError:
        raise ConfigError(f"bad value {text!r} for {key}") from None
    return text


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    types = {f.name: f.type for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        values[key] = coerce_value(key, value)
    return (base or RunConfig()).replace(**values)


def coerce_value(key, value):
    types = {f.name: f.type for f in fields(RunConfig)}
    if key not in types:
        raise ConfigError(f"unknown config key {key!r}")
    return _coerce(types[key], key, value)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def provenance(config_hash: str, seed, stage: str) -> str:
    return f"kdisjmap config={config_hash} seed={seed} stage={stage}"


def write_tsv(path, header, rows, provenance_line=None, fmt=".6f"):
    """Tab-separated table; floats printed with ``fmt``, NaN as ``NA``."""

    def cell(v):
        if isinstance(v, (float, np.floating)):
            if np.isnan(v):
                return "NA"
            if np.isinf(v):
                return "inf" if v > 0 else "-inf"
            return format(float(v), fmt)
        return str(v)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if provenance_line:
            fh.write(f"# {provenance_line}\n")
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(cell(v) for v in row) + "\n")


def read_tsv(path):
    """Header and rows of a file written by :func:`write_tsv` (all strings)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    if not lines:
        raise DataError(f"{path}: empty table")
    return lines[0].split("\t"), [ln.split("\t") for ln in lines[1:]]


def write_matrix(path, names, values, provenance_line=None, fmt=".17g"):
    """Delimited matrix with a header row of column names."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if provenance_line:
            fh.write(f"# {provenance_line}\n")
        fh.write(",".join(names) + "\n")
        for row in np.asarray(values):
            fh.write(",".join(format(v, fmt) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row.tolist()) + "\n")


def read_matrix(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    names = lines[0].split(",")
    values = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float)
    return names, values.reshape(len(lines) - 1, len(names))
