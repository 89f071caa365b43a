"""End-to-end runs: encode, train, classify, regroup, describe, render.

Every stage can be run on its own against a run directory, which is how the
command line uses this module; :func:`run_pipeline` chains them.  All
artifacts start with a provenance line holding the config hash, the seed and
the stage that wrote them.
"""

import hashlib
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataio, kdisj, render, superclass
from .disjunctive import AdjustedTable, DisjunctiveTable, adjust, encode
from .errors import ConfigError, DataError, KdisjError, NumericError
from .kdisj import KdisjModel
from .som import Codebook, Schedule, classify, default_radius0, load_codebook, save_codebook, train_quantitative

log = logging.getLogger(__name__)


@contextmanager
def stage(name):
    """Tag errors raised inside the block with the stage name."""
    try:
        yield
    except KdisjError as exc:
        exc.stage = getattr(exc, "stage", name)
        raise
    except (ArithmeticError, FloatingPointError) as exc:
        err = NumericError(f"{name}: {exc}")
        err.stage = name
        raise err from exc


def schema_hash(schema) -> str:
    text = "|".join(schema.modality_names() + list(schema.quantitative))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def make_schedule(config: dataio.RunConfig, n_items: int) -> Schedule:
    radius0 = default_radius0(config.grid) if config.radius0 < 0 else config.radius0
    steps = config.steps or 20 * n_items
    return Schedule(steps, config.eps0, config.eps_min, radius0)


def _require_seed(config):
    if config.seed is None:
        raise ConfigError("a seed is required for training")
    return config.seed


@dataclass
class Artifacts:
    config: dataio.RunConfig
    dataset: dataio.Dataset
    table: DisjunctiveTable
    adjusted: AdjustedTable
    model: KdisjModel
    individual_units: np.ndarray
    modality_units: np.ndarray
    dendrogram: superclass.Dendrogram
    superclasses: superclass.SuperClassification
    contiguity: superclass.ContiguityReport
    labels: np.ndarray
    profile: superclass.ClassProfile
    positive_rate: float
    map_text: str
    superclass_map_text: str
    svg: str


def encode_stage(dataset, config):
    with stage("encode"):
        table = encode(dataset.records, dataset.schema)
        adjusted = adjust(table, config.empty_policy)
    return table, adjusted


def train_stage(adjusted, config):
    seed = _require_seed(config)
    with stage("train"):
        sched = make_schedule(config, adjusted.n_rows + adjusted.n_modalities)
        model = kdisj.train(adjusted, config.grid, sched, seed)
        iu = kdisj.classify_individuals(model, adjusted)
        mu = kdisj.classify_modalities(model, adjusted)
    return model, iu, mu


def superclass_stage(model, config):
    with stage("superclass"):
        restrict = model.individual_part if config.cluster_on == "individual" else None
        dendro = superclass.hierarchical_cluster(model.codebook, config.linkage, restrict)
        sc = superclass.cut(dendro, config.superclasses)
        contiguity = superclass.contiguity_report(sc, model.spec)
    return dendro, sc, contiguity


def profile_stage(dataset, table, labels, n_classes):
    with stage("profile"):
        return superclass.profile(table, labels, n_classes, dataset.quant)


def _split(dataset, config):
    if not config.split_variable:
        return None, None
    try:
        k = dataset.schema.variable_index(config.split_variable)
    except KeyError:
        raise ConfigError(f"split variable {config.split_variable!r} is not in the schema") from None
    return dataset.column(config.split_variable), dataset.schema.variables[k].modalities


def render_stage(dataset, config, spec, individual_units, modality_units, modality_labels, sc_labels):
    with stage("render"):
        split, levels = _split(dataset, config)
        cells = render.cell_contents(spec, individual_units, modality_units, modality_labels, split, levels)
        sc_cells = render.cell_contents(spec, individual_units, modality_units, modality_labels,
                                        split, levels, sc_labels)
        return (render.render_text(spec, cells), render.render_text(spec, sc_cells),
                render.render_svg(spec, sc_cells, sc_labels,
                                  comment=dataio.provenance(config.digest(), config.seed, "render")))


def _short_labels(adjusted):
    return [name.split(".", 1)[1] for name in adjusted.names]


def run_pipeline(config: dataio.RunConfig, dataset: dataio.Dataset, out_dir=None) -> Artifacts:
    """Run every stage; when ``out_dir`` is given, write all artifacts there.

    Artifacts are first written to a scratch directory and moved into
    ``out_dir`` only when every stage succeeded.
    """
    table, adjusted = encode_stage(dataset, config)
    model, iu, mu = train_stage(adjusted, config)
    dendro, sc, contiguity = superclass_stage(model, config)
    labels = sc.labels[iu]
    prof = profile_stage(dataset, table, labels, sc.n_classes)
    with stage("profile"):
        rate = superclass._positive_rate(mu, adjusted.columns, sc, table, labels)
    map_text, sc_map, svg = render_stage(dataset, config, model.spec, iu, mu, _short_labels(adjusted), sc.labels)
    art = Artifacts(config, dataset, table, adjusted, model, iu, mu, dendro, sc, contiguity,
                    labels, prof, rate, map_text, sc_map, svg)
    if out_dir is not None:
        with staging(out_dir) as tmp:
            write_all(art, tmp)
    return art


@contextmanager
def staging(out_dir):
    """Scratch directory whose files replace those in ``out_dir`` on success."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".partial-", dir=out))
    try:
        yield tmp
        for f in sorted(tmp.iterdir()):
            os.replace(f, out / f.name)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


# ---------------------------------------------------------------- writers

def _prov(config, stage_name):
    return dataio.provenance(config.digest(), config.seed, stage_name)


def write_config(config, out):
    Path(out, "config.txt").write_text(f"# {_prov(config, 'config')}\n{config.to_text()}", encoding="utf-8")


def write_encode(dataset, table, adjusted, config, out):
    prov = _prov(config, "encode")
    dataio.write_matrix(Path(out, "disjunctive.csv"), table.schema.modality_names(),
                        np.asarray(table.values, dtype=int), prov)
    dataio.write_matrix(Path(out, "adjusted.csv"), adjusted.names, adjusted.values, prov)
    rows = [(line, reason) for line, reason in dataset.dropped]
    rows += [("-", f"empty modality dropped: {name}") for name in adjusted.dropped]
    dataio.write_tsv(Path(out, "dropped.tsv"), ["line", "reason"], rows, prov)


def write_model(model, dataset, config, out):
    prov = _prov(config, "train")
    save_codebook(model.codebook, Path(out, "codebook.txt"), [prov])
    meta = {
        "mode": "kdisj",
        "n_rows": model.n_rows,
        "n_modalities": model.n_modalities,
        "schema_hash": schema_hash(dataset.schema),
        **model.meta,
        "modalities": ",".join(model.modality_names),
    }
    text = "".join(f"{k} = {v}\n" for k, v in meta.items())
    Path(out, "model.txt").write_text(f"# {prov}\n{text}", encoding="utf-8")


def read_model_meta(path) -> dict:
    meta = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#") or "=" not in line:
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        meta[key] = value
    return meta


def load_model(run_dir) -> KdisjModel:
    """Reread a model written by :func:`write_model`."""
    run_dir = Path(run_dir)
    try:
        cb = load_codebook(run_dir / "codebook.txt")
        meta = read_model_meta(run_dir / "model.txt")
    except OSError as exc:
        raise DataError(f"cannot read model from {run_dir}: {exc}") from exc
    if meta.get("mode", "kdisj") != "kdisj":
        raise DataError(f"{run_dir} holds a {meta.get('mode')} codebook, not a joint model")
    names = meta.get("modalities", "").split(",") if meta.get("modalities") else []
    info = {k: meta[k] for k in ("seed", "steps", "eps0", "eps_min", "radius0", "schema_hash") if k in meta}
    return KdisjModel(cb, int(meta["n_rows"]), int(meta["n_modalities"]), names, info)


def write_assignments(dataset, adjusted, model, iu, mu, config, out, sc_labels=None):
    prov = _prov(config, "train" if sc_labels is None else "superclass")
    spec = model.spec

    def tail(u):
        r, c = spec.coords(u)
        extra = [] if sc_labels is None else [int(sc_labels[u]) + 1]
        return [int(u), r, c, *extra]

    extra = [] if sc_labels is None else ["superclass"]
    dataio.write_tsv(Path(out, "individual_units.tsv"), ["id", "unit", "row", "col", *extra],
                     [[rid, *tail(u)] for rid, u in zip(dataset.ids, iu)], prov)
    dataio.write_tsv(Path(out, "modality_units.tsv"), ["modality", "unit", "row", "col", *extra],
                     [[name, *tail(u)] for name, u in zip(adjusted.names, mu)], prov)


def read_units(path) -> np.ndarray:
    header, rows = dataio.read_tsv(path)
    col = header.index("unit")
    return np.array([int(r[col]) for r in rows], dtype=int)


def write_superclasses(dendro, sc, contiguity, model, config, out):
    prov = _prov(config, "superclass")
    U = dendro.n_leaves
    lines = [f"# {prov}", f"# linkage={dendro.linkage} leaves={U}", "step\tleft\tright\theight\tsize"]
    for s, (a, b, h, n) in enumerate(dendro.merges):
        lines.append(f"{s}\t{int(a)}\t{int(b)}\t{h:.10g}\t{int(n)}")
    lines.append("# height gap undone by cutting into S classes")
    lines.append("S\tgap")
    lines += [f"{S}\t{g:.10g}" for S, g in superclass.height_gaps(dendro)]
    Path(out, "dendrogram.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    spec = model.spec
    dataio.write_tsv(Path(out, "superclasses.tsv"), ["unit", "row", "col", "superclass"],
                     [[u, *spec.coords(u), int(sc.labels[u]) + 1] for u in range(spec.n_units)], prov)
    dataio.write_tsv(Path(out, "contiguity.tsv"), ["superclass", "units", "contiguous"],
                     [[k + 1, len(sc.members(k)), "yes" if ok else "no"]
                      for k, ok in enumerate(contiguity.contiguous)], prov)


def read_superclasses(path) -> superclass.SuperClassification:
    header, rows = dataio.read_tsv(path)
    labels = np.array([int(r[header.index("superclass")]) - 1 for r in rows], dtype=int)
    return superclass.SuperClassification(labels, int(labels.max()) + 1)


def write_profile(dataset, table, prof, config, out, positive_rate=None):
    prov = _prov(config, "profile")
    S = len(prof.sizes)
    classes = [str(k + 1) for k in range(S)]
    names = table.schema.modality_names()
    dataio.write_tsv(Path(out, "sizes.tsv"), ["superclass", "size"],
                     [[k + 1, int(n)] for k, n in enumerate(prof.sizes)], prov)
    pct = prof.modality_pct
    dataio.write_tsv(Path(out, "modality_pct.tsv"), ["modality", *classes, "Tot"],
                     [[name, *pct.values[:, j], pct.total[j]] for j, name in enumerate(names)], prov)
    dataio.write_tsv(Path(out, "deviations.tsv"), ["modality", *classes],
                     [[name, *prof.deviations[j]] for j, name in enumerate(names)], prov)
    qnames = list(dataset.schema.quantitative)
    if prof.means is not None:
        dataio.write_tsv(Path(out, "means.tsv"), ["variable", *classes, "Total"],
                         [[q, *prof.means.values[:, c], prof.means.total[c]] for c, q in enumerate(qnames)], prov)
    else:
        dataio.write_tsv(Path(out, "means.tsv"), ["variable", *classes, "Total"], [], prov)
    dataio.write_tsv(Path(out, "fstats.tsv"), ["variable", "F", "df_between", "df_within"],
                     [[q, f.F, f.df_between, f.df_within] for q, f in zip(qnames, prof.fstats)], prov)
    Path(out, "report.txt").write_text(format_report(dataset, table, prof, prov, positive_rate),
                                       encoding="utf-8")


def format_report(dataset, table, prof, prov, positive_rate=None) -> str:
    """Human-readable class description; percentages rounded to integers."""
    S = len(prof.sizes)
    head = "\t".join(str(k + 1) for k in range(S))
    lines = [f"# {prov}", "Class sizes", f"class\t{head}", "size\t" + "\t".join(str(int(n)) for n in prof.sizes), ""]
    lines.append("Modality percentages per class")
    lines.append(f"\t{head}\tTot")
    pct = prof.modality_pct
    for j, label in enumerate(table.schema.modality_labels()):
        cells = ["NA" if np.isnan(v) else str(int(np.floor(v + 0.5))) for v in pct.values[:, j]]
        lines.append("\t".join([label, *cells, str(int(np.floor(pct.total[j] + 0.5)))]))
    if prof.means is not None:
        lines += ["", "Quantitative means per class", f"\t{head}\tTotal"]
        for c, q in enumerate(dataset.schema.quantitative):
            cells = ["NA" if np.isnan(v) else f"{v:.2f}" for v in prof.means.values[:, c]]
            lines.append("\t".join([q, *cells, f"{prof.means.total[c]:.2f}"]))
        if prof.fstats:
            lines += ["", "F statistics", "variable\tF\tdf"]
            for q, f in zip(dataset.schema.quantitative, prof.fstats):
                lines.append(f"{q}\t{f.F:.4f}\t({f.df_between}, {f.df_within})")
    if positive_rate is not None:
        lines += ["", f"positive deviation rate\t{positive_rate:.4f}"]
    return "\n".join(lines) + "\n"


def write_render(map_text, sc_map, svg, config, out):
    prov = _prov(config, "render")
    Path(out, "map.txt").write_text(f"# {prov}\n{map_text}", encoding="utf-8")
    Path(out, "superclass_map.txt").write_text(f"# {prov}\n{sc_map}", encoding="utf-8")
    Path(out, "map.svg").write_text(svg, encoding="utf-8")


def write_summary(art: Artifacts, out):
    prov = _prov(art.config, "summary")
    rows = [
        ["n_rows", art.dataset.n_rows],
        ["n_dropped_rows", len(art.dataset.dropped)],
        ["n_modalities", art.adjusted.n_modalities],
        ["units", art.model.spec.n_units],
        ["superclasses", art.superclasses.n_classes],
        ["empty_superclasses", int((art.profile.sizes == 0).sum())],
        ["contiguity_violations", art.contiguity.n_violations],
        ["positive_deviation_rate", art.positive_rate],
    ]
    dataio.write_tsv(Path(out, "summary.tsv"), ["metric", "value"], rows, prov)


def write_all(art: Artifacts, out):
    write_config(art.config, out)
    write_encode(art.dataset, art.table, art.adjusted, art.config, out)
    write_model(art.model, art.dataset, art.config, out)
    write_assignments(art.dataset, art.adjusted, art.model, art.individual_units,
                      art.modality_units, art.config, out, art.superclasses.labels)
    write_superclasses(art.dendrogram, art.superclasses, art.contiguity, art.model, art.config, out)
    write_profile(art.dataset, art.table, art.profile, art.config, out, art.positive_rate)
    write_render(art.map_text, art.superclass_map_text, art.svg, art.config, out)
    write_summary(art, out)


# --------------------------------------------------- quantitative mode

def train_quantitative_stage(dataset, config, out=None) -> Codebook:
    """Plain SOM on the quantitative variables of ``dataset``."""
    seed = _require_seed(config)
    if not dataset.schema.quantitative:
        raise DataError("quantitative training needs at least one quantitative variable")
    with stage("train"):
        cb = train_quantitative(dataset.quant, config.grid, make_schedule(config, dataset.n_rows), seed)
        units = classify(cb, dataset.quant)
    if out is not None:
        prov = _prov(config, "train")
        save_codebook(cb, Path(out, "codebook.txt"), [prov])
        Path(out, "model.txt").write_text(
            f"# {prov}\nmode = quantitative\nvariables = {','.join(dataset.schema.quantitative)}\n",
            encoding="utf-8")
        dataio.write_tsv(Path(out, "individual_units.tsv"), ["id", "unit", "row", "col"],
                         [[rid, int(u), *cb.spec.coords(u)] for rid, u in zip(dataset.ids, units)], prov)
    return cb

