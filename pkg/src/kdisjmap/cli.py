"""Command line entry point: ``kdisjmap <command> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure.
"""

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import dataio, pipeline, superclass
from .errors import ConfigError, KdisjError
from .synth import PRESETS, generate_synthetic, load_plan

log = logging.getLogger("kdisjmap")


def _add_config_flags(p, seed_required=False):
    p.add_argument("--config", help="key = value run configuration file")
    for f in fields(dataio.RunConfig):
        if f.name == "seed":
            p.add_argument("--seed", type=int, required=seed_required)
            continue
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=None, metavar="VALUE",
                       help=f"config {f.name} (default {f.default!r})")


def _add_data_flags(p):
    p.add_argument("--data", required=True, help="comma-delimited data file with a header row")
    p.add_argument("--schema", required=True, help="schema file (name role [modalities] per line)")


def _config(args) -> dataio.RunConfig:
    config = dataio.load_config(args.config) if args.config else dataio.RunConfig()
    changes = {}
    for f in fields(dataio.RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            changes[f.name] = value if f.name == "seed" else dataio.coerce_value(f.name, value)
    return config.replace(**changes)


def _dataset(args, config):
    return dataio.load(args.data, args.schema, config.incomplete_policy)


def cmd_encode(args):
    config = _config(args)
    dataset = _dataset(args, config)
    table, adjusted = pipeline.encode_stage(dataset, config)
    with pipeline.staging(args.out) as tmp:
        pipeline.write_config(config, tmp)
        pipeline.write_encode(dataset, table, adjusted, config, tmp)
    log.info("encoded %d rows into %d modalities", table.n_rows, adjusted.n_modalities)


def cmd_train(args):
    config = _config(args)
    dataset = _dataset(args, config)
    with pipeline.staging(args.out) as tmp:
        pipeline.write_config(config, tmp)
        if args.mode == "quantitative":
            pipeline.train_quantitative_stage(dataset, config, tmp)
            return
        table, adjusted = pipeline.encode_stage(dataset, config)
        model, iu, mu = pipeline.train_stage(adjusted, config)
        pipeline.write_model(model, dataset, config, tmp)
        pipeline.write_assignments(dataset, adjusted, model, iu, mu, config, tmp)


def cmd_superclass(args):
    config = _config(args)
    model = pipeline.load_model(args.run)
    dendro, sc, contiguity = pipeline.superclass_stage(model, config)
    with pipeline.staging(args.run) as tmp:
        pipeline.write_superclasses(dendro, sc, contiguity, model, config, tmp)
    if contiguity.n_violations:
        log.warning("%d super classes are not contiguous", contiguity.n_violations)


def _run_labels(run):
    run = Path(run)
    iu = pipeline.read_units(run / "individual_units.tsv")
    sc = pipeline.read_superclasses(run / "superclasses.tsv")
    return iu, sc


def _modality_units(run, adjusted):
    header, rows = dataio.read_tsv(Path(run) / "modality_units.tsv")
    units = {r[0]: int(r[header.index("unit")]) for r in rows}
    try:
        return np.array([units[name] for name in adjusted.names], dtype=int)
    except KeyError as exc:
        raise ConfigError(f"modality {exc} missing from the run directory; was it trained on this data?") from None


def cmd_profile(args):
    config = _config(args)
    dataset = _dataset(args, config)
    table, adjusted = pipeline.encode_stage(dataset, config)
    iu, sc = _run_labels(args.run)
    if len(iu) != dataset.n_rows:
        raise ConfigError("run directory and data file disagree on the number of rows")
    labels = sc.labels[iu]
    prof = pipeline.profile_stage(dataset, table, labels, sc.n_classes)
    mu = _modality_units(args.run, adjusted)
    rate = superclass._positive_rate(mu, adjusted.columns, sc, table, labels)
    with pipeline.staging(args.run) as tmp:
        pipeline.write_profile(dataset, table, prof, config, tmp, rate)


def cmd_render(args):
    config = _config(args)
    dataset = _dataset(args, config)
    _, adjusted = pipeline.encode_stage(dataset, config)
    iu, sc = _run_labels(args.run)
    mu = _modality_units(args.run, adjusted)
    spec = config.grid
    if sc.labels.shape[0] != spec.n_units:
        raise ConfigError("grid size in the configuration does not match the run directory")
    texts = pipeline.render_stage(dataset, config, spec, iu, mu, pipeline._short_labels(adjusted), sc.labels)
    with pipeline.staging(args.run) as tmp:
        pipeline.write_render(*texts, config, tmp)


def cmd_pipeline(args):
    config = _config(args)
    dataset = _dataset(args, config)
    art = pipeline.run_pipeline(config, dataset, args.out)
    log.info("wrote artifacts to %s (%d super classes, %d not contiguous, positive deviation rate %.3f)",
             args.out, art.superclasses.n_classes, art.contiguity.n_violations, art.positive_rate)


def cmd_synth(args):
    if args.plan:
        plan = load_plan(args.plan)
    else:
        plan = PRESETS[args.preset]()
    if args.n is not None:
        plan["n"] = args.n
    dataset, truth = generate_synthetic(plan, args.seed)
    plan_text = json.dumps(plan, indent=1, sort_keys=True)
    digest = hashlib.sha256(plan_text.encode()).hexdigest()[:16]
    prov = dataio.provenance(digest, args.seed, "synth")
    with pipeline.staging(args.out) as tmp:
        dataio.write_data(dataset, tmp / "data.csv", prov)
        dataio.write_schema(dataset.schema, tmp / "schema.txt", prov)
        dataio.write_tsv(tmp / "truth.tsv", ["id", "cluster"],
                         [[rid, int(c)] for rid, c in zip(dataset.ids, truth)], prov)
        (tmp / "plan.json").write_text(plan_text + "\n", encoding="utf-8")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kdisjmap", description="Kohonen maps of individuals and modalities from qualitative data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="build the disjunctive and adjusted tables")
    _add_data_flags(p)
    _add_config_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train a map")
    _add_data_flags(p)
    _add_config_flags(p, seed_required=True)
    p.add_argument("--mode", choices=("kdisj", "quantitative"), default="kdisj")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("superclass", help="regroup the units of a trained map")
    _add_config_flags(p)
    p.add_argument("--run", required=True, help="run directory holding codebook.txt and model.txt")
    p.set_defaults(func=cmd_superclass)

    p = sub.add_parser("profile", help="describe the super classes")
    _add_data_flags(p)
    _add_config_flags(p)
    p.add_argument("--run", required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("render", help="draw the map")
    _add_data_flags(p)
    _add_config_flags(p)
    p.add_argument("--run", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("pipeline", help="run every stage")
    _add_data_flags(p)
    _add_config_flags(p, seed_required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("synth", help="generate a synthetic dataset with planted clusters")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--plan", help="JSON plan file")
    src.add_argument("--preset", choices=sorted(PRESETS), default="planted")
    p.add_argument("--n", type=int, help="override the number of records")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except KdisjError as exc:
        where = getattr(exc, "stage", None)
        prefix = f"error in stage {where}: " if where else "error: "
        print(prefix + str(exc), file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
