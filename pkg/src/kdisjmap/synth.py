"""Seeded synthetic survey data with planted clusters.

A plan is a plain dict (or JSON file)::

    {
      "n": 600,
      "categorical": {"V1": ["a", "b", "c"], ...},
      "quantitative": ["Q1"],
      "clusters": [
        {"weight": 0.5,
         "modalities": {"V1": [0.8, 0.1, 0.1], ...},
         "means": [10.0], "sd": [1.0]},
        ...
      ]
    }

Every record first draws its cluster from the weights, then one modality per
variable from that cluster's distribution, then Gaussian quantities.
Quantities can be floored with an optional ``"clip_min"`` list.
"""

import json
from pathlib import Path

import numpy as np

from .dataio import Dataset
from .disjunctive import CategoricalSchema
from .errors import ConfigError

# qualitative and quantitative variables of the part-time work survey
SURVEY_CATEGORICAL = {
    "CONTRACT": ["OEC", "FTC"],
    "GENDER": ["MAN", "FEM"],
    "AGE": ["AGE1", "AGE2", "AGE3", "AGE4"],
    "HOR": ["HORIDE", "HORPOS", "HORVAR"],
    "JWK": ["JWK1", "JWK2"],
    "NITE": ["NITE1", "NITE2", "NITE3"],
    "SAT": ["SAT1", "SAT2", "SAT3"],
    "SUN": ["SUN1", "SUN2", "SUN3"],
    "WED": ["WED1", "WED2", "WED3"],
    "ABS": ["ABS1", "ABS2", "ABS3"],
    "DET": ["DET1", "DET2", "DET3", "DET4"],
    "PTS": ["INVOL", "VOL"],
    "LEND": ["LEND1", "LEND2"],
    "RECU": ["RECU0", "RECU1", "RECU2"],
}
SURVEY_QUANTITATIVE = ["DMIN", "DMAX", "DTHEO", "HSUP", "HPROL"]


class PlanError(ConfigError):
    pass


def validate_plan(plan: dict) -> CategoricalSchema:
    try:
        schema = CategoricalSchema.from_dict(plan["categorical"], plan.get("quantitative", ()), "ID")
        clusters = plan["clusters"]
        n = int(plan["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanError(f"malformed plan: {exc}") from exc
    if n < 1 or not clusters:
        raise PlanError("plan needs n >= 1 and at least one cluster")
    weights = np.array([c.get("weight", 1.0) for c in clusters], dtype=float)
    if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0, atol=1e-9):
        raise PlanError("cluster weights must be non-negative and sum to 1")
    Q = len(schema.quantitative)
    for c, cluster in enumerate(clusters):
        for var in schema.variables:
            p = np.asarray(cluster.get("modalities", {}).get(var.name, ()), dtype=float)
            if p.shape != (len(var.modalities),):
                raise PlanError(f"cluster {c}: variable {var.name} needs {len(var.modalities)} probabilities")
            if np.any(p < 0) or not np.isclose(p.sum(), 1.0, atol=1e-9):
                raise PlanError(f"cluster {c}: probabilities of {var.name} must be non-negative and sum to 1")
        if Q and (len(cluster.get("means", ())) != Q or len(cluster.get("sd", [0.0] * Q)) != Q):
            raise PlanError(f"cluster {c}: needs {Q} means and sds")
    return schema


def generate_synthetic(plan: dict, seed) -> tuple[Dataset, np.ndarray]:
    """Draw a dataset from ``plan``; returns it with the true cluster of each row."""
    schema = validate_plan(plan)
    rng = np.random.default_rng(seed)
    clusters = plan["clusters"]
    n = int(plan["n"])
    Q = len(schema.quantitative)
    weights = np.array([c.get("weight", 1.0) for c in clusters], dtype=float)
    truth = rng.choice(len(clusters), size=n, p=weights / weights.sum())

    labels = np.empty((n, schema.n_variables), dtype=object)
    for k, var in enumerate(schema.variables):
        probs = np.array([c["modalities"][var.name] for c in clusters], dtype=float)
        u = rng.random(n)
        cdf = np.cumsum(probs, axis=1)
        cdf[:, -1] = 1.0
        picks = (u[:, None] >= cdf[truth]).sum(axis=1)
        labels[:, k] = np.array(var.modalities, dtype=object)[picks]

    quant = np.zeros((n, Q))
    if Q:
        means = np.array([c["means"] for c in clusters], dtype=float)
        sds = np.array([c.get("sd", [0.0] * Q) for c in clusters], dtype=float)
        quant = means[truth] + sds[truth] * rng.standard_normal((n, Q))
        if "clip_min" in plan:
            quant = np.maximum(quant, np.asarray(plan["clip_min"], dtype=float))

    width = len(str(n))
    ids = [f"I{i + 1:0{width}d}" for i in range(n)]
    records = [tuple(str(x) for x in row) for row in labels]
    return Dataset(ids, records, quant, schema), truth


def load_plan(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PlanError(f"cannot read plan {path}: {exc}") from exc


def planted_plan(n=600, n_clusters=3, n_variables=7, n_modalities=3, dominance=0.85,
                 n_quantitative=2, weights=None):
    """Well separated clusters: cluster ``c`` favours modality ``c mod m`` of every variable.

    With ``n_modalities >= n_clusters`` every modality is the favourite of
    at most one cluster.
    """
    variables = {f"V{k + 1}": [f"V{k + 1}M{m + 1}" for m in range(n_modalities)]
                 for k in range(n_variables)}
    rest = (1.0 - dominance) / (n_modalities - 1)
    if weights is None:
        weights = [1.0 / n_clusters] * n_clusters
    clusters = []
    for c in range(n_clusters):
        dist = [rest] * n_modalities
        dist[c % n_modalities] = dominance
        clusters.append({
            "weight": weights[c],
            "modalities": {name: list(dist) for name in variables},
            "means": [10.0 * (c + 1) + q for q in range(n_quantitative)],
            "sd": [2.0] * n_quantitative,
        })
    return {"n": n, "categorical": variables,
            "quantitative": [f"Q{q + 1}" for q in range(n_quantitative)],
            "clusters": clusters}


def survey_plan(n=827, n_clusters=5, plan_seed=2001):
    """A plan shaped like the part-time work survey: 14 variables, 39 modalities, 5 quantities.

    The cluster distributions are drawn once from a Dirichlet with a fixed
    ``plan_seed``; only the shape mirrors the real survey.
    """
    rng = np.random.default_rng(plan_seed)
    weights = rng.dirichlet(np.full(n_clusters, 5.0))
    base = np.array([24.5, 28.5, 25.4, 1.5, 1.5])
    spread = np.array([2.0, 2.5, 1.5, 0.8, 0.7])
    clusters = []
    for c in range(n_clusters):
        mods = {}
        for name, labels in SURVEY_CATEGORICAL.items():
            mods[name] = [float(x) for x in rng.dirichlet(np.full(len(labels), 0.6))]
        clusters.append({
            "weight": float(weights[c]),
            "modalities": mods,
            "means": [float(x) for x in base + spread * rng.standard_normal(5)],
            "sd": [4.0, 4.5, 3.5, 1.5, 1.5],
        })
    total = sum(c["weight"] for c in clusters)
    for c in clusters:
        c["weight"] /= total
    return {"n": n, "categorical": SURVEY_CATEGORICAL, "quantitative": SURVEY_QUANTITATIVE,
            "clusters": clusters, "clip_min": [0.0] * 5}


PRESETS = {"planted": planted_plan, "survey": survey_plan}
