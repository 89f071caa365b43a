"""Regrouping map units into super classes and describing the classes.

Code vectors are merged bottom-up (Ward linkage by default).  Cutting the
dendrogram gives super classes of units; composing a unit assignment of
individuals with the super-class labels gives a class per individual, from
which the profile tables are computed: sizes, modality percentages,
quantitative means, one-way F statistics and deviations from independence.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .disjunctive import DisjunctiveTable, adjust
from .grid import GridSpec, is_connected
from .som import Codebook, ComponentRange

LINKAGES = ("ward", "complete", "average", "single")


@dataclass
class Dendrogram:
    """Merge history in the usual linkage-matrix layout.

    Row ``s`` of ``merges`` is ``(left, right, height, size)``.  Leaves are
    numbered ``0 .. U-1`` and the cluster formed at step ``s`` is ``U + s``.
    """

    merges: np.ndarray
    n_leaves: int
    linkage: str = "ward"

    @property
    def heights(self) -> np.ndarray:
        return self.merges[:, 2]


@dataclass
class SuperClassification:
    labels: np.ndarray
    n_classes: int

    def members(self, k: int) -> list[int]:
        return [int(u) for u in np.flatnonzero(self.labels == k)]

    def individual_labels(self, individual_units) -> np.ndarray:
        return self.labels[np.asarray(individual_units, dtype=int)]


@dataclass
class ContiguityReport:
    contiguous: list[bool]

    @property
    def n_violations(self) -> int:
        return sum(not c for c in self.contiguous)

    @property
    def all_contiguous(self) -> bool:
        return self.n_violations == 0


def _lance_williams(method, d_ik, d_jk, d_ij, n_i, n_j, n_k):
    if method == "ward":
        # operates on squared distances
        total = n_i + n_j + n_k
        return ((n_i + n_k) * d_ik + (n_j + n_k) * d_jk - n_k * d_ij) / total
    if method == "complete":
        return np.maximum(d_ik, d_jk)
    if method == "single":
        return np.minimum(d_ik, d_jk)
    return (n_i * d_ik + n_j * d_jk) / (n_i + n_j)


def hierarchical_cluster(codebook, linkage: str = "ward", restrict: ComponentRange | None = None) -> Dendrogram:
    """Agglomerate the code vectors of ``codebook``.

    ``codebook`` may also be a plain ``U x dim`` array.  Among equally close
    pairs the one with the smallest cluster ids merges first.  Heights follow
    the scipy convention, so Ward heights are
    ``sqrt(2 n_a n_b / (n_a + n_b)) * |c_a - c_b|``.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    X = codebook.vectors if isinstance(codebook, Codebook) else np.asarray(codebook, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if restrict is not None:
        X = X[:, restrict.slice]
    U = X.shape[0]
    if U < 2:
        raise ValueError("hierarchical clustering needs at least 2 code vectors")

    dist = np.empty((U, U))
    for a in range(U):
        diff = X - X[a]
        dist[a] = np.einsum("ij,ij->i", diff, diff)
    if linkage != "ward":
        dist = np.sqrt(dist)

    ids = list(range(U))
    sizes = [1] * U
    active = list(range(U))
    merges = np.zeros((U - 1, 4))
    for step in range(U - 1):
        best = None
        for ai, a in enumerate(active):
            for b in active[ai + 1:]:
                key = (dist[a, b], min(ids[a], ids[b]), max(ids[a], ids[b]))
                if best is None or key < best[0]:
                    best = (key, a, b)
        (d_ab, lo, hi), a, b = best
        height = np.sqrt(d_ab) if linkage == "ward" else d_ab
        merges[step] = (lo, hi, height, sizes[a] + sizes[b])
        others = [k for k in active if k not in (a, b)]
        if others:
            ks = np.array(others)
            nk = np.array([sizes[k] for k in others], dtype=float)
            new = _lance_williams(linkage, dist[a, ks], dist[b, ks], d_ab, sizes[a], sizes[b], nk)
            dist[a, ks] = new
            dist[ks, a] = new
        sizes[a] += sizes[b]
        ids[a] = U + step
        active.remove(b)
    return Dendrogram(merges, U, linkage)


def cut(dendrogram: Dendrogram, n_classes: int) -> SuperClassification:
    """Undo the last ``n_classes - 1`` merges.

    Classes are numbered by their smallest unit index, so class 0 holds
    unit 0.
    """
    U = dendrogram.n_leaves
    if not 1 <= n_classes <= U:
        raise ValueError(f"number of super classes must be in [1, {U}], got {n_classes}")
    parent = list(range(2 * U - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step in range(U - n_classes):
        left, right = int(dendrogram.merges[step, 0]), int(dendrogram.merges[step, 1])
        parent[find(left)] = U + step
        parent[find(right)] = U + step
    roots = [find(u) for u in range(U)]
    order = {}
    for r in roots:
        order.setdefault(r, len(order))
    return SuperClassification(np.array([order[r] for r in roots], dtype=int), n_classes)


def height_gaps(dendrogram: Dendrogram) -> list[tuple[int, float]]:
    """``(S, gap)`` pairs: the height jump undone by cutting into S classes.

    A large gap at S suggests S is a natural number of classes.  Only
    advisory.
    """
    h = dendrogram.heights
    U = dendrogram.n_leaves
    out = []
    for S in range(2, U):
        # cutting into S classes undoes merge U-S; the one before it is U-S-1
        out.append((S, float(h[U - S] - h[U - S - 1])))
    return out


def contiguity_report(sc: SuperClassification, spec: GridSpec) -> ContiguityReport:
    flags = []
    for k in range(sc.n_classes):
        units = sc.members(k)
        flags.append(True if not units else is_connected(spec, units))
    return ContiguityReport(flags)


class FTest(NamedTuple):
    F: float
    df_between: int
    df_within: int


@dataclass
class ClassTable:
    """A per-class table with a population column.

    ``values`` has one row per class; rows of empty classes are NaN and
    flagged in ``empty``.  ``total`` is the same statistic over everyone.
    """

    values: np.ndarray
    total: np.ndarray
    empty: np.ndarray


@dataclass
class ClassProfile:
    sizes: np.ndarray
    modality_pct: ClassTable
    deviations: np.ndarray
    means: ClassTable | None = None
    fstats: list[FTest] = field(default_factory=list)


def class_sizes(individual_units, sc: SuperClassification) -> np.ndarray:
    labels = sc.individual_labels(individual_units)
    return np.bincount(labels, minlength=sc.n_classes)


def _n_classes(labels, n_classes):
    labels = np.asarray(labels, dtype=int)
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if len(labels) else 0
    return labels, n_classes


def modality_percentages(table: DisjunctiveTable, labels, n_classes: int | None = None) -> ClassTable:
    """Percentage of each class holding each modality (S x M)."""
    labels, S = _n_classes(labels, n_classes)
    d = np.asarray(table.values, dtype=float)
    sizes = np.bincount(labels, minlength=S)
    counts = np.zeros((S, d.shape[1]))
    np.add.at(counts, labels, d)
    empty = sizes == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        pct = 100.0 * counts / sizes[:, None]
    pct[empty] = np.nan
    total = 100.0 * d.sum(axis=0) / d.shape[0]
    return ClassTable(pct, total, empty)


def class_means(quant, labels, n_classes: int | None = None) -> ClassTable:
    """Mean of each quantitative variable in each class (S x Q)."""
    labels, S = _n_classes(labels, n_classes)
    q = np.asarray(quant, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    if not np.all(np.isfinite(q)):
        raise ValueError("quantitative values must not be missing")
    sizes = np.bincount(labels, minlength=S)
    sums = np.zeros((S, q.shape[1]))
    np.add.at(sums, labels, q)
    empty = sizes == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        means = sums / sizes[:, None]
    means[empty] = np.nan
    return ClassTable(means, q.mean(axis=0), empty)


def fisher_f(values, labels) -> FTest:
    """One-way analysis of variance of ``values`` across classes.

    Only non-empty classes count.  When the within-class sum of squares is
    zero, F is ``inf`` (or ``nan`` if the between-class sum is zero too).
    """
    x = np.asarray(values, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if x.shape != labels.shape:
        raise ValueError("values and labels must have the same length")
    classes, inverse, sizes = np.unique(labels, return_inverse=True, return_counts=True)
    g = len(classes)
    n = len(x)
    if g < 2:
        raise ValueError("F statistic needs at least 2 non-empty classes")
    if n <= g:
        raise ValueError("F statistic needs more observations than classes")
    grand = x.mean()
    means = np.bincount(inverse, weights=x) / sizes
    ss_between = float((sizes * (means - grand) ** 2).sum())
    ss_within = float(((x - means[inverse]) ** 2).sum())
    df_b, df_w = g - 1, n - g
    if ss_within == 0.0:
        F = np.inf if ss_between > 0 else np.nan
    else:
        F = (ss_between / df_b) / (ss_within / df_w)
    return FTest(float(F), df_b, df_w)


def deviations(table: DisjunctiveTable, labels, n_classes: int | None = None) -> np.ndarray:
    """``count(m, k) - n_m * n_k / n`` for every modality and class (M x S)."""
    labels, S = _n_classes(labels, n_classes)
    d = np.asarray(table.values, dtype=float)
    n = d.shape[0]
    counts = np.zeros((S, d.shape[1]))
    np.add.at(counts, labels, d)
    n_k = np.bincount(labels, minlength=S).astype(float)
    n_m = d.sum(axis=0)
    return (counts - np.outer(n_k, n_m) / n).T


def deviation(m: int, k: int, table: DisjunctiveTable, labels) -> float:
    labels = np.asarray(labels, dtype=int)
    col = np.asarray(table.values[:, m], dtype=float)
    n = len(col)
    in_k = labels == k
    return float(col[in_k].sum() - col.sum() * in_k.sum() / n)


def positive_deviation_rate(model, sc: SuperClassification, table: DisjunctiveTable, labels,
                            adjusted=None) -> float:
    """Share of modalities that are over-represented in the super class they are mapped to.

    Each modality is classified onto a unit of ``model``; the rate counts the
    modalities whose deviation in that unit's super class is strictly
    positive.
    """
    from .kdisj import classify_modalities

    if adjusted is None:
        adjusted = adjust(table, empty_policy="drop")
    units = classify_modalities(model, adjusted)
    return _positive_rate(units, adjusted.columns, sc, table, labels)


def _positive_rate(modality_units, columns, sc, table, labels):
    dev = deviations(table, labels, sc.n_classes)
    home = sc.labels[np.asarray(modality_units, dtype=int)]
    hits = dev[np.asarray(columns, dtype=int), home] > 0
    return float(hits.mean()) if len(hits) else 0.0


def profile(table: DisjunctiveTable, labels, n_classes: int, quant=None) -> ClassProfile:
    """All class-description tables for one labelling of the individuals."""
    labels = np.asarray(labels, dtype=int)
    prof = ClassProfile(
        sizes=np.bincount(labels, minlength=n_classes),
        modality_pct=modality_percentages(table, labels, n_classes),
        deviations=deviations(table, labels, n_classes),
    )
    if quant is not None and np.asarray(quant).size:
        q = np.asarray(quant, dtype=float)
        prof.means = class_means(q, labels, n_classes)
        if len(np.unique(labels)) >= 2 and len(labels) > len(np.unique(labels)):
            prof.fstats = [fisher_f(q[:, c], labels) for c in range(q.shape[1])]
    return prof
