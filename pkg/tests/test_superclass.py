import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kdisjmap.disjunctive import CategoricalSchema, DisjunctiveTable, encode
from kdisjmap.grid import GridSpec
from kdisjmap.som import Codebook, ComponentRange
from kdisjmap.superclass import (LINKAGES, SuperClassification, class_means, class_sizes, contiguity_report, cut,
                                 deviation, deviations, fisher_f, height_gaps, hierarchical_cluster,
                                 modality_percentages, profile)

scipy_hierarchy = pytest.importorskip("scipy.cluster.hierarchy")


def ward_oracle(X):
    """Ward by explicit member lists: merge the pair with the smallest increase in within-class inertia."""
    U = len(X)
    clusters = {u: [u] for u in range(U)}
    merges = []
    for step in range(U - 1):
        best = None
        for a, b in itertools.combinations(sorted(clusters), 2):
            A, B = X[clusters[a]], X[clusters[b]]
            na, nb = len(A), len(B)
            gap = A.mean(axis=0) - B.mean(axis=0)
            cost = 2.0 * na * nb / (na + nb) * float(gap @ gap)
            if best is None or (cost, a, b) < best:
                best = (cost, a, b)
        cost, a, b = best
        clusters[U + step] = clusters.pop(a) + clusters.pop(b)
        merges.append((a, b, np.sqrt(cost), len(clusters[U + step])))
    return np.array(merges)


def test_two_units_single_merge():
    d = hierarchical_cluster(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert d.merges.shape == (1, 4)
    assert d.merges[0].tolist() == [0, 1, 5.0, 2]


def test_closest_pair_merges_first():
    d = hierarchical_cluster(np.array([0.0, 1.0, 10.0]))
    assert d.merges[0, :2].tolist() == [0, 1]
    assert d.merges[1, :2].tolist() == [2, 3]
    assert d.merges[0, 2] == pytest.approx(1.0)
    # sqrt(2 * 1 * 2 / 3) * |0.5 - 10|
    assert d.merges[1, 2] == pytest.approx(np.sqrt(4 / 3) * 9.5)


def test_ward_matches_brute_force(rng):
    for _ in range(30):
        U = int(rng.integers(2, 9))
        X = rng.random((U, 3))
        d = hierarchical_cluster(X)
        assert np.allclose(d.merges, ward_oracle(X), atol=1e-12)


@pytest.mark.parametrize("linkage", LINKAGES)
def test_matches_scipy(linkage, rng):
    for _ in range(10):
        X = rng.random((int(rng.integers(3, 26)), 4))
        ours = hierarchical_cluster(X, linkage).merges
        ref = scipy_hierarchy.linkage(X, method=linkage)
        assert np.allclose(ours, ref, atol=1e-10)


def test_ties_prefer_smallest_ids():
    # a square: four equal nearest pairs
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    d = hierarchical_cluster(X)
    assert d.merges[0, :2].tolist() == [0, 1]


def test_restrict_and_codebook_input():
    X = np.array([[0.0, 100.0], [1.0, 0.0], [10.0, 100.0]])
    cb = Codebook(GridSpec(1, 3, "string"), X)
    d = hierarchical_cluster(cb, restrict=ComponentRange(0, 1))
    assert d.merges[0, :2].tolist() == [0, 1]
    with pytest.raises(ValueError):
        hierarchical_cluster(X, "median")
    with pytest.raises(ValueError):
        hierarchical_cluster(X[:1])


def test_heights_monotone(rng):
    for _ in range(20):
        d = hierarchical_cluster(rng.random((16, 5)))
        assert np.all(np.diff(d.heights) >= -1e-12)


def test_cut_extremes(rng):
    d = hierarchical_cluster(rng.random((9, 2)))
    assert cut(d, 9).labels.tolist() == list(range(9))
    assert cut(d, 1).labels.tolist() == [0] * 9
    with pytest.raises(ValueError):
        cut(d, 0)
    with pytest.raises(ValueError):
        cut(d, 10)


def test_cut_labels_by_smallest_member():
    d = hierarchical_cluster(np.array([10.0, 0.0, 10.5, 0.2]))
    sc = cut(d, 2)
    assert sc.labels.tolist() == [0, 1, 0, 1]
    assert sc.members(1) == [1, 3]


def test_cut_refines_by_one_split(rng):
    for _ in range(10):
        U = 12
        d = hierarchical_cluster(rng.random((U, 3)))
        for S in range(1, U):
            coarse, fine = cut(d, S).labels, cut(d, S + 1).labels
            # each fine class sits inside one coarse class
            for k in range(S + 1):
                assert len(set(coarse[fine == k])) == 1
            split = [k for k in range(S) if len(set(fine[coarse == k])) > 1]
            assert len(split) == 1


def test_height_gaps():
    d = hierarchical_cluster(np.array([0.0, 1.0, 10.0, 11.0]))
    gaps = dict(height_gaps(d))
    assert set(gaps) == {2, 3}
    assert gaps[2] == max(gaps.values())


def test_contiguity_split_class():
    spec = GridSpec(3, 3)
    sc = SuperClassification(np.array([0, 1, 0, 1, 1, 1, 1, 1, 1]), 2)
    report = contiguity_report(sc, spec)
    assert report.contiguous == [False, True]
    assert report.n_violations == 1 and not report.all_contiguous
    # on a cylinder columns 0 and 2 are adjacent
    assert contiguity_report(sc, GridSpec(3, 3, "cylinder")).all_contiguous


def test_class_sizes_fixture():
    sizes = [101, 108, 87, 241, 51, 38, 43, 89, 41, 28]
    units = np.repeat(np.arange(10), sizes)
    sc = SuperClassification(np.arange(10), 10)
    got = class_sizes(units, sc)
    assert got.tolist() == sizes and got.sum() == 827


def _table(records):
    schema = CategoricalSchema.from_dict({"A": ["a", "b"], "B": ["c", "d"]})
    return encode(records, schema)


def test_modality_percentages_example():
    D = _table([["a", "c"], ["a", "d"], ["b", "d"], ["b", "d"]])
    pct = modality_percentages(D, [0, 0, 1, 1], 3)
    assert pct.values[0].tolist() == [100.0, 0.0, 50.0, 50.0]
    assert pct.values[1].tolist() == [0.0, 100.0, 0.0, 100.0]
    assert np.all(np.isnan(pct.values[2])) and pct.empty.tolist() == [False, False, True]
    assert pct.total.tolist() == [50.0, 50.0, 25.0, 75.0]


def test_class_means_example():
    m = class_means(np.array([1.0, 2.0, 3.0, 4.0]), [0, 0, 1, 1])
    assert m.values[:, 0].tolist() == [1.5, 3.5]
    assert m.total.tolist() == [2.5]
    with pytest.raises(ValueError):
        class_means(np.array([1.0, np.nan]), [0, 1])


def test_fisher_examples():
    f = fisher_f([1.0, 2.0, 3.0, 4.0], [0, 0, 1, 1])
    assert f.F == pytest.approx(8.0) and (f.df_between, f.df_within) == (1, 2)
    assert fisher_f([1.0, 2.0, 2.0, 1.0], [0, 0, 1, 1]).F == 0.0
    assert fisher_f([1.0, 1.0, 5.0, 5.0], [0, 0, 1, 1]).F == np.inf
    assert np.isnan(fisher_f([1.0] * 4, [0, 0, 1, 1]).F)
    # an empty class label does not count toward the degrees of freedom
    assert fisher_f([1.0, 2.0, 3.0, 4.0], [0, 0, 3, 3]).df_between == 1
    with pytest.raises(ValueError):
        fisher_f([1.0, 2.0], [0, 0])
    with pytest.raises(ValueError):
        fisher_f([1.0, 2.0], [0, 1])


def anova_two_pass(x, labels):
    groups = {}
    for v, k in zip(x, labels):
        groups.setdefault(k, []).append(v)
    grand = sum(x) / len(x)
    ssb = ssw = 0.0
    for vals in groups.values():
        mu = sum(vals) / len(vals)
        ssb += len(vals) * (mu - grand) ** 2
        ssw += sum((v - mu) ** 2 for v in vals)
    g = len(groups)
    return (ssb / (g - 1)) / (ssw / (len(x) - g))


def test_fisher_matches_two_pass(rng):
    for _ in range(100):
        n = int(rng.integers(5, 60))
        g = int(rng.integers(2, 5))
        labels = np.concatenate([np.arange(g), rng.integers(0, g, size=n - g)])
        x = rng.normal(size=n) + labels * rng.random()
        ref = anova_two_pass(list(x), list(labels))
        assert fisher_f(x, labels).F == pytest.approx(ref, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), shift=st.floats(-1e3, 1e3), scale=st.floats(0.01, 100))
def test_fisher_affine_invariance(seed, shift, scale):
    rng = np.random.default_rng(seed)
    labels = np.concatenate([[0, 1, 2], rng.integers(0, 3, size=27)])
    x = rng.normal(size=30)
    base = fisher_f(x, labels).F
    assert fisher_f(scale * x + shift, labels).F == pytest.approx(base, rel=1e-6)


def test_deviation_example():
    # 2 of 4 individuals hold "a"; class 0 has 3 members, 2 of them hold "a" ... expected 1.5
    D = _table([["a", "c"], ["a", "c"], ["b", "d"], ["b", "d"]])
    labels = [0, 0, 0, 1]
    assert deviation(0, 0, D, labels) == pytest.approx(2 - 2 * 3 / 4)
    # 3 individuals in class 0, 2 hold "d" overall... count 1 vs 2*3/4
    assert deviation(3, 0, D, labels) == pytest.approx(1 - 1.5)
    D = _table([["a", "c"]] * 3 + [["b", "d"]] * 3)
    assert deviation(0, 0, D, [0, 0, 0, 1, 1, 1]) == pytest.approx(3 - 3 * 3 / 6)


def test_deviations_sum_to_zero(rng):
    for _ in range(20):
        n = 40
        values = np.zeros((n, 5), dtype=np.int8)
        values[np.arange(n), rng.integers(0, 5, size=n)] = 1
        D = DisjunctiveTable(values, CategoricalSchema.from_dict({"V": list("pqrst")}))
        labels = rng.integers(0, 4, size=n)
        dev = deviations(D, labels, 4)
        assert dev.shape == (5, 4)
        assert np.allclose(dev.sum(axis=1), 0.0) and np.allclose(dev.sum(axis=0), 0.0)
        for m in range(5):
            for k in range(4):
                assert dev[m, k] == pytest.approx(deviation(m, k, D, labels))


def test_profile_bundle():
    D = _table([["a", "c"], ["a", "d"], ["b", "d"], ["b", "d"]])
    quant = np.array([[1.0], [2.0], [3.0], [4.0]])
    prof = profile(D, [0, 0, 1, 1], 2, quant)
    assert prof.sizes.tolist() == [2, 2]
    assert prof.deviations.shape == (4, 2)
    assert prof.means.values[:, 0].tolist() == [1.5, 3.5]
    assert prof.fstats[0].F == pytest.approx(8.0)


def test_positive_rate_single_class_is_zero():
    from kdisjmap.superclass import _positive_rate
    D = _table([["a", "c"], ["b", "d"], ["a", "d"]])
    sc = SuperClassification(np.zeros(4, dtype=int), 1)
    assert _positive_rate([0, 1, 2, 3], range(4), sc, D, [0, 0, 0]) == 0.0


def test_positive_rate_two_units_by_hand():
    from kdisjmap.superclass import _positive_rate
    D = _table([["a", "c"], ["a", "c"], ["b", "d"], ["b", "d"]])
    labels = [0, 0, 1, 1]
    sc = SuperClassification(np.array([0, 1]), 2)
    # a and c over-represented in class 0, b and d in class 1
    assert _positive_rate([0, 1, 0, 1], range(4), sc, D, labels) == 1.0
    assert _positive_rate([1, 1, 0, 1], range(4), sc, D, labels) == 0.75
