import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kdisjmap.disjunctive import (CategoricalSchema, adjust, column_counts, decode, encode,
                                  rarest_modalities, rarest_modality)
from kdisjmap.errors import ConfigError, EmptyModalityError, IncompleteRecordError, SchemaViolationError
from kdisjmap.synth import SURVEY_CATEGORICAL, generate_synthetic, survey_plan

from conftest import random_table


def test_schema_layout(toy_schema):
    assert toy_schema.n_variables == 2 and toy_schema.n_modalities == 5
    assert toy_schema.block(1) == slice(2, 5)
    assert toy_schema.modality_names() == ["A.a1", "A.a2", "B.b1", "B.b2", "B.b3"]
    assert [toy_schema.variable_of(j) for j in range(5)] == [0, 0, 1, 1, 1]
    with pytest.raises(ConfigError):
        CategoricalSchema.from_dict({"A": ["x", "x"]})


def test_survey_schema_shape():
    schema = CategoricalSchema.from_dict(SURVEY_CATEGORICAL)
    assert schema.n_variables == 14 and schema.n_modalities == 39


def test_encode_one_hot():
    schema = CategoricalSchema.from_dict({"A": ["p", "q"], "B": ["r", "s"]})
    D = encode([["p", "s"]], schema)
    assert D.values.tolist() == [[1, 0, 0, 1]]
    D = encode([{"A": "q", "B": "r"}], schema)
    assert D.values.tolist() == [[0, 1, 1, 0]]


def test_encode_errors(toy_schema):
    with pytest.raises(SchemaViolationError) as err:
        encode([["a1", "b1"], ["a1", "zz"]], toy_schema)
    assert err.value.row == 1 and err.value.variable == "B"
    with pytest.raises(IncompleteRecordError) as err:
        encode([["a1", ""]], toy_schema)
    assert err.value.variable == "B"
    with pytest.raises(IncompleteRecordError):
        encode([{"A": "a1"}], toy_schema)


def test_survey_shaped_table():
    ds, _ = generate_synthetic(survey_plan(), seed=0)
    D = encode(ds.records, ds.schema)
    assert D.values.shape == (827, 39)
    assert column_counts(D).sum() == 827 * 14
    assert np.all(D.values.sum(axis=1) == 14)


def test_column_counts_examples(toy_schema):
    D = encode([["a1", "b1"]] * 6, toy_schema)
    counts = column_counts(D)
    assert counts.tolist() == [6, 0, 6, 0, 0]


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_round_trip_and_row_sums(seed):
    schema, records, D = random_table(np.random.default_rng(seed), allow_empty=True)
    assert decode(D) == [tuple(r) for r in records]
    assert np.all(D.values.sum(axis=1) == schema.n_variables)
    for block in schema.blocks():
        assert np.all(D.values[:, block].sum(axis=1) == 1)
    assert column_counts(D).sum() == D.n_rows * schema.n_variables


def test_adjust_hand_value():
    schema = CategoricalSchema.from_dict({"A": ["p", "q"], "B": ["r", "s"]})
    D = encode([["p", "r"]] * 4 + [["q", "s"]] * 2, schema)
    Dc = adjust(D)
    assert Dc.values[0, 0] == pytest.approx(0.353553, abs=1e-6)
    assert Dc.values[0, 1] == 0.0
    assert Dc.values[4, 1] == pytest.approx(1 / math.sqrt(2 * 2))


def test_adjust_minimum_for_universal_modality():
    schema = CategoricalSchema.from_dict({"A": ["all"], "B": ["r", "s", "t"]})
    D = encode([["all", "r"], ["all", "s"], ["all", "s"], ["all", "t"]], schema)
    Dc = adjust(D)
    nonzero = [Dc.values[:, j][Dc.values[:, j] > 0][0] for j in range(4)]
    assert nonzero[0] == min(nonzero) == pytest.approx(1 / math.sqrt(2 * 4))


def test_empty_modality_policy(toy_schema):
    D = encode([["a1", "b1"], ["a2", "b3"]], toy_schema)
    with pytest.raises(EmptyModalityError) as err:
        adjust(D)
    assert err.value.modality == "B.b2"
    Dc = adjust(D, "drop")
    assert Dc.dropped == ["B.b2"]
    assert Dc.names == ["A.a1", "A.a2", "B.b1", "B.b3"]
    assert Dc.columns.tolist() == [0, 1, 2, 4]
    assert Dc.values.shape == (2, 4)


def test_column_and_row_energy(rng):
    for _ in range(50):
        schema, _, D = random_table(rng)
        Dc = adjust(D)
        K = schema.n_variables
        assert np.allclose((Dc.values ** 2).sum(axis=0), 1.0 / K, atol=1e-12)
        counts = column_counts(D)
        for i in range(D.n_rows):
            held = np.flatnonzero(D.values[i])
            assert (Dc.values[i] ** 2).sum() == pytest.approx((1.0 / K) * (1.0 / counts[held]).sum(), abs=1e-12)


def test_adjust_is_stable_when_reapplied(rng):
    schema, _, D = random_table(rng)
    a = adjust(D)
    b = adjust(D)
    assert a.values.tobytes() == b.values.tobytes()
    # the adjustment only depends on which entries are 1
    rebuilt = (a.values > 0).astype(int)
    assert np.array_equal(rebuilt, D.values)


def test_rarest_examples():
    schema = CategoricalSchema.from_dict({"A": ["a", "b"], "B": ["c", "d"], "C": ["e", "f"]})
    records = [["a", "c", "e"]] * 100 + [["b", "d", "f"]] * 3
    Dc = adjust(encode(records, schema))
    assert rarest_modality(Dc, 0) == 0  # all three count 100, smallest index wins
    assert rarest_modality(Dc, 100) == 1
    records = [["a", "c", "e"]] * 97 + [["b", "c", "e"]] * 3 + [["a", "d", "f"]] * 47
    Dc = adjust(encode(records, schema))
    # row 97 holds b (3), c (100), e (100)
    assert rarest_modality(Dc, 97) == 1


def test_rarest_tie_break():
    schema = CategoricalSchema.from_dict({"A": ["a", "b"], "B": ["c", "d"]})
    records = [["a", "c"]] * 3 + [["b", "d"]] * 3
    Dc = adjust(encode(records, schema))
    assert rarest_modality(Dc, 0) == 0
    assert rarest_modality(Dc, 5) == 1


def test_rarest_matches_argmax_of_adjusted_row(rng):
    for _ in range(200):
        _, _, D = random_table(rng)
        Dc = adjust(D)
        vectorised = rarest_modalities(Dc)
        for i in range(D.n_rows):
            row = list(Dc.values[i])
            best = max(row)
            expected = row.index(best)
            assert rarest_modality(Dc, i) == expected == vectorised[i]
