import numpy as np
import pytest

from kdisjmap.disjunctive import CategoricalSchema, encode


def random_table(rng, max_rows=30, max_vars=5, max_mods=4, allow_empty=False):
    """Random schema and records; every modality is chosen at least once unless allow_empty."""
    K = int(rng.integers(1, max_vars + 1))
    sizes = rng.integers(1, max_mods + 1, size=K)
    schema = CategoricalSchema.from_dict(
        {f"X{k}": [f"m{k}_{m}" for m in range(s)] for k, s in enumerate(sizes)})
    N = int(rng.integers(max(sizes.max(), 1), max_rows + 1))
    picks = np.column_stack([rng.integers(0, s, size=N) for s in sizes])
    if not allow_empty:
        for k, s in enumerate(sizes):
            picks[:s, k] = np.arange(s)
            rng.shuffle(picks[:, k])
    records = [[schema.variables[k].modalities[picks[i, k]] for k in range(K)] for i in range(N)]
    return schema, records, encode(records, schema)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def toy_schema():
    return CategoricalSchema.from_dict(
        {"A": ["a1", "a2"], "B": ["b1", "b2", "b3"]}, quantitative=["Q"], id_column="ID")


def pytest_terminal_summary(terminalreporter):
    import sys

    for module in list(sys.modules.values()):
        results = getattr(module, "ACCEPTANCE_RESULTS", None)
        if isinstance(results, dict) and results:
            terminalreporter.section("acceptance criteria")
            for number in sorted(results):
                terminalreporter.write_line(results[number])
            break
