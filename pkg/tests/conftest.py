import numpy as np
import pytest

from sdckit import AttributeSchema, CategoricalKind, NumericKind
from sdckit.microdata import make_table


def build_numeric_table(seed=0, n=30, names=("a", "b", "c"), lo=0.0, hi=1.0):
    """Random all-numeric QI table on [lo, hi]^len(names)."""
    rng = np.random.default_rng(seed)
    schema = tuple(AttributeSchema(nm, "quasi_identifier", NumericKind(lo, hi)) for nm in names)
    return make_table(schema, {nm: rng.uniform(lo, hi, n) for nm in names})


def build_people_table(seed=0, n=30):
    """Mixed table: identifier, numeric and categorical QIs, a confidential attribute."""
    rng = np.random.default_rng(seed)
    zips = ("43007", "43008", "08001")
    diagnoses = ("flu", "cancer", "cold")
    schema = (
        AttributeSchema("pid", "identifier", CategoricalKind(tuple(f"p{i}" for i in range(n)))),
        AttributeSchema("age", "quasi_identifier", NumericKind(0, 100)),
        AttributeSchema("zip", "quasi_identifier", CategoricalKind(zips)),
        AttributeSchema("height", "quasi_identifier", NumericKind(120, 210)),
        AttributeSchema("diagnosis", "confidential", CategoricalKind(diagnoses)),
    )
    cols = {
        "pid": [f"p{i}" for i in range(n)],
        "age": rng.integers(0, 101, n).astype(float),
        "zip": rng.choice(zips, n),
        "height": rng.uniform(120, 210, n),
        "diagnosis": rng.choice(diagnoses, n),
    }
    return make_table(schema, cols)


@pytest.fixture
def numeric_table():
    return build_numeric_table()


@pytest.fixture
def people_table():
    return build_people_table()
