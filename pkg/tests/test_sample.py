from fractions import Fraction

import numpy as np
import pytest

from medid.errors import ModelError
from medid.estimand import parse_estimand
from medid.sample import Dataset, fit_frequency_joint, plugin_estimate, sample_dataset

from conftest import roles_of


def test_determinism(toy1):
    a = sample_dataset(toy1, 1000, 7)
    b = sample_dataset(toy1, 1000, 7)
    assert np.array_equal(a.codes, b.codes)
    assert a.to_csv() == b.to_csv()


def test_seed_sensitivity(toy1):
    a = sample_dataset(toy1, 1000, 7)
    b = sample_dataset(toy1, 1000, 8)
    assert not np.array_equal(a.codes, b.codes)


def test_prefix_property(toy1):
    """Row i depends only on (seed, i): a longer run extends a shorter one."""
    short = sample_dataset(toy1, 100, 3)
    long = sample_dataset(toy1, 1000, 3)
    assert np.array_equal(long.codes[:100], short.codes)


def test_csv_roundtrip(toy3):
    data = sample_dataset(toy3, 500, 11)
    back = Dataset.from_csv(data.to_csv(), data.variables)
    assert np.array_equal(back.codes, data.codes)


def test_csv_rejects_bad_rows(toy1):
    data = sample_dataset(toy1, 5, 1)
    text = data.to_csv().replace("\n0,", "\n9,", 1)
    with pytest.raises(ModelError):
        Dataset.from_csv(text, data.variables)


def test_frequency_joint_exact(toy1):
    data = sample_dataset(toy1, 400, 5)
    joint = fit_frequency_joint(data)
    assert joint.mass == 1
    for p in joint.entries.values():
        assert isinstance(p, Fraction) and p.denominator in {
            d for d in range(1, 401) if 400 % d == 0
        }


def test_plugin_estimate_close(toy1):
    data = sample_dataset(toy1, 50000, 42)
    value, _ = plugin_estimate(data, parse_estimand("TE"), roles_of(toy1))
    assert abs(value - Fraction(5, 16)) < Fraction(1, 50)
