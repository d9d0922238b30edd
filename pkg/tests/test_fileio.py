import json

import numpy as np
import pytest

from rndcalc.conditional import binary_symmetric_channel
from rndcalc.errors import DomainError
from rndcalc.fileio import (
    ParseError,
    bundle_to_dict,
    load_bundle,
    load_density,
    load_kernel,
    load_measure,
    measure_from_dict,
    read_json,
)
from rndcalc.measure import ProbabilityMeasure, signed


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return path


def test_measure_round_trip(tmp_path):
    path = write(tmp_path, "m.json", {"space": ["a", "b"], "weights": [0.25, 0.75], "kind": "probability"})
    m = load_measure(path)
    assert isinstance(m, ProbabilityMeasure)
    assert m.space.labels == ("a", "b")


def test_probability_renormalized():
    m = measure_from_dict({"space": ["a", "b"], "weights": [0.25, 0.75 + 5e-10], "kind": "probability"})
    assert m.weights.sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize(
    "obj, error",
    [
        ({"space": ["a", "b"], "weights": [0.5, 0.6], "kind": "probability"}, DomainError),
        ({"space": ["a", "b"], "weights": [1.5, -0.5], "kind": "probability"}, DomainError),
        ({"space": ["a", "b"], "weights": [0.5, "x"]}, ParseError),
        ({"space": ["a"], "weights": [1.0], "kind": "fuzzy"}, ParseError),
        ({"weights": [1.0]}, ParseError),
    ],
)
def test_measure_rejections(obj, error):
    with pytest.raises(error):
        measure_from_dict(obj)


@pytest.mark.parametrize("text", ['{"space": ["a"], "weights": [NaN]}', '{"space": ["a"], "weights": [Infinity]}', "{oops"])
def test_non_finite_and_malformed_json(tmp_path, text):
    with pytest.raises(ParseError):
        load_measure(write(tmp_path, "bad.json", text))


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        read_json(tmp_path / "nope.json")


def test_kernel_and_density(tmp_path):
    K = load_kernel(write(tmp_path, "k.json", binary_symmetric_channel(0.25).to_dict()))
    np.testing.assert_array_equal(K.matrix, [[0.75, 0.25], [0.25, 0.75]])
    samples = [0.0, 1.0, 2.0]
    d = load_density(write(tmp_path, "d.json", {"a": 0, "b": 1, "n": 3, "samples": samples}))
    assert d.n == 3
    with pytest.raises(ParseError):
        load_density(write(tmp_path, "d2.json", {"a": 0, "b": 1, "n": 5, "samples": samples}))


def test_bundle(tmp_path):
    p = write(tmp_path, "p.json", {"space": ["0", "1"], "weights": [0.5, 0.5]})
    extra = write(tmp_path, "b.json", bundle_to_dict(measures=[signed([0.2, 0.8])], c=3.0, f=np.array([1.0, 2.0])))
    b = load_bundle(p, extra)
    assert len(b.measures) == 2 and b.c == 3.0 and b.f == [1.0, 2.0]
    with pytest.raises(ParseError):
        load_bundle(write(tmp_path, "u.json", {"mystery": 1}))
