"""Serialization round trips, float fidelity, and schema strictness."""

import json
import math

import numpy as np
import pytest

from shearcase import serialize
from shearcase.cert import Certificate
from shearcase.errors import ConfigError
from shearcase.torus_dynamics import (
    FourierField,
    FourierTerm,
    ProgramStep,
    ShearingMap,
    ShearingProfile,
    ShearingProgram,
    grid_points,
)


def test_float_formatting_round_trips():
    specials = [0.1, 1 / 3, math.pi, 1e-300, 123456789.123456789, 2.0]
    for x in specials:
        assert float(serialize.format_float(x)) == x
    assert serialize.format_float(2.0) == "2.0"
    with pytest.raises(ValueError):
        serialize.format_float(float("nan"))


def test_dumps_deterministic_and_parseable():
    doc = {"b": [1.5, {"x": math.pi}], "a": 3, "flag": True, "none": None}
    text1 = serialize.dumps(doc)
    text2 = serialize.dumps(doc)
    assert text1 == text2
    parsed = json.loads(text1)
    assert parsed["b"][1]["x"] == math.pi


def test_program_round_trip(tmp_path):
    prog = ShearingProgram([
        ProgramStep(ShearingMap((1, 0), (0, 1), ShearingProfile(sine=((1, 0.25),))),
                    0.5, 2.0),
        ProgramStep(ShearingMap((0, 1), (1, 0), ShearingProfile(sine=((2, -0.7),))),
                    0.5, 1.0),
    ])
    doc = serialize.program_to_json(prog)
    path = tmp_path / "program.json"
    serialize.write_json(path, doc)
    loaded = serialize.program_from_json(serialize.read_json(path))
    pts = np.random.default_rng(0).uniform(0, 2 * math.pi, (20, 2))
    assert np.array_equal(loaded(0.73, pts), prog(0.73, pts))


def test_fourier_field_round_trip():
    field = FourierField((FourierTerm((1, 2), (-0.4, 0.2), (0.0, 0.0)),))
    doc = serialize.fourier_field_to_json(field)
    back = serialize.fourier_field_from_json(doc)
    pts = grid_points(16)
    assert np.allclose(field.evaluate(pts), back.evaluate(pts))


def test_certificate_round_trip():
    cert = Certificate("trefoil", 5, ((1, 1, 0, 1), (1, 0, 4, 1)))
    doc = serialize.certificate_to_json(cert)
    assert doc["p"] == "5"  # decimal string on the wire
    back = serialize.certificate_from_json(doc)
    assert back == cert


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        serialize.knot_spec_from_json({"kind": "torus", "p": 2, "q": 3, "extra": 1})
    with pytest.raises(ConfigError):
        serialize.presentation_from_json({"generators": 1, "relators": [],
                                          "bogus": True})
    with pytest.raises(ConfigError):
        serialize.certificate_from_json({"presentation_id": "x", "p": "abc",
                                         "images": []})


def test_csv_writer(tmp_path):
    path = tmp_path / "rows.csv"
    serialize.write_csv(path, ["a", "b"], [(1, 0.1), (2, 1 / 3)])
    lines = path.read_text().splitlines()
    assert lines[0] == "a,b"
    assert float(lines[1].split(",")[1]) == 0.1
    assert float(lines[2].split(",")[1]) == 1 / 3
