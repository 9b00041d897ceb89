import json
from dataclasses import replace

import numpy as np
import pytest

from sceig.exceptions import DimensionMismatch, ParseError
from sceig.probfile import parse_problem, write_problem

from conftest import make_problem


def test_toy_round_trip_bit_exact(toy):
    data = write_problem(toy)
    back = parse_problem(data)
    assert back.n_basis == toy.n_basis and back.k == toy.k
    assert np.array_equal(back.overlap, toy.overlap)
    assert np.array_equal(back.core_hamiltonian, toy.core_hamiltonian)
    assert np.array_equal(back.eri, toy.eri)
    assert back.nuclear_repulsion == toy.nuclear_repulsion
    assert back.label == toy.label


def test_round_trip_awkward_magnitudes():
    prob = make_problem(seed=70, n=3, k=1, interaction=0.3)
    prob = replace(prob, nuclear_repulsion=1.2345678901234567e-13,
                   reference_energy=-75.98398947819832, label="awkward")
    scaled = replace(prob, eri=np.asarray(prob.eri) * 1e-7)
    data = write_problem(scaled)
    back = parse_problem(data)
    assert np.array_equal(back.eri, scaled.eri)
    assert back.reference_energy == scaled.reference_energy
    assert back.nuclear_repulsion == scaled.nuclear_repulsion


def test_write_is_deterministic(toy):
    assert write_problem(toy) == write_problem(toy)


def test_reference_energy_omitted_when_absent(toy):
    doc = json.loads(write_problem(toy))
    assert "reference_energy" not in doc
    with_ref = replace(toy, reference_energy=-1.5)
    doc2 = json.loads(write_problem(with_ref))
    assert doc2["reference_energy"] == -1.5


def test_parse_rejects_truncated(toy):
    data = write_problem(toy)[:100]
    with pytest.raises(ParseError):
        parse_problem(data)


def test_parse_rejects_wrong_format():
    with pytest.raises(ParseError, match="format"):
        parse_problem(b'{"format": "something-else", "version": 1}')


def test_parse_rejects_unknown_version(toy):
    doc = json.loads(write_problem(toy))
    doc["version"] = 99
    with pytest.raises(ParseError, match="version"):
        parse_problem(json.dumps(doc))


def test_parse_rejects_missing_field(toy):
    doc = json.loads(write_problem(toy))
    del doc["h"]
    with pytest.raises(ParseError, match="h"):
        parse_problem(json.dumps(doc))


def test_parse_wrong_eri_length(toy):
    doc = json.loads(write_problem(toy))
    doc["eri"] = doc["eri"][:-1]
    with pytest.raises(DimensionMismatch) as err:
        parse_problem(json.dumps(doc))
    assert err.value.expected == 16
    assert err.value.actual == 15


def test_parse_validates(toy):
    doc = json.loads(write_problem(toy))
    doc["k"] = 5
    from sceig.exceptions import BadOccupation

    with pytest.raises(BadOccupation):
        parse_problem(json.dumps(doc))


def test_seventeen_digit_serialization(toy):
    text = write_problem(replace(toy, reference_energy=-1.8310386546031199)).decode()
    assert "-1.8310386546031199" in text
