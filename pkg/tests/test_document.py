import json

import numpy as np
import pytest

from bundletk import (
    DimensionMismatch,
    MissingEntity,
    NonFiniteEntry,
    SchemaError,
    parse_document,
    serialize_document,
    verify_groupoid,
)


def _minimal(extra=None):
    doc = {
        "version": "1",
        "fiber": {"dim": 2},
        "paths": [{"name": "p", "params": [0.0, 1.0], "labels": ["a", "b"]}],
        "factors": [
            {
                "name": "F",
                "path": "p",
                "matrices": [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]],
            }
        ],
    }
    if extra:
        doc.update(extra)
    return doc


def test_minimal_document_parses_and_verifies():
    doc = parse_document(json.dumps(_minimal()))
    report = verify_groupoid(doc.transport("F"), 1e-12)
    assert report.passed
    assert report.max_residual == 0.0


def test_wrong_matrix_shape_names_entry():
    raw = _minimal()
    raw["factors"][0]["matrices"][0] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    with pytest.raises(DimensionMismatch) as err:
        parse_document(json.dumps(raw))
    assert "factors[0]" in str(err.value)


def test_nan_entry_rejected():
    text = json.dumps(_minimal()).replace('[1.0, 0.0]', '[NaN, 0.0]', 1)
    with pytest.raises(NonFiniteEntry):
        parse_document(text)


def test_unknown_path_reference():
    raw = _minimal()
    raw["factors"][0]["path"] = "nope"
    with pytest.raises(SchemaError):
        parse_document(json.dumps(raw))


def test_family_length_mismatch():
    raw = _minimal()
    raw["factors"][0]["matrices"].append([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(DimensionMismatch):
        parse_document(json.dumps(raw))


def test_unsupported_version():
    raw = _minimal()
    raw["version"] = "0"
    with pytest.raises(SchemaError):
        parse_document(json.dumps(raw))


def test_invalid_json_is_schema_error():
    with pytest.raises(SchemaError):
        parse_document(b"{not json")


def test_missing_entity_lookup():
    doc = parse_document(json.dumps(_minimal()))
    with pytest.raises(MissingEntity):
        doc.factor("G")


def test_round_trip_is_identity():
    rng = np.random.default_rng(0)
    raw = _minimal(
        {
            "metrics": [
                {
                    "name": "G",
                    "path": "p",
                    "kind": "symmetric",
                    "matrices": [
                        (np.eye(2) + 0.1 * np.ones((2, 2))).tolist(),
                        (np.eye(2) * float(rng.uniform(1, 3))).tolist(),
                    ],
                }
            ],
            "sections": [
                {"name": "A", "path": "p", "vectors": [[0.25, -1.5], [2.0, 0.125]]}
            ],
            "tolerances": {"default": 1e-9},
        }
    )
    text1 = serialize_document(parse_document(json.dumps(raw)))
    text2 = serialize_document(parse_document(text1))
    assert text1 == text2


def test_seventeen_digit_floats_preserved():
    raw = _minimal()
    value = 0.1234567890123456789
    raw["factors"][0]["matrices"][0][0][0] = value
    text = serialize_document(parse_document(json.dumps(raw)))
    reparsed = parse_document(text)
    assert reparsed.factors["F"].matrices[0][0][0] == value


def test_morphism_entry_round_trip():
    raw = _minimal(
        {
            "morphisms": [
                {
                    "name": "M",
                    "path": "p",
                    "base": [0, 1],
                    "matrices": [
                        [[1.0, 0.0], [0.0, 1.0]],
                        [[0.0, 1.0], [-1.0, 0.0]],
                    ],
                }
            ]
        }
    )
    doc = parse_document(json.dumps(raw))
    m = doc.morphism("M")
    assert m.base(0) == 0 and m.base(1) == 1
    text1 = serialize_document(doc)
    assert text1 == serialize_document(parse_document(text1))


def test_bad_base_index_rejected():
    raw = _minimal(
        {
            "morphisms": [
                {
                    "name": "M",
                    "path": "p",
                    "base": [0, 7],
                    "matrices": [
                        [[1.0, 0.0], [0.0, 1.0]],
                        [[1.0, 0.0], [0.0, 1.0]],
                    ],
                }
            ]
        }
    )
    with pytest.raises(SchemaError):
        parse_document(json.dumps(raw))


def test_nonincreasing_params_rejected():
    raw = _minimal()
    raw["paths"][0]["params"] = [1.0, 0.0]
    with pytest.raises(SchemaError):
        parse_document(json.dumps(raw))
