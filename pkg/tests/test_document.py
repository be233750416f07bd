import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sici.compiler import compile_spec
from sici.document import (
    cpt_from_csv, parse_ambient, parse_document, parse_spec, read_cpt, serialize_spec,
    write_cpt,
)
from sici.errors import DocumentError, GateSyntaxError, NonSurjectiveError, ShapeError
from sici.generators import random_spec
from sici.model import VARIANTS

from conftest import seeds

SPECS = Path(__file__).resolve().parent.parent / "specs"
CORPUS = sorted(p for p in SPECS.glob("*.json") if p.name != "fig1_dag.json")


def minimal_noisy_or():
    return {
        "schema_version": "1.0",
        "child": {"name": "Y", "states": ["0", "1"]},
        "parents": [{"name": f"X{i}", "states": ["0", "1"]} for i in (1, 2, 3)],
        "variant": "NOISY_OR",
        "payload": {"inhibitor_probs": {"X1": 0.1, "X2": 0.2, "X3": 0.3}},
    }


def ls_doc():
    return {
        "schema_version": "1.0",
        "child": {"name": "Y", "states": ["0", "1"]},
        "parents": [{"name": f"X{i}", "states": ["0", "1"]} for i in (1, 2, 3)],
        "variant": "LS_SICI",
        "mechanisms": [{"name": "m1", "states": ["0", "1"]}, {"name": "m2", "states": ["0", "1"]}],
        "payload": {
            "surjection": {"m1": ["X1", "X2"], "m2": ["X3"]},
            "block_gates": {"m1": "or(X1, X2)", "m2": "X3"},
            "lower_cpt": [[0.9, 0.1], [0.5, 0.5], [0.4, 0.6], [0.1, 0.9]],
        },
    }


def test_minimal_noisy_or():
    spec = parse_spec(json.dumps(minimal_noisy_or()))
    assert spec.tag == "NOISY_OR" and spec.payload.inhibitor_probs == (0.1, 0.2, 0.3)


def test_missing_mechanism_named():
    doc = ls_doc()
    del doc["payload"]["surjection"]["m2"]
    doc["payload"]["surjection"]["m1"].append("X3")
    with pytest.raises(NonSurjectiveError, match="m2"):
        parse_spec(json.dumps(doc))


def test_row_width_error_path():
    doc = ls_doc()
    doc["payload"]["lower_cpt"][2] = [0.2, 0.3, 0.5]
    with pytest.raises(ShapeError) as exc:
        parse_spec(json.dumps(doc))
    assert exc.value.path == "payload.lower_cpt[2]"


@pytest.mark.parametrize("mutate, code", [
    (lambda d: d.update(variant="NOISY_AND"), "E_UNKNOWN_VARIANT"),
    (lambda d: d.update(schema_version="9"), "E_SCHEMA_VERSION"),
    (lambda d: d.pop("child"), "E_MISSING_FIELD"),
    (lambda d: d["payload"]["surjection"].update(m2=["X9"]), "E_UNKNOWN_NAME"),
    (lambda d: d["payload"]["surjection"].update(m2=["X3", "X1"]), "E_BAD_FIELD"),
])
def test_document_error_codes(mutate, code):
    doc = ls_doc()
    mutate(doc)
    with pytest.raises(DocumentError) as exc:
        parse_spec(json.dumps(doc))
    assert exc.value.code == code


def test_syntax_error_has_line():
    with pytest.raises(DocumentError, match="line 2") as exc:
        parse_spec('{\n  "schema_version": }')
    assert exc.value.code == "E_SYNTAX"


def test_gate_error_has_path():
    doc = ls_doc()
    doc["payload"]["block_gates"]["m1"] = "or(X1,"
    with pytest.raises(GateSyntaxError) as exc:
        parse_spec(json.dumps(doc))
    assert exc.value.path == "payload.block_gates.m1"


def test_distinct_codes():
    codes = set()
    for mutate in (lambda d: d.update(variant="X"),):
        doc = ls_doc()
        mutate(doc)
        try:
            parse_spec(json.dumps(doc))
        except DocumentError as exc:
            codes.add(exc.code)
    assert codes == {"E_UNKNOWN_VARIANT"}
    assert len({NonSurjectiveError.code, ShapeError.code, GateSyntaxError.code, DocumentError.code}) == 4


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_corpus_round_trip(path):
    text = path.read_text()
    doc = parse_document(text)
    assert serialize_spec(doc) == text
    assert parse_document(serialize_spec(doc)) == doc


@given(seeds, st.sampled_from(VARIANTS))
def test_random_round_trip(seed, variant):
    spec = random_spec(variant, np.random.default_rng(seed))
    assert parse_spec(serialize_spec(spec)) == spec


def test_ambient_round_trip_and_file():
    doc = parse_document((SPECS / "fig1_ambient.json").read_text())
    assert doc.has_ambient and "X1" in doc.ambient_dag().nodes
    g = parse_ambient((SPECS / "fig1_dag.json").read_text())
    assert len(g.edges) == 7


@given(seeds, st.sampled_from(VARIANTS))
def test_cpt_files_round_trip(seed, variant):
    spec = random_spec(variant, np.random.default_rng(seed))
    cpt = compile_spec(spec)
    names = [p.name for p in spec.parents]
    for fmt in ("csv", "json"):
        back = read_cpt(write_cpt(cpt, names, "Y", fmt))
        assert back.cpt == cpt and back.parent_names == tuple(names) and back.child_name == "Y"


def test_csv_shape_and_formatting():
    spec = parse_spec((SPECS / "fig7_surjective_noisy_or.json").read_text())
    text = write_cpt(compile_spec(spec), [p.name for p in spec.parents], "Y", "csv")
    lines = text.splitlines()
    assert lines[0] == "X1,X2,X3,X4,X5,X6,Y=0,Y=1"
    assert len(lines) == 65
    assert lines[2].startswith("0,0,0,0,0,1,")


def test_csv_rejects_non_canonical_order():
    with pytest.raises(DocumentError):
        cpt_from_csv("A,B,Y=0,Y=1\n0,0,0.5,0.5\n0,1,0.5,0.5\n1,1,0.5,0.5\n1,0,0.5,0.5\n")
