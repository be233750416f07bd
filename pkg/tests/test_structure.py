import itertools

import numpy as np
import pytest
from hypothesis import given

from sici.core import BINARY, Cpt, VariableDecl
from sici.errors import AmbientViolationError, ArgumentError, CycleError
from sici.gates import identity_gate, or_gate
from sici.generators import random_ambient, random_dag, random_spec
from sici.model import Ici, LocalSpec, LsSici, NoisyOr, Scm
from sici.oracle import d_separated_by_paths
from sici.structure import CiStatement, Dag, d_separated, induced_dag, verify_ci_statements
from sici.surjection import Surjection

from conftest import seeds

FIG1_EDGES = [("X1", "X4"), ("X2", "X4"), ("X3", "X4"), ("X3", "X5"), ("X4", "X5"), ("X3", "X6"), ("X5", "X6")]
FIG1 = Dag([f"X{i}" for i in range(1, 7)], FIG1_EDGES)
Y = VariableDecl("Y", BINARY, "child")
EYE = Cpt((BINARY,), BINARY, np.eye(2))


def xs(n):
    return tuple(VariableDecl(f"X{i + 1}", BINARY) for i in range(n))


def ici(n):
    return LocalSpec(Y, xs(n), Ici((EYE,) * n, or_gate((BINARY,) * n)))


def test_dag_validation():
    with pytest.raises(CycleError):
        Dag(["a", "b"], [("a", "b"), ("b", "a")])
    with pytest.raises(ArgumentError):
        Dag(["a"], [("a", "b")])
    assert FIG1.parents["X5"] == ["X3", "X4"]


def test_fig1_examples():
    assert d_separated(FIG1, {"X1"}, {"X2"}, set())
    assert not d_separated(FIG1, {"X1"}, {"X2"}, {"X4"})
    # descendant of the collider also opens it
    assert not d_separated(FIG1, {"X1"}, {"X2"}, {"X6"})


def test_overlapping_sets_rejected():
    with pytest.raises(ArgumentError):
        d_separated(FIG1, {"X1"}, {"X1"}, set())
    with pytest.raises(ArgumentError):
        d_separated(FIG1, {"X1"}, {"X2"}, {"X2"})
    with pytest.raises(ArgumentError):
        d_separated(FIG1, {"X1"}, {"nope"}, set())


def test_induced_dag_examples():
    assert set(induced_dag(ici(3)).edges) == {("X1", "M1"), ("X2", "M2"), ("X3", "M3"),
                                              ("M1", "Y"), ("M2", "Y"), ("M3", "Y")}
    phi = Surjection((0, 0, 0, 1))
    lower = Cpt((BINARY, BINARY), BINARY, np.full((4, 2), 0.5))
    ls = LocalSpec(Y, xs(4), LsSici(phi, (or_gate((BINARY,) * 3), identity_gate(BINARY)), lower))
    edges = set(induced_dag(ls).edges)
    assert {("X1", "M1"), ("X2", "M1"), ("X3", "M1"), ("X4", "M2")} <= edges
    scm = LocalSpec(Y, xs(3), Scm(or_gate((BINARY,) * 3), EYE))
    assert set(induced_dag(scm).edges) == {("X1", "M"), ("X2", "M"), ("X3", "M"), ("M", "Y")}
    nor = induced_dag(LocalSpec(Y, xs(2), NoisyOr((0.1, 0.2))))
    assert ("I1", "M1") in nor.edges and ("I2", "M2") in nor.edges


def test_ici_dsep_statement_2():
    g = induced_dag(ici(4))
    assert d_separated(g, {"Y"}, {"X1", "X2", "X3", "X4"}, {"M1", "M2", "M3", "M4"})


def test_verify_ici_no_ambient():
    report = verify_ci_statements(ici(3))
    status = {label: r.status for label, r in report.by_label().items()}
    assert status == {"(2)": "pass", "(3)": "vacuous", "(4)": "pass", "(5)": "pass"}
    assert report.ok


def test_verify_fig6_statement_12():
    phi = Surjection((0, 0, 0, 1, 2))
    lower = Cpt((BINARY,) * 3, BINARY, np.full((8, 2), 0.5))
    gates = (or_gate((BINARY,) * 3), identity_gate(BINARY), identity_gate(BINARY))
    spec = LocalSpec(Y, xs(5), LsSici(phi, gates, lower))
    r12 = verify_ci_statements(spec).by_label()["(12)"]
    first = r12.instances[0][0]
    assert first.a == {"M1"} and first.b == {"X4", "X5"} and first.z == {"X1", "X2", "X3"}
    assert r12.status == "pass"


def test_adversarial_graphs():
    spec = ici(3)
    g = induced_dag(spec)
    direct = g.with_edges([("X1", "Y")])
    assert verify_ci_statements(spec, dag=direct).by_label()["(2)"].status == "fail"
    mech = g.with_edges([("M1", "M2")])
    assert verify_ci_statements(spec, dag=mech).by_label()["(4)"].status == "fail"
    amb = g.with_edges([("V1", "M1"), ("V1", "X2")], ["V1"])
    assert verify_ci_statements(spec, dag=amb).by_label()["(3)"].status == "fail"


def test_ambient_validation():
    spec = ici(2)
    with pytest.raises(AmbientViolationError):
        induced_dag(spec, Dag(["V", "M1"], [("V", "M1")]))
    with pytest.raises(AmbientViolationError):
        induced_dag(spec, Dag(["V", "Y"], [("V", "Y")]))
    g = induced_dag(spec, Dag(["X1", "X2", "Y"], [("X1", "Y"), ("X1", "X2")]))
    assert ("X1", "Y") not in g.edges and ("X1", "X2") in g.edges


@given(seeds)
def test_generated_structures_pass(seed):
    rng = np.random.default_rng(seed)
    variant = ["ICI", "PICI", "LS_SICI", "US_SICI", "DS_SICI", "SCM", "NOISY_OR", "SURJECTIVE_NOISY_OR"][
        int(rng.integers(0, 8))]
    spec = random_spec(variant, rng, max_parents=6)
    report = verify_ci_statements(spec, random_ambient(spec, rng))
    assert report.ok, report.lines()


def _all_triples(nodes):
    for labels in itertools.product(range(4), repeat=len(nodes)):
        yield tuple({v for v, l in zip(nodes, labels) if l == k} for k in (1, 2, 3))


@given(seeds)
def test_reachability_matches_path_enumeration_on_sets(seed):
    rng = np.random.default_rng(seed)
    g = random_dag(int(rng.integers(2, 6)), rng, edge_prob=float(rng.uniform(0.2, 0.7)))
    for a, b, z in _all_triples(g.nodes):
        assert d_separated(g, a, b, z) == d_separated_by_paths(g, a, b, z)


@given(seeds)
def test_symmetry(seed):
    rng = np.random.default_rng(seed)
    g = random_dag(6, rng)
    for a, b, z in itertools.islice(_all_triples(g.nodes), 0, None, 7):
        assert d_separated(g, a, b, z) == d_separated(g, b, a, z)


def test_ci_statement_sets_disjoint():
    with pytest.raises(ArgumentError):
        CiStatement({"a"}, {"a"}, set())
