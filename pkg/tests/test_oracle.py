import numpy as np
import pytest
from hypothesis import given, strategies as st

from sici.compiler import compile_spec
from sici.core import BINARY, Cpt, VariableDecl, marginal_cpt
from sici.errors import ShapeError, SizeGuardError
from sici.gates import gate_to_cpt, or_gate
from sici.generators import random_gate, random_spec
from sici.model import Ici, LocalSpec, LsSici, NoisyOr, Scm, VARIANTS
from sici.oracle import MiniBn, compare_cpts, joint_distribution, oracle_cpt, spec_to_mini_bn

from conftest import seeds

Y = VariableDecl("Y", BINARY, "child")


def xs(n):
    return tuple(VariableDecl(f"X{i + 1}", BINARY) for i in range(n))


def test_mini_bn_topologies():
    eye = Cpt((BINARY,), BINARY, np.eye(2))
    assert len(spec_to_mini_bn(LocalSpec(Y, xs(3), Ici((eye,) * 3, or_gate((BINARY,) * 3)))).nodes) == 7
    bn = spec_to_mini_bn(LocalSpec(Y, xs(3), NoisyOr((0.1, 0.2, 0.3))))
    assert len(bn.nodes) == 10 and len(bn.kind_names("inhibitor")) == 3
    for n in (1, 4):
        scm = LocalSpec(Y, xs(n), Scm(or_gate((BINARY,) * n), eye))
        assert len(spec_to_mini_bn(scm).nodes) == n + 2


def test_joint_examples():
    a = VariableDecl("A", BINARY)
    j = joint_distribution(MiniBn((a,), {"A": ()}, {"A": marginal_cpt(BINARY, [0.3, 0.7])}))
    assert j.table.tolist() == [0.3, 0.7]
    b = VariableDecl("B", BINARY)
    u = marginal_cpt(BINARY, [0.5, 0.5])
    j = joint_distribution(MiniBn((a, b), {"A": (), "B": ()}, {"A": u, "B": u}))
    assert j.table.ravel().tolist() == [0.25] * 4


def test_mini_bn_rejects_bad_order():
    a, b = VariableDecl("A", BINARY), VariableDecl("B", BINARY)
    eye = Cpt((BINARY,), BINARY, np.eye(2))
    with pytest.raises(Exception):
        MiniBn((b, a), {"A": (), "B": ("A",)}, {"A": marginal_cpt(BINARY, [0.5, 0.5]), "B": eye})


def test_noisy_or_oracle_row():
    out = oracle_cpt(LocalSpec(Y, xs(3), NoisyOr((0.1, 0.2, 0.3))))
    assert np.max(np.abs(out.row((1, 1, 0)) - [0.02, 0.98])) <= 1e-15


@given(seeds)
def test_deterministic_spec_gives_deterministic_oracle(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec("LS_SICI", rng)
    lower = gate_to_cpt(random_gate(spec.mechanism_spaces, spec.child.space, rng))
    det = LocalSpec(spec.child, spec.parents, LsSici(spec.phi, spec.payload.block_gates, lower))
    assert oracle_cpt(det).deterministic_flag


def test_compare_examples():
    a = Cpt((BINARY,), BINARY, [[0.5, 0.5], [0.2, 0.8]])
    assert compare_cpts(a, a) == (0.0, (0, 0))
    b = Cpt((BINARY,), BINARY, [[0.5, 0.5], [0.2, 0.801]])
    d, where = compare_cpts(a, b)
    assert d == pytest.approx(1e-3) and where == (1, 1)
    with pytest.raises(ShapeError):
        compare_cpts(a, Cpt((), BINARY, [[0.5, 0.5]]))


@given(seeds, st.sampled_from(VARIANTS))
def test_joint_mass_is_one(seed, variant):
    spec = random_spec(variant, np.random.default_rng(seed), max_parents=4)
    assert abs(joint_distribution(spec_to_mini_bn(spec)).total - 1.0) <= 1e-12


@given(seeds, st.sampled_from(VARIANTS))
def test_oracle_matches_compile(seed, variant):
    spec = random_spec(variant, np.random.default_rng(seed))
    d, _ = compare_cpts(compile_spec(spec), oracle_cpt(spec))
    assert d <= 1e-12


@given(seeds, st.sampled_from(VARIANTS))
def test_oracle_independent_of_parent_marginals(seed, variant):
    rng = np.random.default_rng(seed)
    spec = random_spec(variant, rng, max_parents=4)
    margs = [rng.dirichlet(np.ones(x.space.cardinality)) + 1e-3 for x in spec.parents]
    margs = [m / m.sum() for m in margs]
    d, _ = compare_cpts(oracle_cpt(spec), oracle_cpt(spec, margs))
    assert d <= 1e-12


def test_size_guard():
    with pytest.raises(SizeGuardError):
        oracle_cpt(LocalSpec(Y, xs(25), NoisyOr((0.5,) * 25)))


def test_hassall_oracle_without_pici_form():
    # non-uniform weights have no valid PICI network; the oracle falls back to a selector network
    from sici.model import HassallBinary
    spec = LocalSpec(Y, xs(3), HassallBinary((1.5, 1.0, 0.5)))
    out = oracle_cpt(spec)
    assert out.prob((1, 0, 1), 1) == pytest.approx(2 / 3, abs=1e-15)
    assert compare_cpts(out, compile_spec(spec))[0] <= 1e-12
