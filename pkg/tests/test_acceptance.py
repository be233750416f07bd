"""Acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line (visible in
``pytest -v`` output) and then asserts, so a failure is reported in both places.
Run ``python3 tests/test_acceptance.py`` to get only the summary lines.
"""

import itertools
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from sici.analysis import parameter_count, shared_row_groups
from sici.cli import main as cli_main
from sici.compiler import (
    compile_ds_sici, compile_hassall_binary, compile_ici, compile_ls_sici, compile_noisy_max,
    compile_noisy_or, compile_pici, compile_spec, compile_us_sici, deterministic_block_cpts, hassall_as_pici,
    hassall_table, noisy_or_explicit_inhibitors,
)
from sici.core import BINARY, ConfigIndexer, Cpt, VariableDecl, cpt_entry_count
from sici.document import parse_document, serialize_spec
from sici.errors import WeightRangeError
from sici.gates import gate_outputs, gate_to_cpt, identity_gate, or_gate
from sici.generators import random_ambient, random_cpt, random_dag, random_gate, random_spec
from sici.model import DsSici, Ici, LocalSpec, LsSici, NoisyMax, NoisyOr, Pici, SurjectiveNoisyOr, VARIANTS
from sici.oracle import compare_cpts, d_separated_by_paths, oracle_cpt
from sici.structure import Dag, d_separated, induced_dag, verify_ci_statements
from sici.surjection import Surjection

SPECS = Path(__file__).resolve().parent.parent / "specs"
Y = VariableDecl("Y", BINARY, "child")
RESULTS = {}


def xs(n, space=BINARY):
    return tuple(VariableDecl(f"X{i + 1}", space) for i in range(n))


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line)
    sys.stdout.flush()
    assert ok, line


@pytest.fixture(autouse=True)
def _show(capsys):
    # let the summary line through pytest's capture
    yield
    out = capsys.readouterr().out
    with capsys.disabled():
        sys.stdout.write(out)


def test_criterion_1_noisy_or_exact():
    p = (0.1, 0.2, 0.3)
    spec = LocalSpec(Y, xs(3), NoisyOr(p))
    out = compile_noisy_or(spec)
    configs = list(itertools.product(range(2), repeat=3))
    exact = all(out.prob(x, 0) == math.prod(pi for pi, xi in zip(p, x) if xi) for x in configs)
    complement = max(abs(out.prob(x, 1) - (1.0 - out.prob(x, 0))) for x in configs)
    diff, _ = compare_cpts(out, noisy_or_explicit_inhibitors(spec))
    ok = exact and complement <= 1e-15 and diff <= 1e-15
    report(1, ok, f"8 rows P(Y=0|x) exact={exact}, explicit inhibitors max diff {diff:.3g} (tol 1e-15)")


def _symbolic_row(w, x):
    return sum(wi for wi, xi in zip(w, x) if xi) / sum(w)


def test_criterion_2_table_rows():
    worst = 0.0
    checked = 0
    for w in [(1, 1, 1), (0.5, 0.5, 0.5), (2, 2, 2), (1.5, 1.0, 0.5)]:
        candidates = [
            compile_ls_sici(LocalSpec(Y, xs(3), LsSici(Surjection.identity(3), (identity_gate(BINARY),) * 3,
                                                       hassall_table(w)))),
            compile_hassall_binary(w),
        ]
        if max(w) == min(w):
            candidates.append(compile_pici(hassall_as_pici(w)))
            candidates.append(hassall_as_pici(w).payload.lower_cpt)
        for cpt in candidates:
            for x in itertools.product(range(2), repeat=3):
                worst = max(worst, abs(cpt.prob(x, 1) - _symbolic_row(w, x)), abs(cpt.prob(x, 0) - 1 + _symbolic_row(w, x)))
                checked += 1
    report(2, worst <= 1e-12, f"{checked} rows against (sum of active w)/W, max diff {worst:.3g} (tol 1e-12)")


def test_criterion_3_hassall_is_pici():
    rng = np.random.default_rng(3)
    worst, draws, rejected = 0.0, 0, 0
    while draws < 50:
        n = int(rng.integers(1, 6))
        # sum w = n with every w_i <= 1 admits only the all-ones vector up to scale
        w = np.full(n, rng.uniform(0.05, 5.0))
        diff, _ = compare_cpts(compile_pici(hassall_as_pici(w)), compile_hassall_binary(w))
        worst = max(worst, diff)
        draws += 1
        # non-uniform vectors normalise to some w_i > 1 and must be refused
        try:
            hassall_as_pici(rng.uniform(0.05, 5.0, size=max(n, 2)))
        except WeightRangeError:
            rejected += 1
    report(3, worst <= 1e-12 and rejected == 50,
           f"50 valid draws max diff {worst:.3g} (tol 1e-12); {rejected}/50 out-of-range draws refused")


def test_criterion_4_oracle_equivalence():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst, total, failures = 0.0, 0, []
    for variant in VARIANTS:
        for _ in range(200):
            spec = random_spec(variant, rng, max_parents=5, max_card=3)
            diff, _ = compare_cpts(compile_spec(spec), oracle_cpt(spec))
            worst = max(worst, diff)
            total += 1
            if diff > 1e-12:
                failures.append(variant)
    elapsed = time.perf_counter() - start
    report(4, not failures and elapsed < 60,
           f"{total} specs over {len(VARIANTS)} variants, max diff {worst:.3g} (tol 1e-12), "
           f"{len(failures)} failures, {elapsed:.1f}s (limit 60s)")


def _lattice_instance(kind, rng):
    if kind == "DS->LS":
        spec = random_spec("DS_SICI", rng)
        p = spec.payload
        gates = tuple(random_gate(spec.block_spaces(i), spec.mechanism_spaces[i], rng) for i in range(p.phi.m))
        ls = LocalSpec(spec.child, spec.parents, LsSici(p.phi, gates, p.lower_cpt))
        ds = LocalSpec(spec.child, spec.parents, DsSici(p.phi, deterministic_block_cpts(gates), p.lower_cpt))
        return compile_ds_sici(ds), compile_ls_sici(ls)
    if kind == "DS->US":
        spec = random_spec("US_SICI", rng)
        p = spec.payload
        ds = LocalSpec(spec.child, spec.parents, DsSici(p.phi, p.block_cpts, gate_to_cpt(p.lower_gate)))
        return compile_ds_sici(ds), compile_us_sici(spec)
    if kind == "US->ICI":
        n = int(rng.integers(1, 6))
        spec = random_spec("US_SICI", rng, phi=Surjection.identity(n))
        p = spec.payload
        return compile_us_sici(spec), compile_ici(LocalSpec(spec.child, spec.parents, Ici(p.block_cpts, p.lower_gate)))
    if kind == "DS->PICI":
        n = int(rng.integers(1, 6))
        spec = random_spec("DS_SICI", rng, phi=Surjection.identity(n))
        p = spec.payload
        return compile_ds_sici(spec), compile_pici(LocalSpec(spec.child, spec.parents, Pici(p.block_cpts, p.lower_cpt)))
    if kind == "PICI->ICI":
        spec = random_spec("ICI", rng)
        p = spec.payload
        return compile_pici(LocalSpec(spec.child, spec.parents, Pici(p.mechanism_cpts, gate_to_cpt(p.lower_gate)))), \
            compile_ici(spec)
    n = int(rng.integers(1, 6))
    cpts = tuple(random_cpt((BINARY,), BINARY, rng) for _ in range(n))
    return compile_noisy_max(LocalSpec(Y, xs(n), NoisyMax(cpts))), \
        compile_ici(LocalSpec(Y, xs(n), Ici(cpts, or_gate((BINARY,) * n))))


def test_criterion_5_reduction_lattice():
    rng = np.random.default_rng(5)
    kinds = ["DS->LS", "DS->US", "US->ICI", "DS->PICI", "PICI->ICI", "MAX->OR"]
    bad = {}
    for kind in kinds:
        bad[kind] = sum(a != b for a, b in (_lattice_instance(kind, rng) for _ in range(20)))
    ok = not any(bad.values())
    report(5, ok, "6 reductions x 20 instances, exact equality; mismatches " + ", ".join(f"{k}={v}" for k, v in bad.items()))


def test_criterion_6_ci_statements():
    rng = np.random.default_rng(6)
    structural = ["ICI", "PICI", "PICI_AVERAGE", "NOISY_MAX", "SCM", "LS_SICI", "US_SICI", "DS_SICI",
                  "NOISY_OR", "SURJECTIVE_NOISY_OR"]
    passed = 0
    for k in range(50):
        spec = random_spec(structural[k % len(structural)], rng, max_parents=6)
        passed += verify_ci_statements(spec, random_ambient(spec, rng)).ok
    eye = Cpt((BINARY,), BINARY, np.eye(2))
    spec = LocalSpec(Y, xs(3), Ici((eye,) * 3, or_gate((BINARY,) * 3)))
    g = induced_dag(spec)
    cases = [
        ("direct X->Y", g.with_edges([("X1", "Y")]), "(2)"),
        ("mechanism-mechanism", g.with_edges([("M1", "M2")]), "(4)"),
        ("ambient->mechanism", g.with_edges([("V1", "M1"), ("V1", "X2")], ["V1"]), "(3)"),
    ]
    caught = sum(verify_ci_statements(spec, dag=dag).by_label()[label].status == "fail" for _, dag, label in cases)
    report(6, passed == 50 and caught == 3, f"{passed}/50 random structures pass, {caught}/3 adversarial DAGs fail as intended")


def test_criterion_7_parameter_accounting():
    rng = np.random.default_rng(7)
    agree = 0
    for _ in range(10):
        parents = [int(c) for c in rng.integers(1, 5, size=int(rng.integers(0, 5)))]
        child = int(rng.integers(2, 5))
        rows = 1
        for c in parents:
            rows *= c
        agree += cpt_entry_count(parents, child) == rows * (child - 1)
    phi = Surjection.from_blocks([(0, 1, 2), (3, 4), (5,)])
    surj = parameter_count(LocalSpec(Y, xs(6), SurjectiveNoisyOr(
        phi, tuple(or_gate((BINARY,) * len(b)) for b in phi.blocks), (0.1, 0.2, 0.3))))
    full = parameter_count(LocalSpec(Y, xs(6), NoisyOr((0.1, 0.1, 0.1, 0.2, 0.2, 0.3))))
    saving = full.model_count - surj.model_count
    ok = agree == 10 and (full.model_count, surj.model_count, saving) == (6, 3, 3)
    report(7, ok, f"{agree}/10 shapes match the product rule; noisy-OR {full.model_count} vs surjective "
                  f"{surj.model_count}, saving {saving}")


def _block_images(spec):
    configs = ConfigIndexer(spec.parent_spaces).config_array()
    cols = []
    for i, (block, gate) in enumerate(zip(spec.phi.blocks, spec.payload.block_gates)):
        sub = ConfigIndexer(spec.block_spaces(i))
        outs = gate_outputs(gate)
        cols.append([int(outs[sub.index_of(tuple(int(v) for v in c[list(block)]))]) for c in configs])
    return list(zip(*cols))


def test_criterion_8_ls_shared_rows():
    rng = np.random.default_rng(8)
    count_ok = identical_ok = 0
    for _ in range(20):
        spec = random_spec("LS_SICI", rng)
        cpt = compile_spec(spec)
        groups = shared_row_groups(cpt)
        images = _block_images(spec)
        count_ok += len(groups) == len(set(images))
        identical_ok += all((cpt.rows[list(g)] == cpt.rows[g[0]]).all() and len({images[r] for r in g}) == 1
                            for g in groups)
    report(8, count_ok == 20 and identical_ok == 20,
           f"{count_ok}/20 group counts equal distinct gate images, {identical_ok}/20 with bit-identical groups")


FIG1 = Dag([f"X{i}" for i in range(1, 7)],
           [("X1", "X4"), ("X2", "X4"), ("X3", "X4"), ("X3", "X5"), ("X4", "X5"), ("X3", "X6"), ("X5", "X6")])


def _triples(nodes):
    for labels in itertools.product(range(4), repeat=len(nodes)):
        a, b, z = ({v for v, l in zip(nodes, labels) if l == k} for k in (1, 2, 3))
        if a and b:
            yield a, b, z


def test_criterion_9_d_separation():
    rng = np.random.default_rng(9)
    graphs = [FIG1] + [random_dag(int(rng.integers(2, 8)), rng, edge_prob=float(rng.uniform(0.2, 0.6)))
                       for _ in range(50)]
    triples = mismatches = 0
    for g in graphs:
        for a, b, z in _triples(g.nodes):
            triples += 1
            mismatches += d_separated(g, a, b, z) != d_separated_by_paths(g, a, b, z)
    report(9, mismatches == 0, f"{len(graphs)} DAGs (incl. the six-node example), {triples} triples, {mismatches} mismatches")


def _cli(*argv):
    import contextlib
    import io
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli_main([str(a) for a in argv])
    return code, out.getvalue()


def test_criterion_10_cli_contract(tmp_path):
    corpus = sorted(p for p in SPECS.glob("*.json") if p.name != "fig1_dag.json")
    round_trip = sum(serialize_spec(parse_document(p.read_text())) == p.read_text() for p in corpus)
    first = _cli("compile", SPECS / "fig7_surjective_noisy_or.json")[1]
    second = _cli("compile", SPECS / "fig7_surjective_noisy_or.json")[1]
    deterministic = first == second and len(first.splitlines()) == 65

    bad_json = tmp_path / "bad.json"
    bad_json.write_text('{"schema_version": ')
    doc = json.loads((SPECS / "table1_ls_sici.json").read_text())
    doc["payload"]["lower_cpt"][0] = [0.5, 0.4]
    bad_row = tmp_path / "row.json"
    bad_row.write_text(json.dumps(doc))
    big = tmp_path / "big.json"
    big.write_text(serialize_spec(LocalSpec(Y, xs(25), NoisyOr((0.5,) * 25))))
    amb = tmp_path / "amb.json"
    amb.write_text(json.dumps({"nodes": ["V1", "M1"], "edges": [["V1", "M1"]]}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _cli("compile", SPECS / "fig7_noisy_or.json", "--output", a)
    _cli("compile", SPECS / "fig4_noisy_or.json", "--output", b)
    expected = {
        "malformed spec": (("compile", bad_json), 1),
        "row sum 0.9 (compile)": (("compile", bad_row), 1),
        "row sum 0.9 (check)": (("check", bad_row), 1),
        "ambient edge into mechanism": (("check", SPECS / "fig4_noisy_or.json", "--ambient", amb), 1),
        "oracle size guard": (("verify", big), 3),
        "injected error": (("verify", SPECS / "fig4_noisy_or.json", "--inject-error", "1e-6"), 1),
        "diff shape mismatch": (("diff", a, b), 1),
        "verify ok": (("verify", SPECS / "fig7_surjective_noisy_or.json"), 0),
    }
    wrong = [name for name, (argv, code) in expected.items() if _cli(*argv)[0] != code]
    ok = round_trip == len(corpus) and deterministic and not wrong
    report(10, ok, f"round trip {round_trip}/{len(corpus)}, byte-identical CSV {deterministic}, "
                   f"exit codes {len(expected) - len(wrong)}/{len(expected)} as documented"
                   + (f" (wrong: {', '.join(wrong)})" if wrong else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
