"""Regenerate the bundled example specs under specs/."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from sici.compiler import hassall_table
from sici.core import BINARY, Cpt, StateSpace, VariableDecl
from sici.document import SpecDocument, serialize_spec
from sici.gates import identity_gate, max_gate, or_gate, parse_gate
from sici.model import DsSici, HassallBinary, Ici, LocalSpec, LsSici, NoisyOr, Scm, SurjectiveNoisyOr
from sici.surjection import Surjection

FIG1_NODES = ["X1", "X2", "X3", "X4", "X5", "X6"]
FIG1_EDGES = [("X1", "X4"), ("X2", "X4"), ("X3", "X4"), ("X3", "X5"), ("X4", "X5"), ("X3", "X6"), ("X5", "X6")]


def binary_parents(n):
    return tuple(VariableDecl(f"X{i + 1}", BINARY) for i in range(n))


def child(space=BINARY, name="Y"):
    return VariableDecl(name, space, "child")


def folded(p):
    # mechanism CPT of a noisy-OR parent: absent cause never fires, present cause is inhibited with prob p
    return Cpt((BINARY,), BINARY, [[1.0, 0.0], [p, 1.0 - p]])


def corpus() -> dict[str, SpecDocument]:
    docs = {}
    p3 = (0.1, 0.2, 0.3)
    docs["fig4_noisy_or"] = SpecDocument(LocalSpec(child(), binary_parents(3), NoisyOr(p3)))
    docs["fig5_noisy_or_ici"] = SpecDocument(LocalSpec(
        child(), binary_parents(3), Ici(tuple(folded(p) for p in p3), or_gate((BINARY,) * 3))))

    phi7 = Surjection.from_blocks([(0, 1, 2), (3, 4), (5,)])
    gates7 = tuple(or_gate((BINARY,) * len(b)) for b in phi7.blocks)
    docs["fig7_surjective_noisy_or"] = SpecDocument(LocalSpec(
        child(), binary_parents(6), SurjectiveNoisyOr(phi7, gates7, p3)))
    # the same scenario with one inhibitor per parent, each taking its block's probability
    docs["fig7_noisy_or"] = SpecDocument(LocalSpec(
        child(), binary_parents(6), NoisyOr((0.1, 0.1, 0.1, 0.2, 0.2, 0.3))))

    w = (1.5, 1.0, 0.5)
    docs["hassall"] = SpecDocument(LocalSpec(child(), binary_parents(3), HassallBinary(w)))
    docs["table1_ls_sici"] = SpecDocument(LocalSpec(
        child(), binary_parents(3),
        LsSici(Surjection.identity(3), tuple(identity_gate(BINARY) for _ in range(3)), hassall_table(w))))

    tern = StateSpace(("low", "medium", "high"))
    tparents = tuple(VariableDecl(n, tern) for n in ("Rain", "Wind"))
    docs["ici_noisy_max_ternary"] = SpecDocument(LocalSpec(
        VariableDecl("Damage", tern, "child"), tparents,
        Ici((Cpt((tern,), tern, [[1, 0, 0], [0.6, 0.4, 0], [0.2, 0.5, 0.3]]),
             Cpt((tern,), tern, [[1, 0, 0], [0.7, 0.3, 0], [0.3, 0.4, 0.3]])),
            max_gate((tern, tern))),
        ("M_rain", "M_wind")))

    rng = np.random.default_rng(7)
    phi_ds = Surjection.from_blocks([(0, 1), (2, 3)])
    block_cpts = tuple(Cpt((BINARY, BINARY), BINARY, np.round(rng.dirichlet([1, 1], size=4), 3)) for _ in range(2))
    docs["ds_sici"] = SpecDocument(LocalSpec(
        child(), binary_parents(4),
        DsSici(phi_ds, block_cpts, Cpt((BINARY, BINARY), BINARY, [[0.95, 0.05], [0.4, 0.6], [0.3, 0.7], [0.02, 0.98]]))))

    scm_gate = parse_gate("threshold(2; X1, X2, X3, X4)", ["X1", "X2", "X3", "X4"], (BINARY,) * 4, BINARY)
    docs["scm_threshold"] = SpecDocument(LocalSpec(
        child(), binary_parents(4), Scm(scm_gate, Cpt((BINARY,), BINARY, [[0.9, 0.1], [0.2, 0.8]]))))

    # local structure of X5 in the six-node example network, with the rest of that network as ambient
    docs["fig1_ambient"] = SpecDocument(
        LocalSpec(VariableDecl("X5", BINARY, "child"), tuple(VariableDecl(n, BINARY) for n in ("X3", "X4")),
                  Ici((folded(0.2), folded(0.4)), or_gate((BINARY, BINARY)))),
        tuple(FIG1_NODES), tuple(e for e in FIG1_EDGES if e[1] != "X5"))
    return docs


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "specs"))
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, doc in corpus().items():
        (out / f"{name}.json").write_text(serialize_spec(doc))
    (out / "fig1_dag.json").write_text(json.dumps({"nodes": FIG1_NODES, "edges": [list(e) for e in FIG1_EDGES]},
                                                  indent=2) + "\n")
    print(f"wrote {len(corpus()) + 1} files to {out}")


if __name__ == "__main__":
    main()
