"""Gap between a noisy-OR and its surjective approximation on six binary parents.

Blocks are {X1,X2,X3}, {X4,X5}, {X6} with OR block gates. The full noisy-OR
gives every parent in block i the block's inhibitor probability, so the two
models agree whenever at most one parent per block is active and diverge
otherwise (a block fires once, however many of its parents are on).
"""

from __future__ import annotations

import argparse

import numpy as np

from sici.analysis import parameter_count
from sici.compiler import compile_spec
from sici.core import BINARY, VariableDecl
from sici.gates import or_gate
from sici.model import LocalSpec, NoisyOr, SurjectiveNoisyOr
from sici.surjection import Surjection


def build(block_probs):
    parents = tuple(VariableDecl(f"X{i + 1}", BINARY) for i in range(6))
    y = VariableDecl("Y", BINARY, "child")
    phi = Surjection.from_blocks([(0, 1, 2), (3, 4), (5,)])
    gates = tuple(or_gate((BINARY,) * len(b)) for b in phi.blocks)
    sicm = LocalSpec(y, parents, SurjectiveNoisyOr(phi, gates, tuple(block_probs)))
    full = LocalSpec(y, parents, NoisyOr(tuple(block_probs[a] for a in phi.assignment)))
    return full, sicm


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--probs", type=float, nargs=3, default=(0.1, 0.2, 0.3))
    args = parser.parse_args()
    full, sicm = build(args.probs)
    a, b = compile_spec(full), compile_spec(sicm)
    gap = np.abs(a.rows[:, 1] - b.rows[:, 1])
    print(f"parameters: noisy-OR {parameter_count(full).model_count}, "
          f"surjective noisy-OR {parameter_count(sicm).model_count}")
    print(f"max |dP(Y=1|x)| = {gap.max():.6f}, mean = {gap.mean():.6f}, rows differing = {np.count_nonzero(gap > 1e-12)}/64")
    worst = int(np.argmax(gap))
    print(f"worst x = {a.indexer.config_of(worst)}: noisy-OR {a.rows[worst, 1]:.6f} vs surjective {b.rows[worst, 1]:.6f}")


if __name__ == "__main__":
    main()
