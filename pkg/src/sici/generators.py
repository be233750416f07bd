"""Random specs, tables, gates and DAGs for property tests and experiments."""

from __future__ import annotations

import numpy as np

from .core import BINARY, ConfigIndexer, Cpt, StateSpace, VariableDecl
from .gates import And, Const, Gate, Input, Max, Min, Not, Or, Threshold, Xor
from .model import (
    DsSici, HassallBinary, Ici, LocalSpec, LsSici, NoisyMax, NoisyOr, Pici, PiciAverage, Scm,
    SurjectiveNoisyOr, UsSici, VARIANTS,
)
from .structure import Dag
from .surjection import Surjection

BINARY_ONLY = ("NOISY_OR", "SURJECTIVE_NOISY_OR", "HASSALL_BINARY")


def random_cpt(parent_spaces, child_space, rng, concentration=1.0) -> Cpt:
    n_rows = ConfigIndexer(parent_spaces).size
    rows = rng.dirichlet(np.full(child_space.cardinality, concentration), size=n_rows)
    return Cpt(tuple(parent_spaces), child_space, rows)


def random_surjection(n, rng, m=None) -> Surjection:
    m = int(rng.integers(1, n + 1)) if m is None else m
    assignment = list(range(m)) + [int(a) for a in rng.integers(0, m, size=n - m)]
    rng.shuffle(assignment)
    return Surjection(tuple(assignment), m)


def _random_bool_expr(slots, rng, depth):
    slots = list(slots)
    rng.shuffle(slots)
    if depth > 1 and len(slots) > 2 and rng.random() < 0.5:
        cut = int(rng.integers(1, len(slots)))
        operands = (_random_bool_expr(slots[:cut], rng, depth - 1), _random_bool_expr(slots[cut:], rng, depth - 1))
    else:
        operands = tuple(Input(s) for s in slots)
    op = rng.choice(["or", "and", "xor", "threshold", "not"])
    if op == "not":
        inner = Or(operands) if len(operands) > 1 else operands[0]
        return Not(inner)
    if op == "threshold":
        return Threshold(int(rng.integers(0, len(operands) + 1)), operands)
    return {"or": Or, "and": And, "xor": Xor}[op](operands)


def random_gate(spaces, out, rng, depth=2) -> Gate:
    """A well-typed random gate from ``spaces`` to ``out`` (boolean, MAX/MIN, projection or constant)."""
    spaces = tuple(spaces)
    binary = [i for i, s in enumerate(spaces) if s.is_binary]
    same = [i for i, s in enumerate(spaces) if s == out]
    proj = [i for i, s in enumerate(spaces) if s.cardinality == out.cardinality]
    choices = []
    if out.is_binary and binary:
        choices += ["bool", "bool"]
    if same:
        choices += ["maxmin", "maxmin"]
    if proj:
        choices.append("proj")
    choices.append("const")
    kind = rng.choice(choices)
    if kind == "bool":
        expr = _random_bool_expr(binary, rng, depth)
    elif kind == "maxmin":
        expr = (Max if rng.random() < 0.5 else Min)(tuple(Input(i) for i in same))
    elif kind == "proj":
        expr = Input(int(rng.choice(proj)))
    else:
        expr = Const(int(rng.integers(0, out.cardinality)))
    return Gate(expr, spaces, out)


def _space(k):
    return StateSpace.of_size(int(k))


def random_parents(n, rng, max_card=3, binary=False):
    cards = [2] * n if binary else rng.integers(2, max_card + 1, size=n)
    return tuple(VariableDecl(f"X{i + 1}", _space(c)) for i, c in enumerate(cards))


def _block_space(spaces, rng, max_card):
    # favour a space some block member already has, so MAX/MIN/projection gates are available
    if rng.random() < 0.75:
        return spaces[int(rng.integers(0, len(spaces)))]
    return _space(rng.integers(2, max_card + 1))


def random_spec(variant, rng, max_parents=5, max_card=3, n=None, phi=None) -> LocalSpec:
    """Random valid spec of the given variant (n <= max_parents, cardinalities <= max_card)."""
    binary = variant in BINARY_ONLY
    if n is None:
        n = phi.n if phi is not None else int(rng.integers(1, max_parents + 1))
    parents = random_parents(n, rng, max_card, binary)
    child_space = BINARY if binary else _space(rng.integers(2, max_card + 1))
    child = VariableDecl("Y", child_space, "child")
    pspaces = tuple(x.space for x in parents)

    def mech_space():
        return child_space if rng.random() < 0.6 else _space(rng.integers(2, max_card + 1))

    if variant in ("ICI", "PICI"):
        mspaces = [mech_space() for _ in range(n)]
        cpts = tuple(random_cpt((s,), ms, rng) for s, ms in zip(pspaces, mspaces))
        if variant == "ICI":
            payload = Ici(cpts, random_gate(mspaces, child_space, rng))
        else:
            payload = Pici(cpts, random_cpt(mspaces, child_space, rng))
    elif variant in ("PICI_AVERAGE", "NOISY_MAX"):
        cpts = tuple(random_cpt((s,), child_space, rng) for s in pspaces)
        payload = PiciAverage(cpts) if variant == "PICI_AVERAGE" else NoisyMax(cpts)
    elif variant == "SCM":
        ms = _block_space(pspaces, rng, max_card)
        payload = Scm(random_gate(pspaces, ms, rng), random_cpt((ms,), child_space, rng))
    elif variant in ("LS_SICI", "US_SICI", "DS_SICI"):
        phi = random_surjection(n, rng) if phi is None else phi
        block_spaces = [tuple(pspaces[j] for j in b) for b in phi.blocks]
        if variant == "LS_SICI":
            mspaces = [_block_space(bs, rng, max_card) for bs in block_spaces]
            gates = tuple(random_gate(bs, ms, rng) for bs, ms in zip(block_spaces, mspaces))
            payload = LsSici(phi, gates, random_cpt(mspaces, child_space, rng))
        else:
            mspaces = [mech_space() for _ in block_spaces]
            cpts = tuple(random_cpt(bs, ms, rng) for bs, ms in zip(block_spaces, mspaces))
            if variant == "US_SICI":
                payload = UsSici(phi, cpts, random_gate(mspaces, child_space, rng))
            else:
                payload = DsSici(phi, cpts, random_cpt(mspaces, child_space, rng))
    elif variant == "NOISY_OR":
        payload = NoisyOr(tuple(float(p) for p in rng.uniform(0, 1, size=n)))
    elif variant == "SURJECTIVE_NOISY_OR":
        phi = random_surjection(n, rng) if phi is None else phi
        gates = tuple(random_gate((BINARY,) * len(b), BINARY, rng) for b in phi.blocks)
        payload = SurjectiveNoisyOr(phi, gates, tuple(float(p) for p in rng.uniform(0, 1, size=phi.m)))
    elif variant == "HASSALL_BINARY":
        payload = HassallBinary(tuple(float(w) for w in rng.uniform(0.05, 3.0, size=n)))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return LocalSpec(child, parents, payload)


def random_any_spec(rng, **kwargs) -> LocalSpec:
    return random_spec(VARIANTS[int(rng.integers(0, len(VARIANTS)))], rng, **kwargs)


def random_dag(n_nodes, rng, edge_prob=0.4, prefix="V") -> Dag:
    """Random DAG: edges only go forward in a random node order."""
    names = [f"{prefix}{i + 1}" for i in range(n_nodes)]
    order = list(rng.permutation(n_nodes))
    edges = []
    for a in range(n_nodes):
        for b in range(a + 1, n_nodes):
            if rng.random() < edge_prob:
                edges.append((names[order[a]], names[order[b]]))
    return Dag(names, edges)


def random_ambient(spec: LocalSpec, rng, n_extra=3, edge_prob=0.4) -> Dag:
    """Ambient graph over the parents, the child and ``n_extra`` outside nodes.

    Outside nodes may point into parents, receive edges from parents or the
    child, and connect among themselves; parents may be adjacent to each
    other. Nothing touches mechanisms, and nothing new points into the child.
    """
    xs = [x.name for x in spec.parents]
    y = spec.child.name
    vs = [f"V{i + 1}" for i in range(n_extra)]
    # topological layout: upstream V's, parents, child, downstream V's
    split = int(rng.integers(0, n_extra + 1))
    up, down = vs[:split], vs[split:]
    edges = []
    layered = up + xs
    for i, a in enumerate(layered):
        for b in layered[i + 1:]:
            if rng.random() < edge_prob:
                edges.append((a, b))
    for a in xs + [y] + down:
        for b in down:
            if a != b and (a not in down or down.index(a) < down.index(b)) and rng.random() < edge_prob:
                edges.append((a, b))
    return Dag(xs + [y] + vs, edges)
