"""Brute-force reference computations.

``oracle_cpt`` never uses the per-row sums of :mod:`sici.compiler`: it lays
the local structure out as an explicit little Bayesian network (parents,
inhibitors, mechanisms, child), multiplies every node's table into the full
joint distribution, then conditions on the parents and sums everything else
out. ``d_separated_by_paths`` likewise checks d-separation by listing every
trail instead of running a reachability search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .compiler import hassall_as_pici
from .core import BINARY, Cpt, StateSpace, VariableDecl, deterministic_cpt, marginal_cpt, validate_cpt
from .errors import ShapeError, SizeGuardError, SpecError, WeightRangeError
from .gates import And, Gate, Input, Max, Not, Or, gate_to_cpt
from .model import LocalSpec
from .structure import Dag, _check_sets

ORACLE_MAX_CONFIGS = 2 ** 24


@dataclass(frozen=True)
class MiniBn:
    """Nodes in topological order, each with its parent names and CPT."""

    nodes: tuple[VariableDecl, ...]
    parents: dict
    cpts: dict

    def __post_init__(self):
        seen = set()
        for v in self.nodes:
            pa = self.parents[v.name]
            missing = [p for p in pa if p not in seen]
            if missing:
                raise SpecError(f"node {v.name} listed before its parents {missing}")
            cpt = self.cpts[v.name]
            spaces = tuple(self.space(p) for p in pa)
            if cpt.parent_spaces != spaces or cpt.child_space != v.space:
                raise ShapeError(f"CPT of {v.name} does not match its parents' and its own spaces")
            bad = validate_cpt(cpt)
            if bad:
                raise SpecError(f"CPT of {v.name} is not row-stochastic: {bad[0]}")
            seen.add(v.name)

    def space(self, name) -> StateSpace:
        for v in self.nodes:
            if v.name == name:
                return v.space
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.nodes)

    @property
    def size(self) -> int:
        return math.prod(v.space.cardinality for v in self.nodes)

    def kind_names(self, kind) -> list[str]:
        return [v.name for v in self.nodes if v.kind == kind]


class _Builder:
    def __init__(self):
        self.nodes, self.parents, self.cpts = [], {}, {}

    def add(self, var, parents, cpt):
        self.nodes.append(var)
        self.parents[var.name] = tuple(parents)
        self.cpts[var.name] = cpt

    def build(self):
        return MiniBn(tuple(self.nodes), self.parents, self.cpts)


def _or_table(spaces, out):
    return gate_to_cpt(Gate(Or(tuple(Input(i) for i in range(len(spaces)))), tuple(spaces), out))


def _selector_hassall(b, spec, xs, ys):
    """Y = X_S where the latent selector S picks parent i with probability w_i / sum(w)."""
    w = np.asarray(spec.payload.weights, dtype=np.float64)
    n = spec.n
    sel = VariableDecl("S" if "S" not in xs else "S_", StateSpace.of_size(n) if n > 1 else StateSpace.of_size(2),
                       "mechanism")
    probs = np.zeros(sel.space.cardinality)
    probs[:n] = w / w.sum()
    b.add(sel, (), marginal_cpt(sel.space, probs))
    # Y depends on (S, X_1..X_n): copy the selected parent
    spaces = (sel.space,) + spec.parent_spaces
    outputs = []
    for config in np.ndindex(*[s.cardinality for s in spaces]):
        s = config[0]
        outputs.append(config[1 + s] if s < n else 0)
    b.add(ys, (sel.name,) + tuple(xs), deterministic_cpt(spaces, spec.child.space, outputs))


def spec_to_mini_bn(spec: LocalSpec, parent_marginals=None) -> MiniBn:
    """Explicit network for ``spec``; parents are roots with the given (default uniform) marginals."""
    p = spec.payload
    tag = spec.tag
    b = _Builder()
    xs = [x.name for x in spec.parents]
    if parent_marginals is None:
        parent_marginals = [np.full(x.space.cardinality, 1.0 / x.space.cardinality) for x in spec.parents]
    for x, marg in zip(spec.parents, parent_marginals):
        marg = np.asarray(marg, dtype=np.float64)
        if marg.shape != (x.space.cardinality,) or np.any(marg <= 0):
            raise SpecError(f"parent marginal for {x.name} must be strictly positive over {x.space.cardinality} states")
        b.add(VariableDecl(x.name, x.space, "parent"), (), marginal_cpt(x.space, marg))
    ys = VariableDecl(spec.child.name, spec.child.space, "child")
    mechs = [VariableDecl(name, space, "mechanism") for name, space in zip(spec.mechanism_names, spec.mechanism_spaces)]
    blocks = spec.phi.blocks
    ms = [m.name for m in mechs]

    if tag == "HASSALL_BINARY":
        try:
            pici = hassall_as_pici(spec)
        except WeightRangeError:
            _selector_hassall(b, spec, xs, ys)
            return b.build()
        for m, x, cpt in zip(mechs, xs, pici.payload.mechanism_cpts):
            b.add(m, (x,), cpt)
        b.add(ys, ms, pici.payload.lower_cpt)
        return b.build()

    if tag in ("NOISY_OR", "SURJECTIVE_NOISY_OR"):
        probs = p.inhibitor_probs if tag == "NOISY_OR" else p.block_inhibitor_probs
        for name, q in zip(spec.inhibitor_names, probs):
            b.add(VariableDecl(name, BINARY, "inhibitor"), (), marginal_cpt(BINARY, [1.0 - q, q]))
        for i, (m, block, inh) in enumerate(zip(mechs, blocks, spec.inhibitor_names)):
            block_spaces = spec.block_spaces(i)
            if tag == "NOISY_OR":
                cause = Input(0)
            else:
                cause = p.block_gates[i].expr
            expr = And((cause, Not(Input(len(block)))))
            gate = Gate(expr, block_spaces + (BINARY,), BINARY)
            b.add(m, tuple(xs[j] for j in block) + (inh,), gate_to_cpt(gate))
        b.add(ys, ms, _or_table(spec.mechanism_spaces, spec.child.space))
        return b.build()

    # mechanism layer
    for i, (m, block) in enumerate(zip(mechs, blocks)):
        pa = tuple(xs[j] for j in block)
        if tag in ("ICI", "PICI", "PICI_AVERAGE", "NOISY_MAX"):
            table = p.mechanism_cpts[i]
        elif tag in ("US_SICI", "DS_SICI"):
            table = p.block_cpts[i]
        elif tag == "LS_SICI":
            table = gate_to_cpt(p.block_gates[i])
        elif tag == "SCM":
            table = gate_to_cpt(p.gate)
        else:
            raise SpecError(f"no oracle network for variant {tag}")
        b.add(m, pa, table)

    # child layer
    mspaces = spec.mechanism_spaces
    if tag in ("ICI", "US_SICI"):
        lower = gate_to_cpt(p.lower_gate)
    elif tag in ("PICI", "LS_SICI", "DS_SICI", "SCM"):
        lower = p.lower_cpt
    elif tag == "PICI_AVERAGE":
        lower = _average_table(mspaces, spec.child.space)
    elif tag == "NOISY_MAX":
        lower = gate_to_cpt(Gate(Max(tuple(Input(i) for i in range(len(ms)))), mspaces, spec.child.space))
    b.add(ys, ms, lower)
    return b.build()


def _average_table(spaces, out):
    rows = []
    for config in np.ndindex(*[s.cardinality for s in spaces]):
        rows.append([sum(1 for c in config if c == y) / len(config) for y in range(out.cardinality)])
    return Cpt(spaces, out, rows)


@dataclass(frozen=True)
class JointTable:
    names: tuple[str, ...]
    table: np.ndarray  # one axis per node, in ``names`` order

    def probability(self, config) -> float:
        return float(self.table[tuple(config)])

    @property
    def total(self) -> float:
        return float(self.table.sum())


def joint_distribution(bn: MiniBn) -> JointTable:
    """Chain-rule product of every node's CPT over all full configurations."""
    if bn.size > ORACLE_MAX_CONFIGS:
        raise SizeGuardError(f"full configuration space has {bn.size} entries, oracle limit is {ORACLE_MAX_CONFIGS}")
    names = bn.names
    axis = {name: i for i, name in enumerate(names)}
    dims = [v.space.cardinality for v in bn.nodes]
    joint = np.ones(dims)
    for v in bn.nodes:
        pa = bn.parents[v.name]
        own = [axis[p] for p in pa] + [axis[v.name]]
        factor = np.asarray(bn.cpts[v.name].rows).reshape([dims[a] for a in own])
        # place factor axes on their global positions, broadcasting the rest
        order = np.argsort(own)
        factor = factor.transpose(order)
        shape = [1] * len(dims)
        for a in sorted(own):
            shape[a] = dims[a]
        joint = joint * factor.reshape(shape)
    return JointTable(names, joint)


def oracle_size(spec: LocalSpec) -> int:
    """Number of full configurations the oracle network for ``spec`` would enumerate."""
    cards = [x.space.cardinality for x in spec.parents] + [spec.child.space.cardinality]
    if spec.tag == "HASSALL_BINARY":
        cards += [2] * spec.n
    else:
        cards += [s.cardinality for s in spec.mechanism_spaces]
        cards += [2] * len(spec.inhibitor_names)
    return math.prod(cards)


def check_oracle_size(spec: LocalSpec):
    size = oracle_size(spec)
    if size > ORACLE_MAX_CONFIGS:
        raise SizeGuardError(
            f"oracle would enumerate {size} full configurations (limit 2^24 = {ORACLE_MAX_CONFIGS}); "
            "the oracle is a desk-scale verifier")


def oracle_cpt(spec: LocalSpec, parent_marginals=None) -> Cpt:
    """P(Y | X) obtained by conditioning the explicit joint on each parent configuration."""
    check_oracle_size(spec)
    bn = spec_to_mini_bn(spec, parent_marginals)
    joint = joint_distribution(bn)
    xs = [x.name for x in spec.parents]
    y = spec.child.name
    keep = [joint.names.index(x) for x in xs] + [joint.names.index(y)]
    drop = tuple(i for i in range(len(joint.names)) if i not in keep)
    marginal = joint.table.sum(axis=drop) if drop else joint.table
    # remaining axes are in original order; move them into (X..., Y) order
    remaining = sorted(keep)
    marginal = marginal.transpose([remaining.index(k) for k in keep])
    flat = marginal.reshape(-1, spec.child.space.cardinality)
    evidence = flat.sum(axis=1, keepdims=True)
    if np.any(evidence <= 0):
        raise SpecError("zero-probability parent configuration")
    return Cpt(spec.parent_spaces, spec.child.space, flat / evidence)


def compare_cpts(a: Cpt, b: Cpt) -> tuple[float, tuple[int, int]]:
    """Max absolute entrywise difference and the (row, column) where it occurs."""
    ra, rb = np.asarray(a.rows), np.asarray(b.rows)
    if ra.shape != rb.shape:
        raise ShapeError(f"cannot compare tables of shape {ra.shape} and {rb.shape}")
    diff = np.abs(ra - rb)
    r, c = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return float(diff[r, c]), (int(r), int(c))


def d_separated_by_paths(g: Dag, a, b, z=()) -> bool:
    """d-separation by enumerating every simple trail between ``a`` and ``b``.

    A trail is active when each collider on it is in ``z`` or has a
    descendant in ``z``, and every other interior node is outside ``z``.
    """
    a, b, z = _check_sets(g, a, b, z)
    neighbours = {v: set(g.parents[v]) | set(g.children[v]) for v in g.nodes}
    edges = set(g.edges)
    opens = {v: bool(g.descendants(v) & z) for v in g.nodes}

    def interior_ok(prev, mid, nxt):
        if (prev, mid) in edges and (nxt, mid) in edges:
            return opens[mid]
        return mid not in z

    def walk(path, seen):
        last = path[-1]
        if len(path) > 1 and last in b:
            return True
        for nxt in neighbours[last]:
            if nxt in seen:
                continue
            if len(path) > 1 and not interior_ok(path[-2], last, nxt):
                continue
            if walk(path + [nxt], seen | {nxt}):
                return True
        return False

    return not any(walk([s], {s}) for s in a)
