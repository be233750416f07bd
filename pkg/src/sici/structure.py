"""Local DAGs for each model variant and d-separation checks of their independence statements."""

from __future__ import annotations

import graphlib
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .errors import AmbientViolationError, ArgumentError, CycleError
from .model import BIJECTIVE_VARIANTS, LocalSpec
from .surjection import Surjection, blocks_of, contiguous_reorder, is_contiguous, permute_surjection  # noqa: F401


class Dag:
    """Directed acyclic graph over named nodes, with an optional kind per node."""

    def __init__(self, nodes: Iterable = (), edges: Iterable[tuple[str, str]] = (), kinds: dict | None = None):
        self.kinds = dict(kinds or {})
        names = []
        for node in nodes:
            name = getattr(node, "name", node)
            if hasattr(node, "kind"):
                self.kinds.setdefault(name, node.kind)
            if name not in names:
                names.append(name)
        self.nodes = tuple(names)
        known = set(self.nodes)
        self.edges = []
        for u, v in edges:
            if u not in known or v not in known:
                raise ArgumentError(f"edge {u}->{v} references an undeclared node")
            if u == v:
                raise CycleError(f"self-loop on {u}")
            if (u, v) not in self.edges:
                self.edges.append((u, v))
        self.edges = tuple(self.edges)
        self.parents = {v: [] for v in self.nodes}
        self.children = {v: [] for v in self.nodes}
        for u, v in self.edges:
            self.parents[v].append(u)
            self.children[u].append(v)
        try:
            self.order = tuple(graphlib.TopologicalSorter({v: self.parents[v] for v in self.nodes}).static_order())
        except graphlib.CycleError as exc:
            raise CycleError(f"graph has a cycle: {' -> '.join(map(str, exc.args[1]))}") from None

    def __contains__(self, node):
        return node in self.parents

    def __repr__(self):
        return f"Dag(nodes={list(self.nodes)}, edges={list(self.edges)})"

    def with_edges(self, extra: Iterable[tuple[str, str]], extra_nodes: Iterable = ()) -> Dag:
        return Dag(self.nodes + tuple(extra_nodes), self.edges + tuple(extra), self.kinds)

    def ancestors(self, nodes: Iterable[str]) -> set[str]:
        """``nodes`` together with all their ancestors."""
        seen = set()
        stack = list(nodes)
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(self.parents[v])
        return seen

    def descendants(self, node: str) -> set[str]:
        seen = set()
        stack = [node]
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(self.children[v])
        return seen


def _check_sets(g, a, b, z):
    a, b, z = frozenset(a), frozenset(b), frozenset(z)
    for v in a | b | z:
        if v not in g:
            raise ArgumentError(f"unknown node {v!r}")
    if a & b or a & z or b & z:
        raise ArgumentError(f"node sets overlap: A={sorted(a)}, B={sorted(b)}, Z={sorted(z)}")
    return a, b, z


def d_separated(g: Dag, a: Iterable[str], b: Iterable[str], z: Iterable[str] = ()) -> bool:
    """Whether ``a`` and ``b`` are d-separated by ``z`` in ``g``.

    Reachability search over (node, direction) pairs: a trail may pass a
    non-collider only if it is unobserved, and a collider only if it has
    an observed descendant (i.e. it is an ancestor of ``z``).
    """
    a, b, z = _check_sets(g, a, b, z)
    if not a or not b:
        return True
    anc_z = g.ancestors(z)
    # "up": arrived from a child (or the start); "down": arrived from a parent
    queue = deque((v, "up") for v in a)
    visited = set()
    while queue:
        v, direction = queue.popleft()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v in b and v not in z:
            return False
        if direction == "up" and v not in z:
            queue.extend((p, "up") for p in g.parents[v])
            queue.extend((c, "down") for c in g.children[v])
        elif direction == "down":
            if v not in z:
                queue.extend((c, "down") for c in g.children[v])
            if v in anc_z:
                queue.extend((p, "up") for p in g.parents[v])
    return True


@dataclass(frozen=True)
class CiStatement:
    a: frozenset
    b: frozenset
    z: frozenset
    expected: bool = True

    def __post_init__(self):
        for name in ("a", "b", "z"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if self.a & self.b or self.a & self.z or self.b & self.z:
            raise ArgumentError("CI statement sets must be pairwise disjoint")

    def __str__(self):
        def fmt(s):
            return "{" + ", ".join(sorted(s)) + "}"
        sep = "⊥⊥" if self.expected else "not ⊥⊥"
        return f"{fmt(self.a)} {sep} {fmt(self.b)} | {fmt(self.z)}"

    def holds_in(self, g: Dag) -> bool:
        return d_separated(g, self.a, self.b, self.z) == self.expected


@dataclass
class StatementResult:
    label: str
    description: str
    instances: list = field(default_factory=list)  # (CiStatement, bool) pairs

    @property
    def status(self) -> str:
        if not self.instances:
            return "vacuous"
        return "pass" if all(ok for _, ok in self.instances) else "fail"


@dataclass
class CiReport:
    results: list

    @property
    def ok(self) -> bool:
        return all(r.status != "fail" for r in self.results)

    def by_label(self) -> dict:
        return {r.label: r for r in self.results}

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            out.append(f"statement {r.label} {r.description}: {r.status.upper()}")
            for stmt, ok in r.instances:
                if not ok:
                    out.append(f"    violated: {stmt}")
        return out


def induced_dag(spec: LocalSpec, ambient: Dag | None = None) -> Dag:
    """Local graph X -> M -> Y for ``spec`` (inhibitors I_i -> M_i where the variant has them).

    Ambient edges may touch parents and the child only; edges from the
    parents into the child are the ones the local structure replaces and
    are dropped.
    """
    parents = [p.name for p in spec.parents]
    mechs = list(spec.mechanism_names)
    inhibitors = list(spec.inhibitor_names)
    child = spec.child.name
    kinds = {x: "parent" for x in parents} | {m: "mechanism" for m in mechs} | {i: "inhibitor" for i in inhibitors}
    kinds[child] = "child"
    edges = [(parents[j], mechs[i]) for j, i in enumerate(spec.phi.assignment)]
    edges += [(inh, mech) for inh, mech in zip(inhibitors, mechs)]
    edges += [(mech, child) for mech in mechs]
    nodes = parents + inhibitors + mechs + [child]
    if ambient is not None:
        local_only = set(mechs) | set(inhibitors)
        for v in ambient.nodes:
            if v in local_only:
                raise AmbientViolationError(f"ambient graph declares local node {v!r}")
            if v not in kinds:
                nodes.append(v)
                kinds[v] = "ambient"
        for u, v in ambient.edges:
            if u in parents and v == child:
                continue
            if v == child:
                raise AmbientViolationError(f"ambient edge {u}->{v}: the child's parents are fixed to the parent set")
            edges.append((u, v))
    return Dag(nodes, edges, kinds)


def ci_statements(spec: LocalSpec, g: Dag) -> list[StatementResult]:
    """Instantiate the four local independence statements for ``spec`` on ``g``."""
    parents = [p.name for p in spec.parents]
    mechs = list(spec.mechanism_names)
    child = spec.child.name
    local = set(parents) | set(mechs) | set(spec.inhibitor_names) | {child}
    outside = [v for v in g.nodes if v not in local]
    bijective = spec.tag in BIJECTIVE_VARIANTS
    labels = ("(2)", "(3)", "(4)", "(5)") if bijective else ("(9)", "(10)", "(11)", "(12)")
    block_text = "X_i" if bijective else "X_(i)"

    s_child = StatementResult(labels[0], "Y ⊥⊥ X | M", [CiStatement({child}, parents, mechs)])
    s_ambient = StatementResult(labels[1], "M ⊥⊥ V∖(X ∪ Y) | X ∪ Y")
    if outside:
        s_ambient.instances.append(CiStatement(mechs, outside, parents + [child]))
    s_pairs = StatementResult(labels[2], "M_i ⊥⊥ M_j | X")
    for i in range(len(mechs)):
        for j in range(i + 1, len(mechs)):
            s_pairs.instances.append(CiStatement({mechs[i]}, {mechs[j]}, parents))
    s_blocks = StatementResult(labels[3], f"M_i ⊥⊥ X∖{block_text} | {block_text}")
    for i, block in enumerate(spec.phi.blocks):
        inside = [parents[j] for j in block]
        rest = [x for x in parents if x not in inside]
        if rest:
            s_blocks.instances.append(CiStatement({mechs[i]}, rest, inside))
    results = [s_child, s_ambient, s_pairs, s_blocks]
    for r in results:
        r.instances = [(stmt, stmt.holds_in(g)) for stmt in r.instances]
    return results


def verify_ci_statements(spec: LocalSpec, ambient: Dag | None = None, dag: Dag | None = None) -> CiReport:
    """Check the local independence statements by d-separation.

    ``dag`` overrides the induced graph (used to probe hand-modified
    structures); otherwise the graph is ``induced_dag(spec, ambient)``.
    """
    g = dag if dag is not None else induced_dag(spec, ambient)
    return CiReport(ci_statements(spec, g))
