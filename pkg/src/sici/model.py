"""Local structure specifications: a child, its ordered parents, and one model variant.

Each payload class carries a ``tag`` matching the variant name used in spec
documents. Structural invariants (arity, matching state spaces, binary-only
variants, surjectivity) are enforced when a :class:`LocalSpec` is built;
probability constraints on embedded tables are left to :func:`table_violations`
so malformed inputs can still be loaded and reported on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .core import BINARY, Cpt, StateSpace, VariableDecl, validate_cpt
from .errors import ShapeError, SpecError
from .gates import Gate
from .surjection import Surjection, permute_surjection


@dataclass(frozen=True)
class Ici:
    mechanism_cpts: tuple[Cpt, ...]
    lower_gate: Gate
    tag = "ICI"


@dataclass(frozen=True)
class Pici:
    mechanism_cpts: tuple[Cpt, ...]
    lower_cpt: Cpt
    tag = "PICI"


@dataclass(frozen=True)
class PiciAverage:
    mechanism_cpts: tuple[Cpt, ...]
    tag = "PICI_AVERAGE"


@dataclass(frozen=True)
class Scm:
    gate: Gate
    lower_cpt: Cpt
    tag = "SCM"


@dataclass(frozen=True)
class LsSici:
    phi: Surjection
    block_gates: tuple[Gate, ...]
    lower_cpt: Cpt
    tag = "LS_SICI"


@dataclass(frozen=True)
class UsSici:
    phi: Surjection
    block_cpts: tuple[Cpt, ...]
    lower_gate: Gate
    tag = "US_SICI"


@dataclass(frozen=True)
class DsSici:
    phi: Surjection
    block_cpts: tuple[Cpt, ...]
    lower_cpt: Cpt
    tag = "DS_SICI"


@dataclass(frozen=True)
class NoisyOr:
    inhibitor_probs: tuple[float, ...]
    tag = "NOISY_OR"


@dataclass(frozen=True)
class NoisyMax:
    mechanism_cpts: tuple[Cpt, ...]
    tag = "NOISY_MAX"


@dataclass(frozen=True)
class SurjectiveNoisyOr:
    phi: Surjection
    block_gates: tuple[Gate, ...]
    block_inhibitor_probs: tuple[float, ...]
    tag = "SURJECTIVE_NOISY_OR"


@dataclass(frozen=True)
class HassallBinary:
    weights: tuple[float, ...]
    tag = "HASSALL_BINARY"


Payload = Union[Ici, Pici, PiciAverage, Scm, LsSici, UsSici, DsSici, NoisyOr, NoisyMax, SurjectiveNoisyOr, HassallBinary]

PAYLOAD_TYPES = {cls.tag: cls for cls in (
    Ici, Pici, PiciAverage, Scm, LsSici, UsSici, DsSici, NoisyOr, NoisyMax, SurjectiveNoisyOr, HassallBinary)}
VARIANTS = tuple(PAYLOAD_TYPES)

# variants whose local graph has one mechanism per parent
BIJECTIVE_VARIANTS = ("ICI", "PICI", "PICI_AVERAGE", "NOISY_OR", "NOISY_MAX", "HASSALL_BINARY")
SURJECTIVE_VARIANTS = ("LS_SICI", "US_SICI", "DS_SICI", "SURJECTIVE_NOISY_OR")
INHIBITOR_VARIANTS = ("NOISY_OR", "SURJECTIVE_NOISY_OR")


@dataclass(frozen=True)
class LocalSpec:
    child: VariableDecl
    parents: tuple[VariableDecl, ...]
    payload: Payload
    mechanism_names: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        payload = self.payload
        for name in ("mechanism_cpts", "block_cpts", "block_gates", "inhibitor_probs",
                     "block_inhibitor_probs", "weights"):
            if hasattr(payload, name) and not isinstance(getattr(payload, name), tuple):
                object.__setattr__(payload, name, tuple(getattr(payload, name)))
        if not self.parents:
            raise SpecError("a local structure needs at least one parent", "parents")
        names = [p.name for p in self.parents] + [self.child.name]
        if len(set(names)) != len(names):
            raise SpecError(f"variable names must be unique, got {names}")
        if self.mechanism_names is None:
            object.__setattr__(self, "mechanism_names", _default_mechanism_names(self.mechanism_count, set(names), self.tag))
        else:
            object.__setattr__(self, "mechanism_names", tuple(self.mechanism_names))
            if len(self.mechanism_names) != self.mechanism_count:
                raise SpecError(f"expected {self.mechanism_count} mechanism names, got {len(self.mechanism_names)}",
                                "mechanisms")
            clash = set(self.mechanism_names) & set(names)
            if clash or len(set(self.mechanism_names)) != len(self.mechanism_names):
                raise SpecError(f"mechanism names must be unique and distinct from variables: {sorted(clash)}",
                                "mechanisms")
        _check(self)

    @property
    def tag(self) -> str:
        return self.payload.tag

    @property
    def n(self) -> int:
        return len(self.parents)

    @property
    def parent_spaces(self) -> tuple[StateSpace, ...]:
        return tuple(p.space for p in self.parents)

    @property
    def phi(self) -> Surjection:
        if hasattr(self.payload, "phi"):
            return self.payload.phi
        if self.tag == "SCM":
            return Surjection.single_block(self.n)
        return Surjection.identity(self.n)

    @property
    def mechanism_count(self) -> int:
        return self.phi.m

    @property
    def mechanism_spaces(self) -> tuple[StateSpace, ...]:
        p = self.payload
        if isinstance(p, (Ici, Pici, PiciAverage, NoisyMax)):
            return tuple(c.child_space for c in p.mechanism_cpts)
        if isinstance(p, (UsSici, DsSici)):
            return tuple(c.child_space for c in p.block_cpts)
        if isinstance(p, LsSici):
            return tuple(g.output_space for g in p.block_gates)
        if isinstance(p, Scm):
            return (p.gate.output_space,)
        return (BINARY,) * self.mechanism_count

    @property
    def mechanisms(self) -> tuple[VariableDecl, ...]:
        return tuple(VariableDecl(name, space, "mechanism")
                     for name, space in zip(self.mechanism_names, self.mechanism_spaces))

    @property
    def inhibitor_names(self) -> tuple[str, ...]:
        if self.tag not in INHIBITOR_VARIANTS:
            return ()
        taken = {p.name for p in self.parents} | {self.child.name} | set(self.mechanism_names)
        return _fresh_names("I", self.mechanism_count, taken)

    def block_spaces(self, i: int) -> tuple[StateSpace, ...]:
        return tuple(self.parents[j].space for j in self.phi.blocks[i])


def _fresh_names(prefix, count, taken):
    names = []
    for i in range(1, count + 1):
        name = f"{prefix}{i}"
        while name in taken:
            name += "_"
        names.append(name)
    return tuple(names)


def _default_mechanism_names(m, taken, tag):
    if tag == "SCM":
        name = "M"
        while name in taken:
            name += "_"
        return (name,)
    return _fresh_names("M", m, taken)


def _require(condition, message, path=None, error=SpecError):
    if not condition:
        raise error(message, path)


def _check_mechanism_cpts(spec, cpts, field):
    _require(len(cpts) == spec.n, f"expected {spec.n} mechanism CPTs, got {len(cpts)}", field, ShapeError)
    for i, (cpt, parent) in enumerate(zip(cpts, spec.parents)):
        _require(cpt.parent_spaces == (parent.space,),
                 f"mechanism CPT must be conditioned on the single parent {parent.name} with space {parent.space!r}",
                 f"{field}[{i}]")


def _check_block_cpts(spec, cpts, field):
    phi = spec.phi
    _require(len(cpts) == phi.m, f"expected {phi.m} block CPTs, got {len(cpts)}", field, ShapeError)
    for i, cpt in enumerate(cpts):
        _require(cpt.parent_spaces == spec.block_spaces(i),
                 f"block CPT parent spaces {cpt.parent_spaces} do not match block spaces {spec.block_spaces(i)}",
                 f"{field}[{i}]")


def _check_block_gates(spec, gates, field):
    phi = spec.phi
    _require(len(gates) == phi.m, f"expected {phi.m} block gates, got {len(gates)}", field, ShapeError)
    for i, gate in enumerate(gates):
        _require(gate.input_spaces == spec.block_spaces(i),
                 f"block gate input spaces {gate.input_spaces} do not match block spaces {spec.block_spaces(i)}",
                 f"{field}[{i}]")


def _check_lower_cpt(spec, cpt, field="lower_cpt"):
    _require(cpt.parent_spaces == spec.mechanism_spaces,
             f"lower CPT parent spaces {cpt.parent_spaces} differ from mechanism spaces {spec.mechanism_spaces}", field)
    _require(cpt.child_space == spec.child.space,
             f"lower CPT child space {cpt.child_space!r} differs from child space {spec.child.space!r}", field)


def _check_lower_gate(spec, gate, field="lower_gate"):
    _require(gate.input_spaces == spec.mechanism_spaces,
             f"lower gate input spaces {gate.input_spaces} differ from mechanism spaces {spec.mechanism_spaces}", field)
    _require(gate.output_space == spec.child.space,
             f"gate output space {gate.output_space!r} differs from child space {spec.child.space!r}", field)


def _check_all_binary(spec):
    for v in spec.parents + (spec.child,):
        _require(v.space.is_binary, f"{spec.tag} requires binary variables; {v.name} has {v.space.cardinality} states")


def _check_probs(probs, count, field):
    _require(len(probs) == count, f"expected {count} probabilities, got {len(probs)}", field, ShapeError)
    for i, p in enumerate(probs):
        _require(0.0 <= p <= 1.0, f"probability {p} outside [0, 1]", f"{field}[{i}]")


def _check(spec: LocalSpec):
    p = spec.payload
    pl = "payload."
    if isinstance(p, (Ici, Pici, PiciAverage, NoisyMax)):
        _check_mechanism_cpts(spec, p.mechanism_cpts, pl + "mechanism_cpts")
    if isinstance(p, (UsSici, DsSici)):
        _require(p.phi.n == spec.n, f"surjection covers {p.phi.n} parents, spec has {spec.n}", pl + "phi")
        _check_block_cpts(spec, p.block_cpts, pl + "block_cpts")
    if isinstance(p, (LsSici, SurjectiveNoisyOr)):
        _require(p.phi.n == spec.n, f"surjection covers {p.phi.n} parents, spec has {spec.n}", pl + "phi")
        _check_block_gates(spec, p.block_gates, pl + "block_gates")
    if isinstance(p, (Pici, LsSici, DsSici)):
        _check_lower_cpt(spec, p.lower_cpt, pl + "lower_cpt")
    if isinstance(p, (Ici, UsSici)):
        _check_lower_gate(spec, p.lower_gate, pl + "lower_gate")
    if isinstance(p, (PiciAverage, NoisyMax)):
        for i, space in enumerate(spec.mechanism_spaces):
            _require(space == spec.child.space,
                     f"{spec.tag} needs every mechanism space equal to the child space {spec.child.space!r}",
                     f"{pl}mechanism_cpts[{i}]")
    if isinstance(p, Scm):
        _require(p.gate.input_spaces == spec.parent_spaces,
                 f"SCM gate input spaces {p.gate.input_spaces} differ from parent spaces", pl + "gate")
        _require(p.lower_cpt.parent_spaces == (p.gate.output_space,),
                 f"gate output space {p.gate.output_space!r} differs from lower CPT parent space", pl + "lower_cpt")
        _require(p.lower_cpt.child_space == spec.child.space, "lower CPT child space differs from child space",
                 pl + "lower_cpt")
    if isinstance(p, NoisyOr):
        _check_all_binary(spec)
        _check_probs(p.inhibitor_probs, spec.n, pl + "inhibitor_probs")
    if isinstance(p, SurjectiveNoisyOr):
        _check_all_binary(spec)
        for i, gate in enumerate(p.block_gates):
            _require(gate.output_space.is_binary, "block gates must be binary-valued", f"{pl}block_gates[{i}]")
        _check_probs(p.block_inhibitor_probs, p.phi.m, pl + "block_inhibitor_probs")
    if isinstance(p, HassallBinary):
        _check_all_binary(spec)
        _require(len(p.weights) == spec.n, f"expected {spec.n} weights, got {len(p.weights)}", pl + "weights",
                 ShapeError)
        for i, w in enumerate(p.weights):
            _require(np.isfinite(w) and w > 0, f"weight {w} must be strictly positive", f"{pl}weights[{i}]")


def embedded_tables(spec: LocalSpec) -> list[tuple[str, Cpt]]:
    """Every quantitative table carried by the spec, with its field path."""
    p = spec.payload
    tables = []
    for field in ("mechanism_cpts", "block_cpts"):
        for i, cpt in enumerate(getattr(p, field, ())):
            tables.append((f"payload.{field}[{i}]", cpt))
    if hasattr(p, "lower_cpt"):
        tables.append(("payload.lower_cpt", p.lower_cpt))
    return tables


def table_violations(spec: LocalSpec, tolerance: float = 1e-9) -> list[tuple[str, object]]:
    return [(path, v) for path, cpt in embedded_tables(spec) for v in validate_cpt(cpt, tolerance)]


def spec_warnings(spec: LocalSpec) -> list[str]:
    """Legal but questionable modelling choices."""
    warnings = []
    for name, space in zip(spec.mechanism_names, spec.mechanism_spaces):
        if space != spec.child.space and spec.tag != "SCM":
            warnings.append(f"mechanism {name} has space {list(space.states)}, child has {list(spec.child.space.states)}")
    if spec.tag == "LS_SICI" and spec.phi.is_bijective:
        warnings.append("LS_SICI with a bijective surjection (m = n) models every parent-to-mechanism link "
                        "deterministically; consider ICI/PICI instead")
    return warnings


def normalize_tables(spec: LocalSpec) -> LocalSpec:
    """Copy with every embedded table row-normalised."""
    p = spec.payload
    changes = {}
    for field in ("mechanism_cpts", "block_cpts"):
        if hasattr(p, field):
            changes[field] = tuple(c.normalized() for c in getattr(p, field))
    if hasattr(p, "lower_cpt"):
        changes["lower_cpt"] = p.lower_cpt.normalized()
    return replace(spec, payload=replace(p, **changes))


def permute_parents(spec: LocalSpec, perm: Sequence[int]) -> LocalSpec:
    """The same model with parents reordered so new parent j is old parent ``perm[j]``.

    Mechanisms are renumbered by first appearance in the new order and every
    block table, gate and lower table is re-indexed to match.
    """
    perm = tuple(perm)
    if sorted(perm) != list(range(spec.n)):
        raise SpecError(f"{perm} is not a permutation of {spec.n} parents")
    p = spec.payload
    old_phi = spec.phi
    new_phi = permute_surjection(old_phi, perm)
    # old mechanism index for each new mechanism
    mech_order = []
    for j in perm:
        if old_phi.assignment[j] not in mech_order:
            mech_order.append(old_phi.assignment[j])
    within = []
    for k, new_block in enumerate(new_phi.blocks):
        old_block = old_phi.blocks[mech_order[k]]
        within.append([old_block.index(perm[j]) for j in new_block])

    def blockwise(items, method):
        return tuple(getattr(items[mech_order[k]], method)(within[k]) for k in range(new_phi.m))

    changes = {}
    if hasattr(p, "phi"):
        changes["phi"] = new_phi
    if hasattr(p, "mechanism_cpts"):
        changes["mechanism_cpts"] = tuple(p.mechanism_cpts[i] for i in mech_order)
    if hasattr(p, "block_cpts"):
        changes["block_cpts"] = blockwise(p.block_cpts, "permute_parents")
    if hasattr(p, "block_gates"):
        changes["block_gates"] = blockwise(p.block_gates, "remap_inputs")
    if hasattr(p, "lower_cpt") and not isinstance(p, Scm):
        changes["lower_cpt"] = p.lower_cpt.permute_parents(mech_order)
    if hasattr(p, "lower_gate"):
        changes["lower_gate"] = p.lower_gate.remap_inputs(mech_order)
    if isinstance(p, Scm):
        changes["gate"] = p.gate.remap_inputs(perm)
    if isinstance(p, NoisyOr):
        changes["inhibitor_probs"] = tuple(p.inhibitor_probs[i] for i in perm)
    if isinstance(p, SurjectiveNoisyOr):
        changes["block_inhibitor_probs"] = tuple(p.block_inhibitor_probs[i] for i in mech_order)
    if isinstance(p, HassallBinary):
        changes["weights"] = tuple(p.weights[i] for i in perm)
    names = tuple(spec.mechanism_names[i] for i in mech_order)
    return LocalSpec(spec.child, tuple(spec.parents[i] for i in perm), replace(p, **changes), names)
