"""Parameter accounting and structural diagnostics.

Counts are of free quantitative parameters: each CPT row contributes its width
minus one, each weight or inhibitor probability contributes one. Gates and the
surjection are qualitative choices; they appear in the breakdown with a count
of zero so a report still shows what was elicited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .core import BINARY, Cpt, StateSpace, VariableDecl, cpt_entry_count
from .gates import Const, Gate, Input, Max, Or
from .model import (
    DsSici, HassallBinary, Ici, LocalSpec, LsSici, NoisyMax, NoisyOr, Pici, PiciAverage, Scm,
    SurjectiveNoisyOr, UsSici,
)
from .surjection import Surjection


class Component(NamedTuple):
    name: str
    count: int
    kind: str = "quantitative"  # or "qualitative"


@dataclass(frozen=True)
class ParamReport:
    direct_count: int
    model_count: int
    breakdown: tuple[Component, ...] = field(default=())

    @property
    def saving(self) -> int:
        return self.direct_count - self.model_count

    def lines(self) -> list[str]:
        out = [f"direct {self.direct_count}, model {self.model_count}, saving {self.saving}"]
        for c in self.breakdown:
            suffix = " (qualitative)" if c.kind == "qualitative" else ""
            out.append(f"  {c.name}: {c.count}{suffix}")
        return out

    def to_dict(self) -> dict:
        return {
            "direct_count": self.direct_count,
            "model_count": self.model_count,
            "saving": self.saving,
            "breakdown": [c._asdict() for c in self.breakdown],
        }


def _table_count(cpt: Cpt) -> int:
    return cpt_entry_count(cpt.parent_spaces, cpt.child_space)


def _gate_item(name: str) -> Component:
    return Component(name, 0, "qualitative")


def parameter_count(spec: LocalSpec) -> ParamReport:
    p = spec.payload
    mnames = spec.mechanism_names
    parts: list[Component] = []

    def tables(cpts, prefix):
        for name, cpt in zip(mnames, cpts):
            parts.append(Component(f"{prefix} {name}", _table_count(cpt)))

    if isinstance(p, (LsSici, UsSici, DsSici, SurjectiveNoisyOr)):
        parts.append(_gate_item("surjection"))
    if isinstance(p, (Ici, Pici, PiciAverage, NoisyMax)):
        tables(p.mechanism_cpts, "mechanism CPT")
        if isinstance(p, Ici):
            parts.append(_gate_item("lower gate"))
        elif isinstance(p, Pici):
            parts.append(Component("lower CPT", _table_count(p.lower_cpt)))
        elif isinstance(p, NoisyMax):
            parts.append(_gate_item("lower gate (MAX)"))
        else:
            parts.append(_gate_item("lower table (fixed average)"))
    elif isinstance(p, Scm):
        parts.append(_gate_item("upper gate"))
        parts.append(Component("lower CPT", _table_count(p.lower_cpt)))
    elif isinstance(p, LsSici):
        for name in mnames:
            parts.append(_gate_item(f"block gate {name}"))
        parts.append(Component("lower CPT", _table_count(p.lower_cpt)))
    elif isinstance(p, (UsSici, DsSici)):
        tables(p.block_cpts, "block CPT")
        if isinstance(p, UsSici):
            parts.append(_gate_item("lower gate"))
        else:
            parts.append(Component("lower CPT", _table_count(p.lower_cpt)))
    elif isinstance(p, NoisyOr):
        parts.append(Component("inhibitor probabilities", len(p.inhibitor_probs)))
        parts.append(_gate_item("lower gate (OR)"))
    elif isinstance(p, SurjectiveNoisyOr):
        for name in mnames:
            parts.append(_gate_item(f"block gate {name}"))
        parts.append(Component("inhibitor probabilities", len(p.block_inhibitor_probs)))
        parts.append(_gate_item("lower gate (OR)"))
    elif isinstance(p, HassallBinary):
        parts.append(Component("weights", len(p.weights)))
    model = sum(c.count for c in parts)
    direct = cpt_entry_count(spec.parent_spaces, spec.child.space)
    return ParamReport(direct, model, tuple(parts))


def shared_row_groups(cpt: Cpt, tolerance: float = 1e-9) -> list[tuple[int, ...]]:
    """Partition row indices into groups of equal distributions (max-norm within ``tolerance``).

    Groups are ordered by first row; a row joins the first group whose
    representative (its first row) it matches.
    """
    rows = cpt.rows
    reps: list[int] = []
    groups: list[list[int]] = []
    for r in range(rows.shape[0]):
        for g, rep in enumerate(reps):
            if np.max(np.abs(rows[r] - rows[rep])) <= tolerance:
                groups[g].append(r)
                break
        else:
            reps.append(r)
            groups.append([r])
    return [tuple(g) for g in groups]


@dataclass(frozen=True)
class Shape:
    """Cardinality profile for growth tables: every parent, mechanism and child shares these sizes."""

    parent_card: int = 2
    child_card: int = 2
    mechanism_card: int | None = None  # defaults to child_card
    block_size: int = 2  # surjective variants group parents into contiguous blocks of this size

    @property
    def mech_card(self) -> int:
        return self.child_card if self.mechanism_card is None else self.mechanism_card


class GrowthRow(NamedTuple):
    n: int
    direct_count: int
    model_count: int


def _uniform(parent_spaces, child_space) -> Cpt:
    rows = math.prod(s.cardinality for s in parent_spaces)
    return Cpt(tuple(parent_spaces), child_space, np.full((rows, child_space.cardinality), 1.0 / child_space.cardinality))


def _plain_gate(spaces, out) -> Gate:
    spaces = tuple(spaces)
    if all(s == out for s in spaces):
        return Gate(Max(tuple(Input(i) for i in range(len(spaces)))), spaces, out)
    return Gate(Const(0), spaces, out)


def canonical_spec(variant: str, n: int, shape: Shape = Shape()) -> LocalSpec:
    """A representative spec of ``variant`` with ``n`` parents and uniform tables."""
    binary = variant in ("NOISY_OR", "SURJECTIVE_NOISY_OR", "HASSALL_BINARY")
    ps = BINARY if binary else StateSpace.of_size(shape.parent_card)
    cs = BINARY if binary else StateSpace.of_size(shape.child_card)
    ms = BINARY if binary else StateSpace.of_size(shape.mech_card)
    parents = tuple(VariableDecl(f"X{i + 1}", ps) for i in range(n))
    child = VariableDecl("Y", cs, "child")
    k = max(1, shape.block_size)
    phi = Surjection(tuple(j // k for j in range(n)))
    if variant == "ICI":
        payload = Ici(tuple(_uniform((ps,), ms) for _ in range(n)), _plain_gate((ms,) * n, cs))
    elif variant == "PICI":
        payload = Pici(tuple(_uniform((ps,), ms) for _ in range(n)), _uniform((ms,) * n, cs))
    elif variant == "PICI_AVERAGE":
        payload = PiciAverage(tuple(_uniform((ps,), cs) for _ in range(n)))
    elif variant == "NOISY_MAX":
        payload = NoisyMax(tuple(_uniform((ps,), cs) for _ in range(n)))
    elif variant == "SCM":
        payload = Scm(_plain_gate((ps,) * n, ms), _uniform((ms,), cs))
    elif variant == "LS_SICI":
        gates = tuple(_plain_gate((ps,) * len(b), ms) for b in phi.blocks)
        payload = LsSici(phi, gates, _uniform((ms,) * phi.m, cs))
    elif variant in ("US_SICI", "DS_SICI"):
        cpts = tuple(_uniform((ps,) * len(b), ms) for b in phi.blocks)
        if variant == "US_SICI":
            payload = UsSici(phi, cpts, _plain_gate((ms,) * phi.m, cs))
        else:
            payload = DsSici(phi, cpts, _uniform((ms,) * phi.m, cs))
    elif variant == "NOISY_OR":
        payload = NoisyOr((0.5,) * n)
    elif variant == "SURJECTIVE_NOISY_OR":
        gates = tuple(Gate(Or(tuple(Input(i) for i in range(len(b)))), (BINARY,) * len(b), BINARY) for b in phi.blocks)
        payload = SurjectiveNoisyOr(phi, gates, (0.5,) * phi.m)
    elif variant == "HASSALL_BINARY":
        payload = HassallBinary((1.0,) * n)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return LocalSpec(child, parents, payload)


def growth_table(variant: str, n_range: Iterable[int], shape: Shape = Shape()) -> list[GrowthRow]:
    """(n, direct_count, model_count) for each n; raw numbers, no asymptotic claim."""
    out = []
    for n in n_range:
        report = parameter_count(canonical_spec(variant, int(n), shape))
        out.append(GrowthRow(int(n), report.direct_count, report.model_count))
    return out


def format_growth(rows: Sequence[GrowthRow]) -> str:
    lines = ["n,direct_count,model_count,saving"]
    lines += [f"{r.n},{r.direct_count},{r.model_count},{r.direct_count - r.model_count}" for r in rows]
    return "\n".join(lines)
