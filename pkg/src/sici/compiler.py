"""Materialise the CPT of Y given its parents for every model variant.

Every sum over mechanism configurations is done by exhaustive enumeration:
``_upper_probabilities`` builds P(m | x) for all parent configurations and all
mechanism configurations (product over blocks), and ``_total_probability``
accumulates ``P(m | x) * p(y | m)`` one mechanism configuration at a time in
canonical order. Deterministic lower layers are just 0/1 tables fed through
the same accumulation, so a model with a deterministic table and the
corresponding gate model produce bit-identical output.

Cost per variant with N = prod(parent cards), K = prod(mechanism cards),
C = child card: ICI/PICI/US/DS/noisy-OR/noisy-MAX O(N*K*C); LS-SICI and SCM
O(N*m) (row lookup); Hassall O(N*n).
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .core import BINARY, ConfigIndexer, Cpt, StateSpace, VariableDecl
from .errors import SpecError, WeightRangeError
from .gates import And, Gate, Input, Max, Not, Or, eval_gate, gate_outputs, gate_to_cpt
from .model import (
    DsSici, HassallBinary, Ici, LocalSpec, LsSici, NoisyMax, NoisyOr, Pici, PiciAverage, Scm,
    SurjectiveNoisyOr, UsSici,
)

HASSALL_WEIGHT_TOLERANCE = 1e-12


def _block_row_indices(configs: np.ndarray, block: Sequence[int], spaces: Sequence[StateSpace]) -> np.ndarray:
    """Row index into a block table for every full parent configuration."""
    index = np.zeros(configs.shape[0], dtype=np.int64)
    for j in block:
        index = index * spaces[j].cardinality + configs[:, j]
    return index


def _upper_probabilities(parent_spaces, blocks, block_tables) -> np.ndarray:
    """P(m | x) as an array of shape (prod parent cards, prod mechanism cards).

    Mechanism configurations are in canonical order (first mechanism most
    significant); each entry is the product over blocks of p(m_i | x_(i)).
    """
    configs = ConfigIndexer(parent_spaces).config_array()
    upper = np.ones((configs.shape[0], 1))
    for block, table in zip(blocks, block_tables):
        rows = np.asarray(table.rows)[_block_row_indices(configs, block, parent_spaces)]
        upper = (upper[:, :, None] * rows[:, None, :]).reshape(configs.shape[0], -1)
    return upper


def _total_probability(upper: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """sum_m P(m | x) p(y | m), accumulated over m in canonical order."""
    out = np.zeros((upper.shape[0], lower.shape[1]))
    for k in range(upper.shape[1]):
        out += upper[:, k, None] * lower[k][None, :]
    return out


def _mechanism_image(spec: LocalSpec, gates: Sequence[Gate]) -> np.ndarray:
    """Mechanism-configuration index reached by each parent configuration under deterministic block gates."""
    configs = ConfigIndexer(spec.parent_spaces).config_array()
    index = np.zeros(configs.shape[0], dtype=np.int64)
    for block, gate in zip(spec.phi.blocks, gates):
        outputs = gate_outputs(gate)
        index = index * gate.output_space.cardinality + outputs[_block_row_indices(configs, block, spec.parent_spaces)]
    return index


def _expect(spec, *payload_types):
    if not isinstance(spec.payload, payload_types):
        names = ", ".join(t.tag for t in payload_types)
        raise SpecError(f"expected a {names} spec, got {spec.tag}")


def _result(spec, rows) -> Cpt:
    return Cpt(spec.parent_spaces, spec.child.space, rows)


def _singletons(n):
    return [(j,) for j in range(n)]


def compile_ici(spec: LocalSpec) -> Cpt:
    """p(y|x) = sum over m with f(m) = y of prod_i p(m_i | x_i)."""
    _expect(spec, Ici)
    p = spec.payload
    if p.lower_gate.output_space != spec.child.space:
        raise SpecError("gate output space differs from child space", "payload.lower_gate")
    upper = _upper_probabilities(spec.parent_spaces, _singletons(spec.n), p.mechanism_cpts)
    return _result(spec, _total_probability(upper, gate_to_cpt(p.lower_gate).rows))


def compile_pici(spec: LocalSpec) -> Cpt:
    """p(y|x) = sum_m p(y|m) prod_i p(m_i | x_i)."""
    _expect(spec, Pici, PiciAverage)
    p = spec.payload
    lower = p.lower_cpt if isinstance(p, Pici) else pici_average_lower(spec.n, spec.child.space)
    if lower.parent_spaces != spec.mechanism_spaces:
        raise SpecError("lower CPT parent spaces differ from mechanism spaces", "payload.lower_cpt")
    upper = _upper_probabilities(spec.parent_spaces, _singletons(spec.n), p.mechanism_cpts)
    return _result(spec, _total_probability(upper, lower.rows))


def pici_average_lower(n: int, space: StateSpace) -> Cpt:
    """p(y | m) = (number of mechanisms equal to y) / n, over n mechanisms sharing ``space``."""
    if n < 1:
        raise SpecError("PICI average needs at least one mechanism")
    configs = ConfigIndexer([space] * n).config_array()
    counts = np.stack([(configs == y).sum(axis=1) for y in range(space.cardinality)], axis=1)
    return Cpt((space,) * n, space, counts / n)


def compile_pici_average(spec: LocalSpec) -> Cpt:
    return compile_pici(spec)


def compile_scm(spec: LocalSpec) -> Cpt:
    """p(y|x) = p(y | M = f(x)); each output row is a row of the lower table."""
    _expect(spec, Scm)
    p = spec.payload
    if p.lower_cpt.parent_spaces != (p.gate.output_space,):
        raise SpecError("gate output space differs from lower CPT parent space", "payload.lower_cpt")
    return _result(spec, np.asarray(p.lower_cpt.rows)[gate_outputs(p.gate)])


def compile_ls_sici(spec: LocalSpec) -> Cpt:
    """p(y|x) = p(y | m = f(x)) with m_i = f_(i)(x_(i))."""
    _expect(spec, LsSici)
    p = spec.payload
    return _result(spec, np.asarray(p.lower_cpt.rows)[_mechanism_image(spec, p.block_gates)])


def compile_ds_sici(spec: LocalSpec) -> Cpt:
    """p(y|x) = sum_m p(y|m) prod_i p(m_i | x_(i))."""
    _expect(spec, DsSici)
    p = spec.payload
    upper = _upper_probabilities(spec.parent_spaces, spec.phi.blocks, p.block_cpts)
    return _result(spec, _total_probability(upper, p.lower_cpt.rows))


def compile_us_sici(spec: LocalSpec) -> Cpt:
    """p(y|x) = sum over m with f(m) = y of prod_i p(m_i | x_(i))."""
    _expect(spec, UsSici)
    p = spec.payload
    if p.lower_gate.output_space != spec.child.space:
        raise SpecError("gate output space differs from child space", "payload.lower_gate")
    upper = _upper_probabilities(spec.parent_spaces, spec.phi.blocks, p.block_cpts)
    return _result(spec, _total_probability(upper, gate_to_cpt(p.lower_gate).rows))


def noisy_or_mechanism_cpt(p: float, space: StateSpace = BINARY) -> Cpt:
    """Inhibitor folded into the mechanism table: X=0 -> (1, 0), X=1 -> (p, 1-p)."""
    return Cpt((space,), BINARY, [[1.0, 0.0], [p, 1.0 - p]])


def noisy_or_as_ici(spec: LocalSpec) -> LocalSpec:
    _expect(spec, NoisyOr)
    cpts = tuple(noisy_or_mechanism_cpt(q, x.space) for q, x in zip(spec.payload.inhibitor_probs, spec.parents))
    gate = Gate(Or(tuple(Input(i) for i in range(spec.n))), (BINARY,) * spec.n, spec.child.space)
    return LocalSpec(spec.child, spec.parents, Ici(cpts, gate), spec.mechanism_names)


def compile_noisy_or(spec: LocalSpec) -> Cpt:
    """ICI with mechanism tables X=1 -> (p_i, 1-p_i) and an OR gate; P(Y=0|x) = prod over active x_i of p_i."""
    return compile_ici(noisy_or_as_ici(spec))


def inhibited_mechanism_gate(space: StateSpace = BINARY) -> Gate:
    """M = X and not I, inputs ordered (X, I)."""
    return Gate(And((Input(0), Not(Input(1)))), (space, BINARY), BINARY)


def noisy_or_explicit_inhibitors(spec: LocalSpec) -> Cpt:
    """Noisy-OR computed on the inhibitor form: roots I_i with P(I_i=1) = p_i, M_i = X_i and not I_i, Y = OR(M).

    Sums out the inhibitors configuration by configuration.
    """
    _expect(spec, NoisyOr)
    probs = spec.payload.inhibitor_probs
    mech_gates = [inhibited_mechanism_gate(x.space) for x in spec.parents]
    lower = Gate(Or(tuple(Input(i) for i in range(spec.n))), (BINARY,) * spec.n, spec.child.space)
    indexer = ConfigIndexer(spec.parent_spaces)
    rows = np.zeros((indexer.size, spec.child.space.cardinality))
    inhibitor_configs = list(itertools.product((0, 1), repeat=spec.n))
    weights = [math.prod(q if i else 1.0 - q for q, i in zip(probs, inh)) for inh in inhibitor_configs]
    for r, x in enumerate(indexer.configs()):
        for inh, weight in zip(inhibitor_configs, weights):
            m = [eval_gate(g, (xi, ii)) for g, xi, ii in zip(mech_gates, x, inh)]
            rows[r, eval_gate(lower, m)] += weight
    return _result(spec, rows)


def noisy_max_as_ici(spec: LocalSpec) -> LocalSpec:
    _expect(spec, NoisyMax)
    space = spec.child.space
    for i, cpt in enumerate(spec.payload.mechanism_cpts):
        if cpt.child_space != space:
            raise SpecError("noisy-MAX needs every mechanism on the child's ordered space",
                            f"payload.mechanism_cpts[{i}]")
    gate = Gate(Max(tuple(Input(i) for i in range(spec.n))), (space,) * spec.n, space)
    return LocalSpec(spec.child, spec.parents, Ici(spec.payload.mechanism_cpts, gate), spec.mechanism_names)


def compile_noisy_max(spec: LocalSpec) -> Cpt:
    """ICI with the MAX gate over the child's ordered states."""
    return compile_ici(noisy_max_as_ici(spec))


def surjective_noisy_or_block_cpt(gate: Gate, p: float) -> Cpt:
    """P(M=1 | x_(i)) = (1 - p) * f_(i)(x_(i))."""
    active = gate_outputs(gate).astype(bool)
    # active rows are written as (p, 1-p) exactly, matching the folded noisy-OR tables
    off = np.where(active, p, 1.0)
    on = np.where(active, 1.0 - p, 0.0)
    return Cpt(gate.input_spaces, BINARY, np.stack([off, on], axis=1))


def surjective_noisy_or_as_us_sici(spec: LocalSpec) -> LocalSpec:
    _expect(spec, SurjectiveNoisyOr)
    p = spec.payload
    cpts = tuple(surjective_noisy_or_block_cpt(g, q) for g, q in zip(p.block_gates, p.block_inhibitor_probs))
    gate = Gate(Or(tuple(Input(i) for i in range(p.phi.m))), (BINARY,) * p.phi.m, spec.child.space)
    return LocalSpec(spec.child, spec.parents, UsSici(p.phi, cpts, gate), spec.mechanism_names)


def compile_surjective_noisy_or(spec: LocalSpec) -> Cpt:
    """US-SICI with block tables (1 - p_i) * f_(i)(x_(i)) and an OR gate over mechanisms."""
    return compile_us_sici(surjective_noisy_or_as_us_sici(spec))


def _binary_parents(n, prefix="X"):
    return tuple(VariableDecl(f"{prefix}{i + 1}", BINARY) for i in range(n))


def compile_hassall_binary(weights, n: int | None = None, parent_spaces=None, child_space: StateSpace = BINARY) -> Cpt:
    """P(Y=1 | x) = sum_i w_i x_i / sum_i w_i, for any strictly positive weights."""
    if isinstance(weights, LocalSpec):
        _expect(weights, HassallBinary)
        spec = weights
        return compile_hassall_binary(spec.payload.weights, spec.n, spec.parent_spaces, spec.child.space)
    w = np.asarray(weights, dtype=np.float64)
    n = len(w) if n is None else n
    if w.shape != (n,):
        raise SpecError(f"expected {n} weights, got {w.size}")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise SpecError(f"weights must be strictly positive, got {w.tolist()}")
    spaces = tuple(parent_spaces) if parent_spaces is not None else (BINARY,) * n
    configs = ConfigIndexer(spaces).config_array()
    on = (configs * w).sum(axis=1) / w.sum()
    return Cpt(spaces, child_space, np.stack([1.0 - on, on], axis=1))


def hassall_table(weights) -> Cpt:
    """The generic Y | M table of the binary Hassall rule (one row per mechanism configuration)."""
    return compile_hassall_binary(weights)


def normalize_weights(weights) -> np.ndarray:
    """Scale weights so they sum to their count."""
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w <= 0):
        raise SpecError(f"weights must be strictly positive, got {w.tolist()}")
    return w * (len(w) / w.sum())


def hassall_as_pici(weights, n: int | None = None) -> LocalSpec:
    """The binary Hassall rule as a PICI model.

    Mechanisms M_i | X_i ~ Bernoulli(w_i x_i) and child Y | M ~ Bernoulli(sum m_i / sum w_i),
    with weights first scaled to sum to n. The mechanism tables are only
    valid probabilities when every scaled weight is at most 1.
    """
    if isinstance(weights, LocalSpec):
        _expect(weights, HassallBinary)
        spec = weights
        parents, child, w = spec.parents, spec.child, spec.payload.weights
    else:
        w = tuple(weights)
        n = len(w) if n is None else n
        if len(w) != n:
            raise SpecError(f"expected {n} weights, got {len(w)}")
        parents, child = _binary_parents(n), VariableDecl("Y", BINARY, "child")
    scaled = normalize_weights(w)
    too_big = [(i, float(v)) for i, v in enumerate(scaled) if v > 1.0 + HASSALL_WEIGHT_TOLERANCE]
    if too_big:
        raise WeightRangeError(
            f"normalised weights {scaled.tolist()} exceed 1 at {too_big}; Bernoulli(w_i x_i) is not a probability. "
            "Use compile_hassall_binary directly")
    scaled = np.minimum(scaled, 1.0)
    mech_cpts = tuple(Cpt((x.space,), BINARY, [[1.0, 0.0], [1.0 - v, v]]) for x, v in zip(parents, scaled))
    total = float(scaled.sum())
    configs = ConfigIndexer([BINARY] * len(parents)).config_array()
    on = configs.sum(axis=1) / total
    lower = Cpt((BINARY,) * len(parents), child.space, np.stack([1.0 - on, on], axis=1))
    return LocalSpec(child, parents, Pici(mech_cpts, lower))


_DISPATCH = {
    "ICI": compile_ici,
    "PICI": compile_pici,
    "PICI_AVERAGE": compile_pici_average,
    "SCM": compile_scm,
    "LS_SICI": compile_ls_sici,
    "US_SICI": compile_us_sici,
    "DS_SICI": compile_ds_sici,
    "NOISY_OR": compile_noisy_or,
    "NOISY_MAX": compile_noisy_max,
    "SURJECTIVE_NOISY_OR": compile_surjective_noisy_or,
    "HASSALL_BINARY": compile_hassall_binary,
}


def compile_spec(spec: LocalSpec) -> Cpt:
    """Full CPT of the child given its parents, rows in canonical order."""
    return _DISPATCH[spec.tag](spec)


def deterministic_block_cpts(gates: Sequence[Gate]) -> tuple[Cpt, ...]:
    return tuple(gate_to_cpt(g) for g in gates)


def as_ds_sici(spec: LocalSpec) -> LocalSpec:
    """Re-express LS- or US-SICI as DS-SICI by turning gates into 0/1 tables."""
    p = spec.payload
    if isinstance(p, LsSici):
        payload = DsSici(p.phi, deterministic_block_cpts(p.block_gates), p.lower_cpt)
    elif isinstance(p, UsSici):
        payload = DsSici(p.phi, p.block_cpts, gate_to_cpt(p.lower_gate))
    else:
        raise SpecError(f"cannot re-express {spec.tag} as DS_SICI")
    return LocalSpec(spec.child, spec.parents, payload, spec.mechanism_names)

