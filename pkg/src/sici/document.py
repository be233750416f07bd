"""JSON spec documents and CPT files.

A spec document looks like::

    {
      "schema_version": "1.0",
      "child": {"name": "Y", "states": ["0", "1"]},
      "parents": [{"name": "X1", "states": ["0", "1"]}, ...],
      "variant": "LS_SICI",
      "mechanisms": [{"name": "M1", "states": ["0", "1"]}, ...],   # optional
      "payload": {
        "surjection": {"M1": ["X1", "X2"], "M2": ["X3"]},
        "block_gates": {"M1": "or(X1, X2)", "M2": "X3"},
        "lower_cpt": [[0.9, 0.1], ...]
      },
      "ambient": {"nodes": ["V1"], "edges": [["V1", "X1"]]}        # optional
    }

CPTs are lists of rows in canonical order (first parent most significant).
Per-mechanism tables, gates, inhibitor probabilities and weights are objects
keyed by mechanism (or, for weights and noisy-OR probabilities, parent) name.
Gates use the textual gate grammar of :mod:`sici.gates`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence

import numpy as np

from .core import BINARY, ConfigIndexer, Cpt, StateSpace, VariableDecl
from .errors import DocumentError, GateError, NonSurjectiveError, ShapeError, SiciError
from .gates import format_gate, parse_gate
from .model import (
    BIJECTIVE_VARIANTS, DsSici, HassallBinary, Ici, LocalSpec, LsSici, NoisyMax, NoisyOr, PAYLOAD_TYPES,
    Pici, PiciAverage, Scm, SurjectiveNoisyOr, UsSici,
)
from .structure import Dag
from .surjection import Surjection

SCHEMA_VERSION = "1.0"
_FIXED_BINARY = ("NOISY_OR", "SURJECTIVE_NOISY_OR", "HASSALL_BINARY")


@dataclass(frozen=True)
class SpecDocument:
    spec: LocalSpec
    ambient_nodes: tuple[str, ...] = ()
    ambient_edges: tuple[tuple[str, str], ...] = ()
    schema_version: str = SCHEMA_VERSION

    @property
    def has_ambient(self) -> bool:
        return bool(self.ambient_nodes or self.ambient_edges)

    def ambient_dag(self) -> Dag | None:
        if not self.has_ambient:
            return None
        return _ambient_graph(self.ambient_nodes, self.ambient_edges)


def _ambient_graph(nodes, edges) -> Dag:
    # endpoints need not be declared: parents and the child usually are not listed
    endpoints = [v for e in edges for v in e]
    return Dag(list(nodes) + endpoints, edges)


# ---------------------------------------------------------------- parsing

def _need(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise DocumentError(f"missing field {key!r}", path, "E_MISSING_FIELD")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise DocumentError(f"field {key!r} has the wrong type ({type(value).__name__})", f"{path}.{key}".lstrip("."),
                            "E_BAD_FIELD")
    return value


def _join(path, key):
    return f"{path}.{key}" if path else key


def _space(obj, path) -> StateSpace:
    states = _need(obj, "states", path, list)
    try:
        return StateSpace(tuple(str(s) for s in states))
    except SiciError as exc:
        raise DocumentError(str(exc), _join(path, "states"), "E_BAD_FIELD") from None


def _variable(obj, path, kind) -> VariableDecl:
    name = _need(obj, "name", path, str)
    return VariableDecl(name, _space(obj, path), kind)


def _rows(value, parent_spaces, child_space, path) -> Cpt:
    n_rows = ConfigIndexer(parent_spaces).size
    width = child_space.cardinality
    if not isinstance(value, list):
        raise DocumentError("a CPT must be a list of rows", path, "E_BAD_FIELD")
    if len(value) != n_rows:
        raise ShapeError(f"expected {n_rows} rows, got {len(value)}", path)
    for r, row in enumerate(value):
        if not isinstance(row, list):
            raise DocumentError("a CPT row must be a list of numbers", f"{path}[{r}]", "E_BAD_FIELD")
        if len(row) != width:
            raise ShapeError(f"expected {width} entries (one per child state), got {len(row)}", f"{path}[{r}]")
        for c, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise DocumentError(f"entry {x!r} is not a number", f"{path}[{r}][{c}]", "E_BAD_FIELD")
    rows = np.array(value, dtype=np.float64).reshape(n_rows, width)
    return Cpt(tuple(parent_spaces), child_space, rows)


def _number(x, path) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise DocumentError(f"{x!r} is not a finite number", path, "E_BAD_FIELD")
    return float(x)


def _keyed(obj, names, path, what):
    if not isinstance(obj, dict):
        raise DocumentError(f"{what} must be an object keyed by name", path, "E_BAD_FIELD")
    unknown = [k for k in obj if k not in names]
    if unknown:
        raise DocumentError(f"unknown name(s) {unknown}; expected {list(names)}", path, "E_UNKNOWN_NAME")
    missing = [k for k in names if k not in obj]
    if missing:
        raise DocumentError(f"missing entries for {missing}", path, "E_MISSING_FIELD")
    return [obj[k] for k in names]


def _gate(text, names, spaces, out, path):
    if not isinstance(text, str):
        raise DocumentError("a gate must be given as text", path, "E_BAD_FIELD")
    try:
        return parse_gate(text, names, spaces, out)
    except GateError as exc:
        raise type(exc)(str(exc), path) from None


def _surjection(obj, parent_names, mech_decls, path):
    """Mechanism name -> list of parent names; returns (mechanism names, Surjection)."""
    if not isinstance(obj, dict):
        raise DocumentError("surjection must map mechanism names to parent lists", path, "E_BAD_FIELD")
    if mech_decls is not None:
        names = [m.name for m in mech_decls]
        unknown = [k for k in obj if k not in names]
        if unknown:
            raise DocumentError(f"surjection names undeclared mechanism(s) {unknown}", path, "E_UNKNOWN_NAME")
        missing = [k for k in names if not obj.get(k)]
        if missing:
            raise NonSurjectiveError(f"mechanism(s) {missing} receive no parent", path)
    else:
        names = list(obj)
        empty = [k for k in names if not obj[k]]
        if empty:
            raise NonSurjectiveError(f"mechanism(s) {empty} receive no parent", path)
    assignment: dict[int, int] = {}
    for i, name in enumerate(names):
        members = obj[name]
        if not isinstance(members, list):
            raise DocumentError("block must be a list of parent names", _join(path, name), "E_BAD_FIELD")
        for p in members:
            if p not in parent_names:
                raise DocumentError(f"unknown parent {p!r}", _join(path, name), "E_UNKNOWN_NAME")
            j = parent_names.index(p)
            if j in assignment:
                raise DocumentError(f"parent {p!r} is assigned to more than one mechanism", path, "E_BAD_FIELD")
            assignment[j] = i
    unassigned = [parent_names[j] for j in range(len(parent_names)) if j not in assignment]
    if unassigned:
        raise DocumentError(f"parent(s) {unassigned} are not assigned to any mechanism", path, "E_BAD_FIELD")
    return names, Surjection(tuple(assignment[j] for j in range(len(parent_names))), len(names))


def spec_from_dict(data: Any) -> SpecDocument:
    if not isinstance(data, dict):
        raise DocumentError("document must be a JSON object", None, "E_BAD_FIELD")
    version = _need(data, "schema_version", "", str)
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION!r})",
                            "schema_version", "E_SCHEMA_VERSION")
    child = _variable(_need(data, "child", "", dict), "child", "child")
    parent_objs = _need(data, "parents", "", list)
    if not parent_objs:
        raise DocumentError("at least one parent is required", "parents", "E_BAD_FIELD")
    parents = tuple(_variable(p, f"parents[{j}]", "parent") for j, p in enumerate(parent_objs))
    parent_names = [p.name for p in parents]
    pspaces = [p.space for p in parents]
    variant = _need(data, "variant", "", str)
    if variant not in PAYLOAD_TYPES:
        raise DocumentError(f"unknown variant {variant!r}; expected one of {sorted(PAYLOAD_TYPES)}",
                            "variant", "E_UNKNOWN_VARIANT")
    mech_decls = None
    if "mechanisms" in data:
        objs = _need(data, "mechanisms", "", list)
        mech_decls = [_variable(m, f"mechanisms[{i}]", "mechanism") for i, m in enumerate(objs)]
    payload_obj = _need(data, "payload", "", dict)
    pp = "payload"

    def field(key, kind=None):
        return _need(payload_obj, key, pp, kind)

    if variant in BIJECTIVE_VARIANTS:
        if mech_decls is not None and len(mech_decls) != len(parents):
            raise DocumentError(f"{variant} needs one mechanism per parent ({len(parents)}), got {len(mech_decls)}",
                                "mechanisms", "E_BAD_FIELD")
        mnames = [m.name for m in mech_decls] if mech_decls else [f"M{i + 1}" for i in range(len(parents))]
        phi = Surjection.identity(len(parents))
    elif variant == "SCM":
        if mech_decls is not None and len(mech_decls) != 1:
            raise DocumentError("SCM has exactly one mechanism", "mechanisms", "E_BAD_FIELD")
        mnames = [mech_decls[0].name] if mech_decls else ["M"]
        phi = Surjection.single_block(len(parents))
    else:
        mnames, phi = _surjection(field("surjection"), parent_names, mech_decls, _join(pp, "surjection"))
        if mech_decls is not None:
            mech_decls = [next(m for m in mech_decls if m.name == name) for name in mnames]
    if variant in _FIXED_BINARY:
        mspaces = [BINARY] * len(mnames)
    elif mech_decls is not None:
        mspaces = [m.space for m in mech_decls]
    else:
        mspaces = [child.space] * len(mnames)
    blocks = phi.blocks
    block_names = [[parent_names[j] for j in b] for b in blocks]
    block_spaces = [[pspaces[j] for j in b] for b in blocks]

    def tables(key, per_block):
        path = _join(pp, key)
        values = _keyed(field(key), mnames, path, key)
        return tuple(_rows(v, block_spaces[i] if per_block else [pspaces[i]], mspaces[i], f"{path}.{mnames[i]}")
                     for i, v in enumerate(values))

    def lower_cpt():
        return _rows(field("lower_cpt"), mspaces, child.space, _join(pp, "lower_cpt"))

    def lower_gate():
        return _gate(field("lower_gate"), mnames, mspaces, child.space, _join(pp, "lower_gate"))

    def block_gates():
        path = _join(pp, "block_gates")
        values = _keyed(field("block_gates"), mnames, path, "block_gates")
        return tuple(_gate(v, block_names[i], block_spaces[i], mspaces[i], f"{path}.{mnames[i]}")
                     for i, v in enumerate(values))

    def numbers(key, names):
        path = _join(pp, key)
        values = _keyed(field(key), names, path, key)
        return tuple(_number(v, f"{path}.{n}") for n, v in zip(names, values))

    if variant == "ICI":
        payload = Ici(tables("mechanism_cpts", False), lower_gate())
    elif variant == "PICI":
        payload = Pici(tables("mechanism_cpts", False), lower_cpt())
    elif variant == "PICI_AVERAGE":
        payload = PiciAverage(tables("mechanism_cpts", False))
    elif variant == "NOISY_MAX":
        payload = NoisyMax(tables("mechanism_cpts", False))
    elif variant == "SCM":
        gate = _gate(field("gate"), parent_names, pspaces, mspaces[0], _join(pp, "gate"))
        payload = Scm(gate, lower_cpt())
    elif variant == "LS_SICI":
        payload = LsSici(phi, block_gates(), lower_cpt())
    elif variant == "US_SICI":
        payload = UsSici(phi, tables("block_cpts", True), lower_gate())
    elif variant == "DS_SICI":
        payload = DsSici(phi, tables("block_cpts", True), lower_cpt())
    elif variant == "NOISY_OR":
        payload = NoisyOr(numbers("inhibitor_probs", parent_names))
    elif variant == "SURJECTIVE_NOISY_OR":
        payload = SurjectiveNoisyOr(phi, block_gates(), numbers("block_inhibitor_probs", mnames))
    else:
        payload = HassallBinary(numbers("weights", parent_names))
    spec = LocalSpec(child, parents, payload, tuple(mnames))

    nodes, edges = (), ()
    if "ambient" in data:
        amb = _need(data, "ambient", "", dict)
        nodes = tuple(str(v) for v in amb.get("nodes", []))
        raw = amb.get("edges", [])
        if not isinstance(raw, list) or any(not isinstance(e, list) or len(e) != 2 for e in raw):
            raise DocumentError("edges must be a list of [from, to] pairs", "ambient.edges", "E_BAD_FIELD")
        edges = tuple((str(a), str(b)) for a, b in raw)
    return SpecDocument(spec, nodes, edges, version)


def parse_document(text: str) -> SpecDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", None, "E_SYNTAX") from None
    return spec_from_dict(data)


def parse_spec(text: str) -> LocalSpec:
    return parse_document(text).spec


def parse_ambient(text: str) -> Dag:
    """Standalone ambient file: ``{"nodes": [...], "edges": [[a, b], ...]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", None, "E_SYNTAX") from None
    if isinstance(data, dict) and "ambient" in data:
        data = data["ambient"]
    edges = _need(data, "edges", "", list)
    if any(not isinstance(e, list) or len(e) != 2 for e in edges):
        raise DocumentError("edges must be a list of [from, to] pairs", "edges", "E_BAD_FIELD")
    return _ambient_graph([str(v) for v in data.get("nodes", [])], [(str(a), str(b)) for a, b in edges])


# ----------------------------------------------------------- serializing

def _var(decl: VariableDecl) -> dict:
    return {"name": decl.name, "states": list(decl.space.states)}


def _table(cpt: Cpt) -> list:
    return [[float(x) for x in row] for row in cpt.rows]


def spec_to_dict(doc: SpecDocument | LocalSpec) -> dict:
    if isinstance(doc, LocalSpec):
        doc = SpecDocument(doc)
    spec = doc.spec
    p = spec.payload
    pnames = [x.name for x in spec.parents]
    mnames = list(spec.mechanism_names)
    blocks = [[pnames[j] for j in b] for b in spec.phi.blocks]
    out: dict[str, Any] = {
        "schema_version": doc.schema_version,
        "child": _var(spec.child),
        "parents": [_var(x) for x in spec.parents],
        "variant": spec.tag,
    }
    if spec.tag not in _FIXED_BINARY:
        out["mechanisms"] = [_var(m) for m in spec.mechanisms]
    elif mnames != _default_names(spec):
        out["mechanisms"] = [{"name": m, "states": list(BINARY.states)} for m in mnames]
    payload: dict[str, Any] = {}
    if hasattr(p, "phi"):
        payload["surjection"] = dict(zip(mnames, blocks))
    if hasattr(p, "mechanism_cpts"):
        payload["mechanism_cpts"] = {m: _table(c) for m, c in zip(mnames, p.mechanism_cpts)}
    if hasattr(p, "block_cpts"):
        payload["block_cpts"] = {m: _table(c) for m, c in zip(mnames, p.block_cpts)}
    if hasattr(p, "block_gates"):
        payload["block_gates"] = {m: format_gate(g, b) for m, g, b in zip(mnames, p.block_gates, blocks)}
    if isinstance(p, Scm):
        payload["gate"] = format_gate(p.gate, pnames)
    if hasattr(p, "lower_gate"):
        payload["lower_gate"] = format_gate(p.lower_gate, mnames)
    if hasattr(p, "lower_cpt"):
        payload["lower_cpt"] = _table(p.lower_cpt)
    if isinstance(p, NoisyOr):
        payload["inhibitor_probs"] = dict(zip(pnames, p.inhibitor_probs))
    if isinstance(p, SurjectiveNoisyOr):
        payload["block_inhibitor_probs"] = dict(zip(mnames, p.block_inhibitor_probs))
    if isinstance(p, HassallBinary):
        payload["weights"] = dict(zip(pnames, p.weights))
    out["payload"] = payload
    if doc.has_ambient:
        out["ambient"] = {"nodes": list(doc.ambient_nodes), "edges": [list(e) for e in doc.ambient_edges]}
    return out


def _default_names(spec):
    if spec.tag in BIJECTIVE_VARIANTS:
        return [f"M{i + 1}" for i in range(spec.n)]
    return None  # surjective variants always name mechanisms through the surjection


def serialize_spec(doc: SpecDocument | LocalSpec) -> str:
    return json.dumps(spec_to_dict(doc), indent=2) + "\n"


# -------------------------------------------------------------- CPT files

class NamedCpt(NamedTuple):
    cpt: Cpt
    parent_names: tuple[str, ...]
    child_name: str


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def cpt_to_csv(cpt: Cpt, parent_names: Sequence[str], child_name: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(parent_names) + [f"{child_name}={s}" for s in cpt.child_space.states])
    for config, row in zip(cpt.indexer.configs(), cpt.rows):
        labels = [sp.states[v] for sp, v in zip(cpt.parent_spaces, config)]
        w.writerow(labels + [_fmt(x) for x in row])
    return buf.getvalue()


def cpt_to_dict(cpt: Cpt, parent_names: Sequence[str], child_name: str) -> dict:
    return {
        "parents": [{"name": n, "states": list(s.states)} for n, s in zip(parent_names, cpt.parent_spaces)],
        "child": {"name": child_name, "states": list(cpt.child_space.states)},
        "rows": _table(cpt),
    }


def cpt_to_json(cpt: Cpt, parent_names: Sequence[str], child_name: str) -> str:
    return json.dumps(cpt_to_dict(cpt, parent_names, child_name), indent=2) + "\n"


def write_cpt(cpt: Cpt, parent_names, child_name, fmt: str = "csv") -> str:
    if fmt == "csv":
        return cpt_to_csv(cpt, parent_names, child_name)
    if fmt == "json":
        return cpt_to_json(cpt, parent_names, child_name)
    raise ValueError(f"unknown format {fmt!r}")


def cpt_from_dict(data: Any) -> NamedCpt:
    parents = tuple(_variable(p, f"parents[{j}]", "parent") for j, p in enumerate(_need(data, "parents", "", list)))
    child = _variable(_need(data, "child", "", dict), "child", "child")
    cpt = _rows(_need(data, "rows", "", list), [p.space for p in parents], child.space, "rows")
    return NamedCpt(cpt, tuple(p.name for p in parents), child.name)


def cpt_from_csv(text: str) -> NamedCpt:
    records = [r for r in csv.reader(io.StringIO(text)) if r]
    if not records:
        raise DocumentError("empty CPT file", None, "E_SYNTAX")
    header, data = records[0], records[1:]
    if "=" not in header[-1]:
        raise DocumentError("last header column must read <child>=<state>", "header", "E_SYNTAX")
    child_name = header[-1].split("=", 1)[0]
    prefix = child_name + "="
    k = len(header)
    while k > 0 and header[k - 1].startswith(prefix):
        k -= 1
    parent_names, states = tuple(header[:k]), tuple(h[len(prefix):] for h in header[k:])
    for r, rec in enumerate(data):
        if len(rec) != len(header):
            raise ShapeError(f"expected {len(header)} columns, got {len(rec)}", f"row {r + 1}")
    # canonical order starts at state 0 everywhere, so first appearance gives the state order
    labels = [list(dict.fromkeys(rec[j] for rec in data)) for j in range(k)]
    try:
        pspaces = [StateSpace(tuple(ls)) for ls in labels]
        child_space = StateSpace(states)
    except SiciError as exc:
        raise DocumentError(str(exc), "header", "E_BAD_FIELD") from None
    indexer = ConfigIndexer(pspaces)
    if len(data) != indexer.size:
        raise ShapeError(f"expected {indexer.size} data rows, got {len(data)}", "rows")
    rows = np.empty((len(data), len(states)))
    for r, rec in enumerate(data):
        config = tuple(sp.index(v) for sp, v in zip(pspaces, rec[:k]))
        if indexer.index_of(config) != r:
            raise DocumentError("rows are not in canonical order", f"row {r + 1}", "E_BAD_FIELD")
        try:
            rows[r] = [float(x) for x in rec[k:]]
        except ValueError:
            raise DocumentError("non-numeric probability", f"row {r + 1}", "E_BAD_FIELD") from None
    return NamedCpt(Cpt(tuple(pspaces), child_space, rows), parent_names, child_name)


def read_cpt(text: str) -> NamedCpt:
    """CPT file in either format; JSON is recognised by its leading brace."""
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", None, "E_SYNTAX") from None
        return cpt_from_dict(data)
    return cpt_from_csv(text)
