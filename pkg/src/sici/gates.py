"""Deterministic combination functions as expression trees.

A :class:`Gate` wraps an expression over numbered input slots together with
the declared input spaces and the output space. Boolean operators work on
binary spaces (state 0 = false, 1 = true); MAX and MIN work on a shared
ordered space.

Textual syntax (used in spec documents)::

    expr      := call | name
    call      := op "(" expr ("," expr)* ")"
               | "not" "(" expr ")"
               | "threshold" "(" INT ";" expr ("," expr)* ")"
               | "const" "(" INT ")"
    op        := "or" | "and" | "xor" | "max" | "min"
    name      := identifier naming one of the gate's inputs

Operator names are case-insensitive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import ConfigIndexer, Cpt, StateSpace, deterministic_cpt
from .errors import GateArityError, GateSyntaxError, GateTypeError


@dataclass(frozen=True)
class Input:
    slot: int


@dataclass(frozen=True)
class Const:
    state: int


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class Or:
    operands: tuple["Expr", ...]


@dataclass(frozen=True)
class And:
    operands: tuple["Expr", ...]


@dataclass(frozen=True)
class Xor:
    operands: tuple["Expr", ...]


@dataclass(frozen=True)
class Max:
    operands: tuple["Expr", ...]


@dataclass(frozen=True)
class Min:
    operands: tuple["Expr", ...]


@dataclass(frozen=True)
class Threshold:
    k: int
    operands: tuple["Expr", ...]


Expr = Union[Input, Const, Not, Or, And, Xor, Max, Min, Threshold]

_NARY = (Or, And, Xor, Max, Min)
_BOOLEAN = (Not, Or, And, Xor, Threshold)

# sentinel type for results of boolean operators
_BOOL = "bool"


def _children(expr):
    if isinstance(expr, Not):
        return (expr.operand,)
    if isinstance(expr, (Input, Const)):
        return ()
    return expr.operands


def _infer(expr, spaces):
    """Return the value type of ``expr``: a StateSpace, _BOOL, or ("const", state)."""
    if isinstance(expr, Input):
        if not 0 <= expr.slot < len(spaces):
            raise GateArityError(f"input slot {expr.slot} not declared (gate has {len(spaces)} inputs)")
        return spaces[expr.slot]
    if isinstance(expr, Const):
        if expr.state < 0:
            raise GateTypeError(f"constant state {expr.state} is negative")
        return ("const", expr.state)
    children = _children(expr)
    if not children:
        raise GateArityError(f"{type(expr).__name__} needs at least one operand")
    types = [_infer(c, spaces) for c in children]
    if isinstance(expr, _BOOLEAN):
        for t in types:
            if not _is_binary_type(t):
                raise GateTypeError(f"{type(expr).__name__.upper()} applied to non-binary operand {t!r}")
        if isinstance(expr, Threshold) and expr.k < 0:
            raise GateTypeError(f"threshold {expr.k} is negative")
        return _BOOL
    # MAX / MIN
    concrete = {t for t in types if isinstance(t, StateSpace)}
    if len(concrete) > 1:
        raise GateTypeError(f"{type(expr).__name__.upper()} operands have different spaces: {sorted(map(repr, concrete))}")
    if concrete:
        (space,) = concrete
        for t in types:
            if t == _BOOL and not space.is_binary:
                raise GateTypeError(f"boolean operand mixed with non-binary space {space!r}")
            if isinstance(t, tuple) and t[1] >= space.cardinality:
                raise GateTypeError(f"constant {t[1]} out of range for {space!r}")
        return space
    if _BOOL in types:
        for t in types:
            if isinstance(t, tuple) and t[1] > 1:
                raise GateTypeError(f"constant {t[1]} mixed with boolean operands")
        return _BOOL
    states = [t[1] for t in types]
    return ("const", max(states) if isinstance(expr, Max) else min(states))


def _is_binary_type(t):
    if t == _BOOL:
        return True
    if isinstance(t, StateSpace):
        return t.is_binary
    return t[1] in (0, 1)


@dataclass(frozen=True)
class Gate:
    expr: Expr
    input_spaces: tuple[StateSpace, ...]
    output_space: StateSpace

    def __post_init__(self):
        object.__setattr__(self, "input_spaces", tuple(self.input_spaces))
        result = _infer(self.expr, self.input_spaces)
        out = self.output_space
        if isinstance(self.expr, (Max, Min)) and isinstance(result, StateSpace) and result != out:
            raise GateTypeError(f"{type(self.expr).__name__.upper()} operands range over {result!r}, output space is {out!r}")
        if isinstance(result, StateSpace) and result.cardinality != out.cardinality:
            raise GateTypeError(f"gate yields values in {result!r}, output space is {out!r}")
        if result == _BOOL and not out.is_binary:
            raise GateTypeError(f"boolean gate needs a binary output space, got {out!r}")
        if isinstance(result, tuple) and result[1] >= out.cardinality:
            raise GateTypeError(f"constant {result[1]} out of range for output {out!r}")

    @property
    def arity(self) -> int:
        return len(self.input_spaces)

    def remap_inputs(self, old_slot_for_new: Sequence[int]) -> Gate:
        """Gate over reordered inputs: new slot j carries what old slot ``old_slot_for_new[j]`` did."""
        new_for_old = {old: new for new, old in enumerate(old_slot_for_new)}
        spaces = tuple(self.input_spaces[old] for old in old_slot_for_new)
        return Gate(_remap(self.expr, new_for_old), spaces, self.output_space)


def _remap(expr, mapping):
    if isinstance(expr, Input):
        return Input(mapping[expr.slot])
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Not):
        return Not(_remap(expr.operand, mapping))
    if isinstance(expr, Threshold):
        return Threshold(expr.k, tuple(_remap(c, mapping) for c in expr.operands))
    return type(expr)(tuple(_remap(c, mapping) for c in expr.operands))


# -- evaluation -------------------------------------------------------------

def _eval(expr, inputs):
    if isinstance(expr, Input):
        return inputs[expr.slot]
    if isinstance(expr, Const):
        return expr.state
    if isinstance(expr, Not):
        return 1 - _eval(expr.operand, inputs)
    values = [_eval(c, inputs) for c in expr.operands]
    if isinstance(expr, Or):
        return int(any(values))
    if isinstance(expr, And):
        return int(all(values))
    if isinstance(expr, Xor):
        return sum(values) % 2
    if isinstance(expr, Max):
        return max(values)
    if isinstance(expr, Min):
        return min(values)
    if isinstance(expr, Threshold):
        return int(sum(values) >= expr.k)
    raise TypeError(f"unknown gate node {expr!r}")


def eval_gate(gate: Gate, inputs: Sequence[int]) -> int:
    """Output state index of ``gate`` for one input configuration."""
    if len(inputs) != gate.arity:
        raise GateArityError(f"gate takes {gate.arity} inputs, got {len(inputs)}")
    for value, space in zip(inputs, gate.input_spaces):
        if not 0 <= value < space.cardinality:
            raise GateArityError(f"input value {value} out of range for {space!r}")
    return int(_eval(gate.expr, tuple(int(v) for v in inputs)))


def _eval_columns(expr, columns):
    """Vectorised evaluation over an array of configurations (one column per input)."""
    if isinstance(expr, Input):
        return columns[:, expr.slot]
    if isinstance(expr, Const):
        return np.full(columns.shape[0], expr.state, dtype=np.int64)
    if isinstance(expr, Not):
        return 1 - _eval_columns(expr.operand, columns)
    values = np.stack([_eval_columns(c, columns) for c in expr.operands])
    if isinstance(expr, Or):
        return values.max(axis=0)
    if isinstance(expr, And):
        return values.min(axis=0)
    if isinstance(expr, Xor):
        return values.sum(axis=0) % 2
    if isinstance(expr, Max):
        return values.max(axis=0)
    if isinstance(expr, Min):
        return values.min(axis=0)
    if isinstance(expr, Threshold):
        return (values.sum(axis=0) >= expr.k).astype(np.int64)
    raise TypeError(f"unknown gate node {expr!r}")


def gate_outputs(gate: Gate) -> np.ndarray:
    """Output state for every input configuration, in canonical row order."""
    configs = ConfigIndexer(gate.input_spaces).config_array()
    return np.asarray(_eval_columns(gate.expr, configs), dtype=np.int64).reshape(-1)


def gate_to_cpt(gate: Gate) -> Cpt:
    return deterministic_cpt(gate.input_spaces, gate.output_space, gate_outputs(gate))


# -- convenience constructors ----------------------------------------------

def _inputs(n):
    return tuple(Input(i) for i in range(n))


def or_gate(spaces, output=None) -> Gate:
    spaces = tuple(spaces)
    return Gate(Or(_inputs(len(spaces))), spaces, output or StateSpace.binary())


def and_gate(spaces, output=None) -> Gate:
    spaces = tuple(spaces)
    return Gate(And(_inputs(len(spaces))), spaces, output or StateSpace.binary())


def max_gate(spaces, output=None) -> Gate:
    spaces = tuple(spaces)
    return Gate(Max(_inputs(len(spaces))), spaces, output or spaces[0])


def identity_gate(space, output=None) -> Gate:
    return Gate(Input(0), (space,), output or space)


# -- text syntax ------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_.\-]*)|(?P<punct>[(),;]))")
_OPS = {"or": Or, "and": And, "xor": Xor, "max": Max, "min": Min}


def _tokenize(text):
    pos, tokens = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise GateSyntaxError(f"unexpected character {text[pos:pos + 1]!r} at column {pos + 1} in {text!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text, names):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.names = {name: i for i, name in enumerate(names)}

    def error(self, message):
        if self.pos < len(self.tokens):
            col = self.tokens[self.pos][2] + 1
            return GateSyntaxError(f"{message} at column {col} in {self.text!r}")
        return GateSyntaxError(f"{message} at end of {self.text!r}")

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None, None)

    def take(self, value=None, kind=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            raise self.error(f"expected {value or kind}")
        self.pos += 1
        return tok

    def parse(self):
        expr = self.expr()
        if self.pos != len(self.tokens):
            raise self.error("trailing input")
        return expr

    def operands(self):
        items = [self.expr()]
        while self.peek()[1] == ",":
            self.take(",")
            items.append(self.expr())
        self.take(")")
        return tuple(items)

    def expr(self):
        kind, value, _ = self.take(kind="name") if self.peek()[0] == "name" else (None, None, None)
        if kind is None:
            raise self.error("expected operator or input name")
        if self.peek()[1] != "(":
            if value not in self.names:
                self.pos -= 1
                raise self.error(f"unknown input {value!r}")
            return Input(self.names[value])
        op = value.lower()
        self.take("(")
        if op in _OPS:
            return _OPS[op](self.operands())
        if op == "not":
            operand = self.expr()
            self.take(")")
            return Not(operand)
        if op == "threshold":
            k = int(self.take(kind="int")[1])
            self.take(";")
            return Threshold(k, self.operands())
        if op == "const":
            state = int(self.take(kind="int")[1])
            self.take(")")
            return Const(state)
        self.pos -= 2
        raise self.error(f"unknown operator {value!r}")


def parse_expr(text: str, names: Sequence[str]) -> Expr:
    return _Parser(text, list(names)).parse()


def parse_gate(text: str, names: Sequence[str], input_spaces: Sequence[StateSpace], output_space: StateSpace) -> Gate:
    """Parse ``text`` with ``names[i]`` bound to input slot ``i``."""
    return Gate(parse_expr(text, names), tuple(input_spaces), output_space)


def format_expr(expr: Expr, names: Sequence[str]) -> str:
    if isinstance(expr, Input):
        return names[expr.slot]
    if isinstance(expr, Const):
        return f"const({expr.state})"
    if isinstance(expr, Not):
        return f"not({format_expr(expr.operand, names)})"
    args = ", ".join(format_expr(c, names) for c in expr.operands)
    if isinstance(expr, Threshold):
        return f"threshold({expr.k}; {args})"
    return f"{type(expr).__name__.lower()}({args})"


def format_gate(gate: Gate, names: Sequence[str]) -> str:
    return format_expr(gate.expr, names)
