"""Concrete evaluation of spreadsheet instances.

Every non-empty cell evaluates to one of four values:

    Number  the only value formulas compute with
    Blank   the value read from an empty cell
    Text    the value of a Label cell
    Fault   evaluation failed; the kind says how

Scalar arithmetic coerces Blank to 0 and treats Text as a type fault.
Grouping functions instead skip Blank and Text cells in their ranges.
Both departures from plain arithmetic are recorded as runtime notes so
callers can surface them.  Faults travel: an operation over a faulty
operand yields Fault(PROPAGATED).

A formula therefore never evaluates to Blank or Text.  A bare reference
as the whole formula body goes through the same scalar coercion at the
root.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Union

from .dataflow import CyclicDependency, build_graph
from .model import Constant, Formula, Input, Label, SpreadsheetInstance
from .scl import (
    BinaryOp,
    Call,
    CellAddress,
    FormulaNode,
    Negate,
    NumberLiteral,
    RangeArg,
    Reference,
    row_major,
)


class FaultKind(Enum):
    DIV_BY_ZERO = "div_by_zero"
    TYPE_ERROR = "type_error"
    CYCLE = "cycle"
    PROPAGATED = "propagated"
    # Interval evaluation shares this fault type; the kind below never
    # comes out of the concrete evaluator.
    DIVISOR_CONTAINS_ZERO = "divisor_contains_zero"


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Blank:
    pass


@dataclass(frozen=True)
class Text:
    text: str


@dataclass(frozen=True)
class Fault:
    kind: FaultKind


Value = Union[Number, Blank, Text, Fault]

BLANK = Blank()


class NoteKind(Enum):
    BLANK_IN_ARITHMETIC = "blank_in_arithmetic"
    SKIPPED_NON_NUMERIC = "skipped_non_numeric"
    DIV_BY_ZERO = "div_by_zero"
    TYPE_ERROR = "type_error"


@dataclass(frozen=True)
class RuntimeNote:
    """One noteworthy event during evaluation.

    ``cell`` is the formula where it surfaced; ``subject`` is the
    referenced cell that triggered it, when one did.
    """

    kind: NoteKind
    cell: CellAddress
    subject: CellAddress | None = None


@dataclass(frozen=True)
class EvalResult:
    """Values for every non-empty cell plus notes in evaluation order."""

    values: Mapping[CellAddress, Value]
    notes: tuple[RuntimeNote, ...]


_Lookup = Callable[[CellAddress], Value]


def _content_value(content, addr: CellAddress, instance: SpreadsheetInstance) -> Value:
    if isinstance(content, Constant):
        return Number(content.value)
    if isinstance(content, Input):
        return Number(instance.input_value(addr))
    if isinstance(content, Label):
        return Text(content.text)
    raise TypeError(f"not a plain cell: {content!r}")


def _eval_formula(
    ast: FormulaNode,
    host: CellAddress,
    lookup: _Lookup,
    notes: list[RuntimeNote],
) -> Value:
    def subject_of(node: FormulaNode) -> CellAddress | None:
        return node.ref.address() if isinstance(node, Reference) else None

    def as_number(raw: Value, node: FormulaNode) -> Union[float, Fault]:
        """Coerce an operand for scalar arithmetic."""
        if isinstance(raw, Number):
            return raw.value
        if isinstance(raw, Fault):
            return Fault(FaultKind.PROPAGATED)
        if isinstance(raw, Blank):
            notes.append(RuntimeNote(NoteKind.BLANK_IN_ARITHMETIC, host, subject_of(node)))
            return 0.0
        notes.append(RuntimeNote(NoteKind.TYPE_ERROR, host, subject_of(node)))
        return Fault(FaultKind.TYPE_ERROR)

    def evaluate(node: FormulaNode) -> Value:
        if isinstance(node, NumberLiteral):
            return Number(node.value)
        if isinstance(node, Reference):
            return lookup(node.ref.address())
        if isinstance(node, Negate):
            operand = as_number(evaluate(node.child), node.child)
            if isinstance(operand, Fault):
                return operand
            return Number(-operand)
        if isinstance(node, BinaryOp):
            left_raw = evaluate(node.left)
            right_raw = evaluate(node.right)
            left = as_number(left_raw, node.left)
            if isinstance(left, Fault):
                return left
            right = as_number(right_raw, node.right)
            if isinstance(right, Fault):
                return right
            if node.op == "+":
                return Number(left + right)
            if node.op == "-":
                return Number(left - right)
            if node.op == "*":
                return Number(left * right)
            if right == 0.0:
                notes.append(RuntimeNote(NoteKind.DIV_BY_ZERO, host, subject_of(node.right)))
                return Fault(FaultKind.DIV_BY_ZERO)
            return Number(left / right)
        if isinstance(node, Call):
            return aggregate(node)
        raise TypeError(f"not evaluable: {node!r}")

    def aggregate(node: Call) -> Value:
        items: list[float] = []
        faulted = False
        for arg in node.args:
            if isinstance(arg, RangeArg):
                for addr in arg.rng.cells():
                    raw = lookup(addr)
                    if isinstance(raw, Number):
                        items.append(raw.value)
                    elif isinstance(raw, Fault):
                        faulted = True
                    else:
                        notes.append(
                            RuntimeNote(NoteKind.SKIPPED_NON_NUMERIC, host, addr)
                        )
            else:
                raw = evaluate(arg)
                if isinstance(raw, Number):
                    items.append(raw.value)
                elif isinstance(raw, Fault):
                    faulted = True
                else:
                    notes.append(
                        RuntimeNote(NoteKind.SKIPPED_NON_NUMERIC, host, subject_of(arg))
                    )
        if faulted:
            return Fault(FaultKind.PROPAGATED)
        return apply_function(node.name, items)

    def apply_function(name: str, items: list[float]) -> Value:
        if name == "COUNT":
            return Number(float(len(items)))
        if not items:
            # AVG divides by the count, so emptiness surfaces as its
            # division fault; the others have no value to give at all.
            if name == "AVG":
                notes.append(RuntimeNote(NoteKind.DIV_BY_ZERO, host, None))
                return Fault(FaultKind.DIV_BY_ZERO)
            notes.append(RuntimeNote(NoteKind.TYPE_ERROR, host, None))
            return Fault(FaultKind.TYPE_ERROR)
        if name == "SUM":
            return Number(sum(items))
        if name == "AVG":
            return Number(sum(items) / len(items))
        if name == "MIN":
            return Number(min(items))
        return Number(max(items))

    result = evaluate(ast)
    if isinstance(result, (Blank, Text)):
        # A bare reference at the root still lands in a numeric cell.
        coerced = as_number(result, ast)
        return coerced if isinstance(coerced, Fault) else Number(coerced)
    return result


def eval_instance(instance: SpreadsheetInstance) -> EvalResult:
    """Evaluate every cell, precedents first.

    Raises CyclicDependency when formulas form a reference loop.
    """
    program = instance.program
    order = build_graph(program).topo_order()
    values: dict[CellAddress, Value] = {}
    notes: list[RuntimeNote] = []

    def lookup(addr: CellAddress) -> Value:
        return values.get(addr, BLANK)

    for addr in order:
        content = program.content(addr)
        if content is None:
            continue
        if isinstance(content, Formula):
            values[addr] = _eval_formula(content.ast, addr, lookup, notes)
        else:
            values[addr] = _content_value(content, addr, instance)
    return EvalResult(values, tuple(notes))


_PENDING = object()


def eval_cell(
    instance: SpreadsheetInstance,
    addr: CellAddress,
    memo: dict[CellAddress, Value] | None = None,
) -> Value:
    """Evaluate one cell on demand, without touching the rest.

    Agrees with eval_instance on every cell.  Pass the same ``memo``
    dict across calls against one instance to share work.  Raises
    CyclicDependency when the cell sits on a reference loop.
    """
    if memo is None:
        memo = {}
    notes: list[RuntimeNote] = []
    stack: list[CellAddress] = []

    def get(a: CellAddress) -> Value:
        cached = memo.get(a)
        if cached is _PENDING:
            start = stack.index(a)
            cycle = stack[start:]
            pivot = cycle.index(min(cycle, key=row_major))
            raise CyclicDependency(cycle[pivot:] + cycle[:pivot])
        if cached is not None:
            return cached
        content = instance.program.content(a)
        if content is None:
            memo[a] = BLANK
            return BLANK
        if isinstance(content, Formula):
            memo[a] = _PENDING
            stack.append(a)
            value = _eval_formula(content.ast, a, get, notes)
            stack.pop()
            memo[a] = value
            return value
        value = _content_value(content, a, instance)
        memo[a] = value
        return value

    return get(addr)
