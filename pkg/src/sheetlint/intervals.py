"""Interval arithmetic and interval-based testing.

Inputs get closed ranges instead of single numbers.  Evaluating the
sheet over intervals yields, for every formula cell, a bounding
interval B that contains every value the cell can take while each
input stays inside its range.  A test compares three things per cell:

    d   the concrete value under the current inputs
    E   the expected interval the sheet author wrote down
    B   the computed bounding interval

No symptom means d lies in E and E lies within B.  A value outside E
points at wrong inputs or a wrong formula; an E that sticks out of B
means the expectation and the computation cannot be reconciled, since
some expected values are unreachable.

Interval evaluation mirrors concrete evaluation exactly: Blank coerces
to [0, 0] in scalar arithmetic, Text faults there, and grouping
functions skip both.  With every input range collapsed to a point, B
collapses to the concrete value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Union

from .dataflow import build_graph
from .errors import SheetLintError
from .evaluator import (
    BLANK,
    Blank,
    Fault,
    FaultKind,
    Number,
    Text,
    Value,
    eval_instance,
)
from .model import (
    Constant,
    Formula,
    Input,
    Label,
    NotAnInputCell,
    SpreadsheetInstance,
    SpreadsheetProgram,
    _NUMBER_RE,
)
from .scl import (
    BinaryOp,
    Call,
    CellAddress,
    FormulaNode,
    MalformedAddress,
    Negate,
    NumberLiteral,
    RangeArg,
    Reference,
    format_number,
    parse_address,
    row_major,
)


class DivisorContainsZero(SheetLintError):
    """Interval division where the divisor straddles or touches zero."""


class EmptyAggregate(SheetLintError):
    """A grouping function over no numeric operands at all."""


class IntervalSpecError(SheetLintError):
    """An .intervals file could not be read; carries the 1-based line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NotAFormulaCell(SheetLintError):
    """An expectation targeted a cell that is not a Formula."""

    def __init__(self, address: CellAddress):
        super().__init__(f"cell {address} is not a formula cell")
        self.address = address


@dataclass(frozen=True)
class Interval:
    """A closed interval of reals; both endpoints belong to it."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"not an interval: lo={self.lo!r}, hi={self.hi!r}")

    @classmethod
    def degenerate(cls, value: float) -> "Interval":
        return cls(value, value)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __str__(self) -> str:
        return f"[{format_number(self.lo)}, {format_number(self.hi)}]"


def iv_binop(op: str, a: Interval, b: Interval) -> Interval:
    """Endpoint arithmetic for '+', '-', '*', and '/'.

    Division raises DivisorContainsZero when 0 lies in b; the result
    would be unbounded.
    """
    if op == "+":
        return Interval(a.lo + b.lo, a.hi + b.hi)
    if op == "-":
        return Interval(a.lo - b.hi, a.hi - b.lo)
    if op == "*":
        products = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
        return Interval(min(products), max(products))
    if op == "/":
        if b.lo <= 0.0 <= b.hi:
            raise DivisorContainsZero(f"divisor {b} contains zero")
        quotients = (a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi)
        return Interval(min(quotients), max(quotients))
    raise ValueError(f"unknown operator {op!r}")


def iv_negate(a: Interval) -> Interval:
    return Interval(-a.hi, -a.lo)


def iv_aggregate(name: str, items: list[Interval]) -> Interval:
    """Grouping functions lifted to intervals.

    COUNT is degenerate at the number of operands.  The others raise
    EmptyAggregate when there is nothing to group.
    """
    if name == "COUNT":
        return Interval.degenerate(float(len(items)))
    if not items:
        raise EmptyAggregate(f"{name} over no numeric cells")
    if name == "SUM":
        return Interval(sum(iv.lo for iv in items), sum(iv.hi for iv in items))
    if name == "AVG":
        total = Interval(sum(iv.lo for iv in items), sum(iv.hi for iv in items))
        return iv_binop("/", total, Interval.degenerate(float(len(items))))
    if name == "MIN":
        return Interval(min(iv.lo for iv in items), min(iv.hi for iv in items))
    if name == "MAX":
        return Interval(max(iv.lo for iv in items), max(iv.hi for iv in items))
    raise ValueError(f"unknown function {name!r}")


# ---------------------------------------------------------------------------
# Interval evaluation of whole programs

IntervalValue = Union[Interval, Fault]

_IVALUE = Union[Interval, Blank, Text, Fault]

_ZERO = Interval.degenerate(0.0)


@dataclass(frozen=True)
class IntervalSpec:
    """Input ranges and expectations for one program."""

    input_ranges: Mapping[CellAddress, Interval]
    expected: Mapping[CellAddress, Interval]


def _iv_formula(ast: FormulaNode, lookup) -> IntervalValue:
    def as_interval(raw: _IVALUE) -> IntervalValue:
        if isinstance(raw, Interval):
            return raw
        if isinstance(raw, Fault):
            return Fault(FaultKind.PROPAGATED)
        if isinstance(raw, Blank):
            return _ZERO
        return Fault(FaultKind.TYPE_ERROR)

    def evaluate(node: FormulaNode) -> _IVALUE:
        if isinstance(node, NumberLiteral):
            return Interval.degenerate(node.value)
        if isinstance(node, Reference):
            return lookup(node.ref.address())
        if isinstance(node, Negate):
            operand = as_interval(evaluate(node.child))
            if isinstance(operand, Fault):
                return operand
            return iv_negate(operand)
        if isinstance(node, BinaryOp):
            left_raw = evaluate(node.left)
            right_raw = evaluate(node.right)
            left = as_interval(left_raw)
            if isinstance(left, Fault):
                return left
            right = as_interval(right_raw)
            if isinstance(right, Fault):
                return right
            if node.op == "/" and right.lo <= 0.0 <= right.hi:
                if right.lo == right.hi:
                    return Fault(FaultKind.DIV_BY_ZERO)
                return Fault(FaultKind.DIVISOR_CONTAINS_ZERO)
            return iv_binop(node.op, left, right)
        if isinstance(node, Call):
            return aggregate(node)
        raise TypeError(f"not evaluable: {node!r}")

    def aggregate(node: Call) -> _IVALUE:
        items: list[Interval] = []
        faulted = False
        for arg in node.args:
            if isinstance(arg, RangeArg):
                for addr in arg.rng.cells():
                    raw = lookup(addr)
                    if isinstance(raw, Interval):
                        items.append(raw)
                    elif isinstance(raw, Fault):
                        faulted = True
            else:
                raw = evaluate(arg)
                if isinstance(raw, Interval):
                    items.append(raw)
                elif isinstance(raw, Fault):
                    faulted = True
        if faulted:
            return Fault(FaultKind.PROPAGATED)
        if not items and node.name != "COUNT":
            # Mirror the concrete evaluator's fault kinds so point
            # inputs collapse to identical faults.
            if node.name == "AVG":
                return Fault(FaultKind.DIV_BY_ZERO)
            return Fault(FaultKind.TYPE_ERROR)
        return iv_aggregate(node.name, items)

    result = evaluate(ast)
    if isinstance(result, (Blank, Text)):
        # A bare reference at the root still lands in a numeric cell.
        return as_interval(result)
    return result


def eval_intervals(
    program: SpreadsheetProgram, spec: IntervalSpec
) -> dict[CellAddress, IntervalValue]:
    """Bounding intervals for every numeric cell of the program.

    Constants map to degenerate intervals, inputs to their declared
    range (or a point at their default), formulas to the interval their
    tree computes, or to a Fault when it cannot.  Labels and empty
    cells do not appear in the result.

    Raises NotAnInputCell for a range on a non-input and
    CyclicDependency for cyclic programs.
    """
    for addr in spec.input_ranges:
        if not isinstance(program.content(addr), Input):
            raise NotAnInputCell(addr)
    order = build_graph(program).topo_order()
    ivalues: dict[CellAddress, _IVALUE] = {}

    def lookup(addr: CellAddress) -> _IVALUE:
        return ivalues.get(addr, BLANK)

    for addr in order:
        content = program.content(addr)
        if content is None:
            continue
        if isinstance(content, Constant):
            ivalues[addr] = Interval.degenerate(content.value)
        elif isinstance(content, Input):
            ivalues[addr] = spec.input_ranges.get(
                addr, Interval.degenerate(content.default)
            )
        elif isinstance(content, Label):
            ivalues[addr] = Text(content.text)
        else:
            ivalues[addr] = _iv_formula(content.ast, lookup)
    return {
        addr: value
        for addr, value in ivalues.items()
        if isinstance(value, (Interval, Fault))
    }


# ---------------------------------------------------------------------------
# Judging

class Verdict(Enum):
    NO_SYMPTOM = "no_symptom"
    SYMPTOM_VALUE_OUTSIDE = "value_outside"
    SYMPTOM_MODEL_MISMATCH = "model_mismatch"
    SYMPTOM_BOTH = "both"
    NOT_JUDGED = "not_judged"


SYMPTOMS = frozenset(
    {Verdict.SYMPTOM_VALUE_OUTSIDE, Verdict.SYMPTOM_MODEL_MISMATCH, Verdict.SYMPTOM_BOTH}
)


def judge(d: Value, expected: Interval, bounding: IntervalValue) -> Verdict:
    """Compare a concrete value, an expectation, and a bound.

    All endpoint comparisons are inclusive.  A faulty d is a symptom on
    both counts; a faulty bound means the expectation cannot lie within
    it.
    """
    if isinstance(d, Fault):
        return Verdict.SYMPTOM_BOTH
    value_ok = isinstance(d, Number) and expected.contains(d.value)
    model_ok = isinstance(bounding, Interval) and bounding.encloses(expected)
    if value_ok and model_ok:
        return Verdict.NO_SYMPTOM
    if model_ok:
        return Verdict.SYMPTOM_VALUE_OUTSIDE
    if value_ok:
        return Verdict.SYMPTOM_MODEL_MISMATCH
    return Verdict.SYMPTOM_BOTH


@dataclass(frozen=True)
class CellTest:
    """Outcome for one formula cell."""

    cell: CellAddress
    value: Value
    bounding: IntervalValue
    expected: Interval | None
    verdict: Verdict
    suspects: tuple[CellAddress, ...]

    @property
    def symptomatic(self) -> bool:
        return self.verdict in SYMPTOMS


@dataclass(frozen=True)
class TestReport:
    """One row per formula cell, in row-major order."""

    rows: tuple[CellTest, ...]

    def any_symptom(self) -> bool:
        return any(row.symptomatic for row in self.rows)


def run_interval_test(instance: SpreadsheetInstance, spec: IntervalSpec) -> TestReport:
    """Evaluate, bound, and judge every formula cell.

    Inputs without a declared range are held at their bound value.
    Cells without an expectation come back NOT_JUDGED.  Suspects for a
    symptomatic cell are its transitive precedents, nearest first, and
    symptomatic before clean at equal distance.
    """
    program = instance.program
    for addr in spec.expected:
        if not isinstance(program.content(addr), Formula):
            raise NotAFormulaCell(addr)
    result = eval_instance(instance)
    effective = dict(spec.input_ranges)
    for addr, _ in program.input_cells():
        if addr not in effective:
            effective[addr] = Interval.degenerate(instance.input_value(addr))
    bounds = eval_intervals(program, IntervalSpec(effective, spec.expected))
    graph = build_graph(program)

    verdicts: dict[CellAddress, Verdict] = {}
    for addr, _ in program.formula_cells():
        expected = spec.expected.get(addr)
        if expected is None:
            verdicts[addr] = Verdict.NOT_JUDGED
        else:
            verdicts[addr] = judge(result.values[addr], expected, bounds[addr])
    symptomatic = {addr for addr, v in verdicts.items() if v in SYMPTOMS}

    rows = []
    for addr, _ in program.formula_cells():
        suspects: tuple[CellAddress, ...] = ()
        if addr in symptomatic:
            suspects = _suspects(graph, addr, symptomatic)
        rows.append(
            CellTest(
                cell=addr,
                value=result.values[addr],
                bounding=bounds[addr],
                expected=spec.expected.get(addr),
                verdict=verdicts[addr],
                suspects=suspects,
            )
        )
    return TestReport(tuple(rows))


def _suspects(graph, addr: CellAddress, symptomatic: set[CellAddress]):
    distance: dict[CellAddress, int] = {}
    frontier = [addr]
    step = 0
    while frontier:
        step += 1
        nxt: list[CellAddress] = []
        for cell in frontier:
            for pre in graph.precedents(cell):
                if pre not in distance and pre != addr:
                    distance[pre] = step
                    nxt.append(pre)
        frontier = nxt
    ordered = sorted(
        distance,
        key=lambda a: (distance[a], 0 if a in symptomatic else 1, row_major(a)),
    )
    return tuple(ordered)


# ---------------------------------------------------------------------------
# The .intervals format

_SPEC_LINE_RE = re.compile(
    r"(input|expect)\s+(\S+)\s+in\s+\[([^,\]]*),([^,\]]*)\]\Z"
)


def load_interval_spec(text: str, program: SpreadsheetProgram) -> IntervalSpec:
    """Parse .intervals text against a program.

    Lines read ``input ADDR in [lo, hi]`` or ``expect ADDR in
    [lo, hi]``; blank lines and ';' comments are skipped.  Raises
    IntervalSpecError for malformed lines, NotAnInputCell for a range
    on anything but an Input, and NotAFormulaCell for an expectation on
    anything but a Formula.
    """
    input_ranges: dict[CellAddress, Interval] = {}
    expected: dict[CellAddress, Interval] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        m = _SPEC_LINE_RE.match(line)
        if m is None:
            raise IntervalSpecError(
                "expected 'input ADDR in [lo, hi]' or 'expect ADDR in [lo, hi]'",
                lineno,
            )
        keyword, addr_text, lo_text, hi_text = m.groups()
        try:
            addr = parse_address(addr_text)
        except MalformedAddress as err:
            raise IntervalSpecError(str(err), lineno) from err
        lo_text, hi_text = lo_text.strip(), hi_text.strip()
        if not _NUMBER_RE.match(lo_text) or not _NUMBER_RE.match(hi_text):
            raise IntervalSpecError(f"bad interval endpoints [{lo_text}, {hi_text}]", lineno)
        lo, hi = float(lo_text), float(hi_text)
        if lo > hi:
            raise IntervalSpecError(f"interval is empty: [{lo_text}, {hi_text}]", lineno)
        interval = Interval(lo, hi)
        if keyword == "input":
            if not isinstance(program.content(addr), Input):
                raise NotAnInputCell(addr)
            if addr in input_ranges:
                raise IntervalSpecError(f"duplicate input range for {addr}", lineno)
            input_ranges[addr] = interval
        else:
            if not isinstance(program.content(addr), Formula):
                raise NotAFormulaCell(addr)
            if addr in expected:
                raise IntervalSpecError(f"duplicate expectation for {addr}", lineno)
            expected[addr] = interval
    return IntervalSpec(input_ranges=input_ranges, expected=expected)
