"""Area inference: the units a sheet is organized around.

Three nested notions of "cells that belong together":

  PhysicalArea     the rectangle a grouping call reads, one per range
                   argument occurrence
  LogicalArea      formula cells that are exact copies of one another
                   after normalization
  StructuralGroup  formula cells whose trees share a shape, ignoring
                   offsets, markers, and literal values

Logical areas refine structural groups: every logical area lies within
one structural group.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .model import Formula, SpreadsheetProgram, content_kind
from .scl import (
    Call,
    CellAddress,
    CellRef,
    FormulaNode,
    RangeArg,
    RangeRef,
    Skeleton,
    iter_nodes,
    normalize,
    row_major,
    skeleton,
)

# Tie order when range content is evenly mixed: data kinds first.
_KIND_PRIORITY = ("constant", "input", "formula", "label")


@dataclass(frozen=True)
class PhysicalArea:
    """One range argument: the rectangle, who reads it, and with what."""

    rect: RangeRef
    consumer: CellAddress
    function: str
    majority_type: str | None

    def __str__(self) -> str:
        return f"{self.function} {self.rect} -> {self.consumer}"


@dataclass(frozen=True)
class LogicalArea:
    """Copy-equivalent formula cells and their bounding rectangle."""

    members: tuple[CellAddress, ...]
    key: FormulaNode
    hull: RangeRef

    def __str__(self) -> str:
        return f"{len(self.members)} copies in {self.hull}"


@dataclass(frozen=True)
class StructuralGroup:
    """Formula cells sharing a tree shape."""

    members: tuple[CellAddress, ...]
    key: Skeleton


def _majority_type(program: SpreadsheetProgram, rect: RangeRef) -> str | None:
    counts: Counter[str] = Counter()
    for addr in rect.cells():
        content = program.content(addr)
        if content is not None:
            counts[content_kind(content)] += 1
    if not counts:
        return None
    return max(counts, key=lambda kind: (counts[kind], -_KIND_PRIORITY.index(kind)))


def infer_physical_areas(program: SpreadsheetProgram) -> list[PhysicalArea]:
    """Every range a grouping call reads, in row-major consumer order.

    A formula with two range arguments yields two areas; the same
    rectangle read by two formulas yields one area per consumer.
    """
    out: list[PhysicalArea] = []
    for addr, cell in program.formula_cells():
        for node in _walk_calls(cell.ast):
            for arg in node.args:
                if isinstance(arg, RangeArg):
                    rect = arg.rng
                    assert isinstance(rect, RangeRef)
                    out.append(
                        PhysicalArea(
                            rect=rect,
                            consumer=addr,
                            function=node.name,
                            majority_type=_majority_type(program, rect),
                        )
                    )
    return out


def _walk_calls(node: FormulaNode):
    for n in iter_nodes(node):
        if isinstance(n, Call):
            yield n


def _hull(members: list[CellAddress]) -> RangeRef:
    return RangeRef(
        CellRef(min(a.col for a in members), min(a.row for a in members)),
        CellRef(max(a.col for a in members), max(a.row for a in members)),
    )


def infer_logical_areas(program: SpreadsheetProgram) -> list[LogicalArea]:
    """Maximal groups of two or more copy-equivalent formulas.

    Members need not be adjacent; the hull is the bounding rectangle.
    Each formula cell belongs to at most one area.
    """
    groups: dict[FormulaNode, list[CellAddress]] = {}
    for addr, cell in program.formula_cells():
        groups.setdefault(normalize(cell.ast, addr), []).append(addr)
    areas = [
        LogicalArea(members=tuple(members), key=key, hull=_hull(members))
        for key, members in groups.items()
        if len(members) >= 2
    ]
    areas.sort(key=lambda area: row_major(area.members[0]))
    return areas


def structural_groups(program: SpreadsheetProgram) -> list[StructuralGroup]:
    """Maximal groups of two or more shape-alike formulas."""
    groups: dict[Skeleton, list[CellAddress]] = {}
    for addr, cell in program.formula_cells():
        groups.setdefault(skeleton(cell.ast), []).append(addr)
    out = [
        StructuralGroup(members=tuple(members), key=key)
        for key, members in groups.items()
        if len(members) >= 2
    ]
    out.sort(key=lambda group: row_major(group.members[0]))
    return out
