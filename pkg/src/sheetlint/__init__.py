"""Fault detection and interval-based testing for spreadsheet programs."""

from .errors import SheetLintError
from .scl import (
    CellAddress,
    CellRef,
    RangeRef,
    parse_address,
    parse_formula,
    render,
    normalize,
    skeleton,
)
from .model import (
    Constant,
    Input,
    Formula,
    Label,
    SpreadsheetProgram,
    SpreadsheetInstance,
    instantiate,
    load_program,
    render_program,
)
from .dataflow import CyclicDependency, DependencyGraph, build_graph
from .evaluator import (
    Blank,
    EvalResult,
    Fault,
    FaultKind,
    Number,
    Text,
    eval_cell,
    eval_instance,
)
from .areas import (
    LogicalArea,
    PhysicalArea,
    StructuralGroup,
    infer_logical_areas,
    infer_physical_areas,
    structural_groups,
)
from .detectors import Code, Diagnostic, Severity, detect_all
from .intervals import (
    Interval,
    IntervalSpec,
    TestReport,
    Verdict,
    eval_intervals,
    iv_aggregate,
    iv_binop,
    judge,
    load_interval_spec,
    run_interval_test,
)

__version__ = "0.1.0"

__all__ = [
    "SheetLintError",
    "CellAddress",
    "CellRef",
    "RangeRef",
    "parse_address",
    "parse_formula",
    "render",
    "normalize",
    "skeleton",
    "Constant",
    "Input",
    "Formula",
    "Label",
    "SpreadsheetProgram",
    "SpreadsheetInstance",
    "instantiate",
    "load_program",
    "render_program",
    "CyclicDependency",
    "DependencyGraph",
    "build_graph",
    "Blank",
    "EvalResult",
    "Fault",
    "FaultKind",
    "Number",
    "Text",
    "eval_cell",
    "eval_instance",
    "LogicalArea",
    "PhysicalArea",
    "StructuralGroup",
    "infer_logical_areas",
    "infer_physical_areas",
    "structural_groups",
    "Code",
    "Diagnostic",
    "Severity",
    "detect_all",
    "Interval",
    "IntervalSpec",
    "TestReport",
    "Verdict",
    "eval_intervals",
    "iv_aggregate",
    "iv_binop",
    "judge",
    "load_interval_spec",
    "run_interval_test",
]
