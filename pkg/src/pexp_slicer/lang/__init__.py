"""The probabilistic language: expressions, programs, states, syntax."""

from .exprs import (
    ArithExpr,
    BoolExpr,
    UnboundVariableError,
    eval_arith,
    eval_bool,
    format_arith,
    format_bool,
    format_fraction,
)
from .state import State, StateSpace, VarDomain, state_update
from .syntax import (
    SKIP,
    Assign,
    Cond,
    Inst,
    MissingAnnotationError,
    PChoice,
    Prog,
    Skip,
    TotalLoopAnnotation,
    While,
    prog,
)
from .parser import (
    Mode,
    ParseError,
    ParseResult,
    parse_arith,
    parse_bool,
    parse_expectation,
    parse_program,
    parse_prog,
)
from .printer import format_file, format_inst, pretty_print
from .portion import is_portion_of

__all__ = [
    "ArithExpr",
    "Assign",
    "BoolExpr",
    "Cond",
    "Inst",
    "MissingAnnotationError",
    "Mode",
    "PChoice",
    "ParseError",
    "ParseResult",
    "Prog",
    "SKIP",
    "Skip",
    "State",
    "StateSpace",
    "TotalLoopAnnotation",
    "UnboundVariableError",
    "VarDomain",
    "While",
    "eval_arith",
    "eval_bool",
    "format_arith",
    "format_bool",
    "format_file",
    "format_fraction",
    "format_inst",
    "is_portion_of",
    "parse_arith",
    "parse_bool",
    "parse_expectation",
    "parse_program",
    "parse_prog",
    "pretty_print",
    "prog",
    "state_update",
]
