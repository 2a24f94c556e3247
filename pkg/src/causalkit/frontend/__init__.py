"""Frontend for the Causal Model Language: lexer, parser, typechecker, lowering."""

from .ast_nodes import Diagnostic, Loc, ModelAst, format_model, structurally_equal
from .parser import parse, parse_expression
from .typecheck import TypedModel, typecheck
from .lower import lower, load_model, compile_model

__all__ = [
    "Diagnostic",
    "Loc",
    "ModelAst",
    "format_model",
    "structurally_equal",
    "parse",
    "parse_expression",
    "typecheck",
    "TypedModel",
    "lower",
    "load_model",
    "compile_model",
]
