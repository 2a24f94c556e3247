"""Lowering: turn a typechecked model into an executable CausalModel."""

from __future__ import annotations

from .. import intrinsics
from ..engine import CausalModel, Law
from ..errors import CmlError, UnknownIntrinsicError
from .ast_nodes import Call
from .parser import parse
from .typecheck import TypedModel, typecheck

_BUILTIN_FUNCS = frozenset({"abs", "abs2", "re", "im", "conj", "exp", "cos",
                            "sin", "sqrt", "sum", "len", "laplacian",
                            "complex"})


def _check_intrinsics_known(node):
    if isinstance(node, Call):
        if node.func not in _BUILTIN_FUNCS and intrinsics.get(node.func) is None:
            raise UnknownIntrinsicError(node.func)
    if isinstance(node, list):
        for x in node:
            _check_intrinsics_known(x)
        return
    if hasattr(node, "__dataclass_fields__"):
        from dataclasses import fields as dc_fields
        for f in dc_fields(node):
            if f.name in ("loc", "ty"):
                continue
            _check_intrinsics_known(getattr(node, f.name))


def lower(typed: TypedModel) -> CausalModel:
    """Package a typechecked model for the engine, laws in declaration order."""
    ast = typed.ast
    for law in ast.laws:
        _check_intrinsics_known(law.guard)
        _check_intrinsics_known(law.body)
    laws = tuple(
        Law(name=law.name, guard=law.guard, transition=law.body,
            uses_random=typed.uses_random[law.name])
        for law in ast.laws)
    init = tuple((a.target.id, a.value) for a in ast.init)
    consts = {n: v for n, (_, v) in typed.schema.constants.items()}
    return CausalModel(name=typed.name, schema=typed.schema, laws=laws,
                       init=init, halt=ast.halt, default_timestep=1.0,
                       consts=consts)


def compile_model(source: str):
    """parse + typecheck + lower. Returns (CausalModel | None, diagnostics)."""
    ast, diags = parse(source)
    if ast is None:
        return None, diags
    typed, tdiags = typecheck(ast)
    diags = diags + [d for d in tdiags if d not in diags]
    if typed is None:
        return None, diags
    return lower(typed), diags


def load_model(source: str) -> CausalModel:
    """Compile CML source, raising CmlError with diagnostics on failure."""
    model, diags = compile_model(source)
    if model is None:
        raise CmlError([d for d in diags if d.severity == "error"])
    return model
