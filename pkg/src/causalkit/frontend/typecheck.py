"""Typechecker: resolves names, annotates every expression with a type,
and enforces the structural rules (bool guards, no sampling in guards,
assignments only to state fields).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import intrinsics
from ..errors import SchemaError
from ..state import Domain, StateSchema, TypeDesc, VBool, VComplex, VInt, VReal
from .ast_nodes import (
    Assign,
    Binary,
    Call,
    Diagnostic,
    DistExpr,
    Expr,
    For,
    If,
    Index,
    ListLit,
    Lit,
    Loc,
    Member,
    ModelAst,
    Name,
    RandomExpr,
    SetLit,
    TypeExpr,
    Unary,
)

_NUMERIC = ("int", "real", "complex")
_SCALAR_TYPE_NAMES = ("real", "int", "bool", "complex")

RESERVED_NAMES = ("dt", "random", "true", "false")


class _Fail(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


def _err(code: str, message: str, loc: Loc) -> _Fail:
    return _Fail(Diagnostic("error", code, message, loc))


@dataclass
class TypedModel:
    name: str
    ast: ModelAst
    schema: StateSchema
    uses_random: dict  # law name -> bool


@dataclass
class _Ctx:
    fields: dict
    consts: dict          # name -> TypeDesc
    records: dict         # name -> ((field, TypeDesc), ...)
    diags: list
    locals: dict = field(default_factory=dict)
    allow_random: bool = True
    allow_dt: bool = True
    random_ban_code: str = "random-in-guard"
    init_assigned: set | None = None  # init context: fields readable so far
    consts_val: dict = field(default_factory=dict)  # name -> Value


def typecheck(ast: ModelAst):
    """Typecheck a parsed model. Returns (TypedModel | None, diagnostics)."""
    diags: list[Diagnostic] = []

    records = _collect_records(ast, diags)
    consts_td, consts_val = _collect_consts(ast, records, diags)
    fields = _collect_fields(ast, records, consts_val, diags)
    if any(d.severity == "error" for d in diags):
        return None, diags

    try:
        schema = StateSchema(fields=fields, records=records,
                             constants={n: (consts_td[n], consts_val[n])
                                        for n in consts_td})
    except SchemaError as exc:
        diags.append(Diagnostic("error", "bad-schema", str(exc), ast.loc))
        return None, diags

    ctx = _Ctx(fields=fields, consts=consts_td, records=records, diags=diags,
               consts_val=consts_val)

    _check_init(ast, ctx)

    if ast.halt is not None:
        hctx = _Ctx(fields, consts_td, records, diags, allow_random=False,
                    allow_dt=False, random_ban_code="random-in-halt",
                    consts_val=consts_val)
        _expect_bool(ast.halt, hctx, "halt condition")

    if not ast.laws:
        diags.append(Diagnostic("error", "no-laws",
                                "model declares no laws", ast.loc))
    seen = set()
    uses_random = {}
    for law in ast.laws:
        if law.name in seen:
            diags.append(Diagnostic("error", "duplicate-name",
                                    f"duplicate law name '{law.name}'", law.loc))
        seen.add(law.name)
        gctx = _Ctx(fields, consts_td, records, diags, allow_random=False,
                    allow_dt=False, random_ban_code="random-in-guard",
                    consts_val=consts_val)
        _expect_bool(law.guard, gctx, f"guard of law '{law.name}'")
        folded = const_fold(law.guard, consts_val)
        if folded is False:
            diags.append(Diagnostic("warning", "guard-never-true",
                                    f"guard of law '{law.name}' is constantly false",
                                    law.guard.loc))
        bctx = _Ctx(fields, consts_td, records, diags, consts_val=consts_val)
        for stmt in law.body:
            _check_stmt(stmt, bctx)
        uses_random[law.name] = _scan_random(law.body)

    if any(d.severity == "error" for d in diags):
        return None, diags
    return TypedModel(ast.name, ast, schema, uses_random), diags


def check_standalone_expr(expr: Expr, schema: StateSchema):
    """Type an expression against a schema (observables, built guards)."""
    diags: list[Diagnostic] = []
    consts_td = {n: td for n, (td, _) in schema.constants.items()}
    consts_val = {n: v for n, (_, v) in schema.constants.items()}
    ctx = _Ctx(dict(schema.fields), consts_td, dict(schema.records), diags,
               allow_random=False, allow_dt=False,
               random_ban_code="random-in-observable", consts_val=consts_val)
    try:
        td = _check_expr(expr, ctx)
    except _Fail as f:
        diags.append(f.diag)
        return None, diags
    return td, diags


# --- declaration collection ---------------------------------------------------


def _collect_records(ast: ModelAst, diags) -> dict:
    names = {r.name for r in ast.records}
    records: dict = {}
    for r in ast.records:
        if r.name in records:
            diags.append(Diagnostic("error", "duplicate-name",
                                    f"duplicate record '{r.name}'", r.loc))
            continue
        fields = []
        seen = set()
        for f in r.fields:
            if f.name in seen:
                diags.append(Diagnostic("error", "duplicate-name",
                                        f"duplicate field '{f.name}' in record '{r.name}'",
                                        f.loc))
                continue
            seen.add(f.name)
            try:
                fields.append((f.name, _resolve_type(f.type_, names)))
            except _Fail as fail:
                diags.append(fail.diag)
        records[r.name] = tuple(fields)
    return records


def _collect_consts(ast: ModelAst, records, diags):
    consts_td: dict = {}
    consts_val: dict = {}
    for c in ast.consts:
        if c.name in consts_td:
            diags.append(Diagnostic("error", "duplicate-name",
                                    f"duplicate constant '{c.name}'", c.loc))
            continue
        if c.name in RESERVED_NAMES:
            diags.append(Diagnostic("error", "reserved-name",
                                    f"'{c.name}' is reserved", c.loc))
            continue
        try:
            td = _resolve_type(c.type_, set(records))
            if td.kind not in _SCALAR_TYPE_NAMES:
                raise _err("bad-type", "constants must be scalar", c.loc)
            raw = const_fold(c.value, consts_val)
            if raw is None:
                raise _err("not-constant",
                           f"initializer of constant '{c.name}' is not constant",
                           c.value.loc)
            value = _coerce_const(raw, td, c.loc)
            consts_td[c.name] = td
            consts_val[c.name] = value
        except _Fail as fail:
            diags.append(fail.diag)
    return consts_td, consts_val


def _coerce_const(raw, td: TypeDesc, loc: Loc):
    kind = td.kind
    if kind == "bool":
        if isinstance(raw, bool):
            return VBool(raw)
    elif kind == "int":
        if isinstance(raw, int) and not isinstance(raw, bool):
            return VInt(raw)
    elif kind == "real":
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return VReal(float(raw))
    elif kind == "complex":
        if isinstance(raw, (int, float, complex)) and not isinstance(raw, bool):
            return VComplex(complex(raw))
    raise _err("type-mismatch", f"constant value does not fit type {td}", loc)


def _collect_fields(ast: ModelAst, records, consts_val, diags) -> dict:
    fields: dict = {}
    for f in ast.state_fields:
        if f.name in fields:
            diags.append(Diagnostic("error", "duplicate-name",
                                    f"duplicate field '{f.name}'", f.loc))
            continue
        if f.name in RESERVED_NAMES:
            diags.append(Diagnostic("error", "reserved-name",
                                    f"'{f.name}' is reserved", f.loc))
            continue
        try:
            td = _resolve_type(f.type_, set(records))
            if f.domain is not None:
                td = _attach_domain(td, f.domain, consts_val)
            fields[f.name] = td
        except _Fail as fail:
            diags.append(fail.diag)
    return fields


def _resolve_type(t: TypeExpr, record_names: set) -> TypeDesc:
    try:
        if t.name in _SCALAR_TYPE_NAMES:
            return TypeDesc(t.name)
        if t.name == "vector":
            return TypeDesc.vector(_int_arg(t.args[0], "vector length"))
        if t.name == "cgrid":
            length = _int_arg(t.args[0], "cgrid length")
            dx = t.args[1].value
            return TypeDesc.cgrid(length, float(dx))
        if t.name == "list":
            elem = _resolve_type(t.args[0], record_names)
            bound = _int_arg(t.args[1], "list bound") if len(t.args) > 1 else None
            return TypeDesc.list_of(elem, bound)
        if t.name == "pwcollection":
            attrs = [(n, _resolve_type(ty, record_names)) for n, ty in t.attrs]
            return TypeDesc.pwcollection(attrs)
        if t.name in record_names:
            return TypeDesc.record_ref(t.name)
    except SchemaError as exc:
        raise _err("bad-type", str(exc), t.loc)
    raise _err("unknown-name", f"unknown type '{t.name}'", t.loc)


def _int_arg(lit, what: str) -> int:
    if lit.kind != "int":
        raise _err("bad-type", f"{what} must be an integer literal", lit.loc)
    return lit.value


def _attach_domain(td: TypeDesc, dom, consts_val) -> TypeDesc:
    def fold(e):
        raw = const_fold(e, consts_val)
        if raw is None or isinstance(raw, bool) and td.kind != "bool":
            raise _err("bad-domain", "domain bounds must be constant", e.loc)
        return raw

    if td.kind not in ("real", "int", "bool", "complex", "vector"):
        raise _err("bad-domain", f"type {td} cannot carry a domain", dom.loc)
    try:
        if dom.kind == "interval":
            if td.kind in ("bool", "complex"):
                raise _err("bad-domain",
                           f"{td.kind} fields need a finite value set", dom.loc)
            lo, hi = fold(dom.items[0]), fold(dom.items[1])
            domain = Domain(lo=float(lo), hi=float(hi))
        else:
            values = tuple(fold(e) for e in dom.items)
            for v in values:
                if td.kind == "int" and not isinstance(v, int):
                    raise _err("bad-domain", "int domain needs integer values",
                               dom.loc)
            domain = Domain(values=values)
    except SchemaError as exc:
        raise _err("bad-domain", str(exc), dom.loc)
    return TypeDesc(td.kind, length=td.length, dx=td.dx, element=td.element,
                    bound=td.bound, record=td.record, attrs=td.attrs,
                    domain=domain)


# --- init block ---------------------------------------------------------------


def _check_init(ast: ModelAst, ctx: _Ctx):
    assigned: set = set()
    for stmt in ast.init:
        ictx = _Ctx(ctx.fields, ctx.consts, ctx.records, ctx.diags,
                    allow_random=False, allow_dt=False,
                    random_ban_code="random-in-init", init_assigned=assigned,
                    consts_val=ctx.consts_val)
        try:
            if not isinstance(stmt.target, Name):
                raise _err("bad-init", "init assigns whole fields only",
                           stmt.loc)
            name = stmt.target.id
            if name in ctx.consts:
                raise _err("assign-to-constant",
                           f"cannot assign to constant '{name}'", stmt.loc)
            if name not in ctx.fields:
                raise _err("unknown-name", f"unknown field '{name}'", stmt.loc)
            td = _check_expr(stmt.value, ictx)
            _require_assignable(td, ctx.fields[name], stmt.loc,
                                f"field '{name}'")
            stmt.target.ty = ctx.fields[name]
            assigned.add(name)
        except _Fail as fail:
            ctx.diags.append(fail.diag)


# --- statements -----------------------------------------------------------------


def _check_stmt(stmt, ctx: _Ctx):
    try:
        if isinstance(stmt, Assign):
            target_td = _check_target(stmt.target, ctx)
            value_td = _check_expr(stmt.value, ctx)
            _require_assignable(value_td, target_td, stmt.loc, "assignment")
        elif isinstance(stmt, For):
            _check_for(stmt, ctx)
        elif isinstance(stmt, If):
            _expect_bool(stmt.cond, ctx, "if condition")
            for s in stmt.then:
                _check_stmt(s, ctx)
            for s in stmt.orelse:
                _check_stmt(s, ctx)
        else:
            raise _err("internal", f"unknown statement {type(stmt)}", stmt.loc)
    except _Fail as fail:
        ctx.diags.append(fail.diag)


def _check_for(stmt: For, ctx: _Ctx):
    src = stmt.source.id
    if src not in ctx.fields:
        raise _err("unknown-name", f"unknown field '{src}'", stmt.source.loc)
    src_td = ctx.fields[src]
    if src_td.kind != "list":
        raise _err("type-mismatch", f"'for' needs a list field, got {src_td}",
                   stmt.source.loc)
    if stmt.var in ctx.fields or stmt.var in ctx.consts or stmt.var in ctx.locals:
        raise _err("duplicate-name",
                   f"loop variable '{stmt.var}' shadows an existing name",
                   stmt.loc)
    if stmt.var in RESERVED_NAMES:
        raise _err("reserved-name", f"'{stmt.var}' is reserved", stmt.loc)
    elem = src_td.element
    elem_td = TypeDesc.record_ref(elem) if isinstance(elem, str) else elem
    stmt.source.ty = src_td
    inner = _Ctx(ctx.fields, ctx.consts, ctx.records, ctx.diags,
                 locals={**ctx.locals, stmt.var: elem_td},
                 allow_random=ctx.allow_random, allow_dt=ctx.allow_dt,
                 random_ban_code=ctx.random_ban_code,
                 consts_val=ctx.consts_val)
    for s in stmt.body:
        _check_stmt(s, inner)


def _check_target(target: Expr, ctx: _Ctx) -> TypeDesc:
    """Type an lvalue; the root must be a state field or a loop variable."""
    if isinstance(target, Name):
        if target.id in ctx.consts:
            raise _err("assign-to-constant",
                       f"cannot assign to constant '{target.id}'", target.loc)
        if target.id in ctx.locals:
            target.ty = ctx.locals[target.id]
            return target.ty
        if target.id in ctx.fields:
            target.ty = ctx.fields[target.id]
            return target.ty
        raise _err("unknown-name",
                   f"cannot assign to unknown name '{target.id}'", target.loc)
    if isinstance(target, Member):
        base = _check_target(target.obj, ctx)
        target.ty = _member_type(base, target.name, target.loc, ctx)
        return target.ty
    if isinstance(target, Index):
        base = _check_target(target.obj, ctx)
        _expect_kind(_check_expr(target.index, ctx), "int", target.index.loc,
                     "list index")
        target.ty = _element_type(base, target.loc, ctx, writing=True)
        return target.ty
    raise _err("bad-target", "invalid assignment target", target.loc)


def _require_assignable(got: TypeDesc, want: TypeDesc, loc: Loc, what: str):
    if _same_shape(got, want):
        return
    if want.kind == "real" and got.kind == "int":
        return
    if want.kind == "complex" and got.kind in ("int", "real"):
        return
    raise _err("type-mismatch", f"{what}: expected {want}, got {got}", loc)


def _same_shape(a: TypeDesc, b: TypeDesc) -> bool:
    """Structural equality ignoring domains and list bounds."""
    if a.kind != b.kind:
        return False
    if a.kind in ("vector", "cgrid"):
        return a.length == b.length and (a.kind != "cgrid" or a.dx == b.dx)
    if a.kind == "list":
        ea = TypeDesc.record_ref(a.element) if isinstance(a.element, str) else a.element
        eb = TypeDesc.record_ref(b.element) if isinstance(b.element, str) else b.element
        return _same_shape(ea, eb)
    if a.kind == "record":
        return a.record == b.record
    if a.kind == "pwcollection":
        return tuple((n, t.kind) for n, t in a.attrs) == \
            tuple((n, t.kind) for n, t in b.attrs)
    return True


# --- expressions -----------------------------------------------------------------


def _expect_bool(expr: Expr, ctx: _Ctx, what: str):
    try:
        td = _check_expr(expr, ctx)
        if td.kind != "bool":
            raise _err("type-mismatch", f"{what} must be bool, got {td}",
                       expr.loc)
    except _Fail as fail:
        ctx.diags.append(fail.diag)


def _expect_kind(td: TypeDesc, kind: str, loc: Loc, what: str):
    if td.kind != kind:
        raise _err("type-mismatch", f"{what} must be {kind}, got {td}", loc)


def _check_expr(e: Expr, ctx: _Ctx) -> TypeDesc:
    td = _infer(e, ctx)
    e.ty = td
    return td


def _infer(e: Expr, ctx: _Ctx) -> TypeDesc:
    if isinstance(e, Lit):
        return TypeDesc(e.kind)
    if isinstance(e, Name):
        return _lookup(e, ctx)
    if isinstance(e, Member):
        base = _check_expr(e.obj, ctx)
        return _member_type(base, e.name, e.loc, ctx)
    if isinstance(e, Index):
        base = _check_expr(e.obj, ctx)
        _expect_kind(_check_expr(e.index, ctx), "int", e.index.loc, "index")
        return _element_type(base, e.loc, ctx, writing=False)
    if isinstance(e, Unary):
        td = _check_expr(e.operand, ctx)
        if e.op == "-":
            if td.kind not in _NUMERIC:
                raise _err("type-mismatch", f"cannot negate {td}", e.loc)
            return TypeDesc(td.kind)
        _expect_kind(td, "bool", e.loc, "operand of '!'")
        return TypeDesc("bool")
    if isinstance(e, Binary):
        return _binary_type(e, ctx)
    if isinstance(e, Call):
        return _call_type(e, ctx)
    if isinstance(e, RandomExpr):
        return _random_type(e, ctx)
    if isinstance(e, ListLit):
        return _list_lit_type(e, ctx)
    if isinstance(e, SetLit):
        raise _err("bad-expr", "value sets are only valid as random ranges",
                   e.loc)
    if isinstance(e, DistExpr):
        raise _err("bad-expr", "distributions are only valid inside random()",
                   e.loc)
    raise _err("internal", f"unknown expression {type(e)}", e.loc)


def _lookup(e: Name, ctx: _Ctx) -> TypeDesc:
    if e.id in ctx.locals:
        return ctx.locals[e.id]
    if e.id in ctx.consts:
        return ctx.consts[e.id]
    if e.id in ctx.fields:
        if ctx.init_assigned is not None and e.id not in ctx.init_assigned:
            raise _err("unknown-name",
                       f"field '{e.id}' read before initialization", e.loc)
        return ctx.fields[e.id]
    if e.id == "dt":
        if not ctx.allow_dt:
            raise _err("unknown-name",
                       "'dt' is only available in transition blocks", e.loc)
        return TypeDesc("real")
    raise _err("unknown-name", f"unknown name '{e.id}'", e.loc)


def _member_type(base: TypeDesc, name: str, loc: Loc, ctx: _Ctx) -> TypeDesc:
    if base.kind != "record":
        raise _err("type-mismatch", f"member access needs a record, got {base}",
                   loc)
    for fname, td in ctx.records[base.record]:
        if fname == name:
            return td
    raise _err("unknown-name",
               f"record '{base.record}' has no field '{name}'", loc)


def _element_type(base: TypeDesc, loc: Loc, ctx: _Ctx, writing: bool) -> TypeDesc:
    if base.kind == "list":
        elem = base.element
        return TypeDesc.record_ref(elem) if isinstance(elem, str) else elem
    if base.kind == "vector":
        return TypeDesc("real")
    if base.kind == "cgrid":
        return TypeDesc("complex")
    raise _err("type-mismatch", f"cannot index {base}", loc)


def _join_numeric(a: TypeDesc, b: TypeDesc, loc: Loc, what: str) -> str:
    if a.kind not in _NUMERIC or b.kind not in _NUMERIC:
        raise _err("type-mismatch",
                   f"{what} needs numeric operands, got {a} and {b}", loc)
    for kind in ("complex", "real", "int"):
        if a.kind == kind or b.kind == kind:
            return kind
    raise _err("internal", "unreachable", loc)


def _binary_type(e: Binary, ctx: _Ctx) -> TypeDesc:
    lt = _check_expr(e.left, ctx)
    rt = _check_expr(e.right, ctx)
    op = e.op
    if op in ("&&", "||"):
        _expect_kind(lt, "bool", e.left.loc, f"operand of '{op}'")
        _expect_kind(rt, "bool", e.right.loc, f"operand of '{op}'")
        return TypeDesc("bool")
    if op in ("<", "<=", ">", ">="):
        for td, side in ((lt, e.left), (rt, e.right)):
            if td.kind not in ("int", "real"):
                raise _err("type-mismatch",
                           f"ordering needs int or real, got {td}", side.loc)
        return TypeDesc("bool")
    if op in ("==", "!="):
        if lt.kind == "bool" and rt.kind == "bool":
            return TypeDesc("bool")
        _join_numeric(lt, rt, e.loc, f"'{op}'")
        return TypeDesc("bool")
    if op == "^":
        kind = _join_numeric(lt, rt, e.loc, "'^'")
        if kind == "complex":
            raise _err("type-mismatch", "'^' is not defined for complex "
                       "(use exp/conj)", e.loc)
        return TypeDesc(kind)
    if op == "/":
        kind = _join_numeric(lt, rt, e.loc, "'/'")
        return TypeDesc("complex" if kind == "complex" else "real")
    kind = _join_numeric(lt, rt, e.loc, f"'{op}'")
    return TypeDesc(kind)


def _list_lit_type(e: ListLit, ctx: _Ctx) -> TypeDesc:
    if not e.items:
        raise _err("bad-expr", "cannot infer the type of an empty list", e.loc)
    kinds = [_check_expr(item, ctx) for item in e.items]
    elem = kinds[0]
    for td, item in zip(kinds[1:], e.items[1:]):
        if _same_shape(td, elem):
            continue
        if td.kind in _NUMERIC and elem.kind in _NUMERIC:
            elem = TypeDesc(_join_numeric(td, elem, item.loc, "list literal"))
            continue
        raise _err("type-mismatch", "list literal elements disagree", item.loc)
    return TypeDesc.list_of(elem)


_PURE_BUILTINS = ("abs", "abs2", "re", "im", "conj", "exp", "cos", "sin",
                  "sqrt", "sum", "len", "laplacian", "complex")


def _call_type(e: Call, ctx: _Ctx) -> TypeDesc:
    args = [_check_expr(a, ctx) for a in e.args]

    def arity(n):
        if len(args) != n:
            raise _err("bad-arity",
                       f"{e.func} takes {n} argument{'s' if n != 1 else ''}",
                       e.loc)

    f = e.func
    if f == "abs":
        arity(1)
        if args[0].kind == "complex":
            return TypeDesc("real")
        if args[0].kind in ("int", "real"):
            return TypeDesc(args[0].kind)
        raise _err("type-mismatch", f"abs needs a number, got {args[0]}", e.loc)
    if f == "abs2":
        arity(1)
        if args[0].kind not in _NUMERIC:
            raise _err("type-mismatch", f"abs2 needs a number, got {args[0]}",
                       e.loc)
        return TypeDesc("real")
    if f in ("re", "im"):
        arity(1)
        _expect_kind(args[0], "complex", e.loc, f"argument of {f}")
        return TypeDesc("real")
    if f == "conj":
        arity(1)
        _expect_kind(args[0], "complex", e.loc, "argument of conj")
        return TypeDesc("complex")
    if f == "exp":
        arity(1)
        if args[0].kind == "complex":
            return TypeDesc("complex")
        if args[0].kind in ("int", "real"):
            return TypeDesc("real")
        raise _err("type-mismatch", f"exp needs a number, got {args[0]}", e.loc)
    if f in ("cos", "sin", "sqrt"):
        arity(1)
        if args[0].kind not in ("int", "real"):
            raise _err("type-mismatch", f"{f} needs int or real, got {args[0]}",
                       e.loc)
        return TypeDesc("real")
    if f == "sum":
        arity(1)
        td = args[0]
        if td.kind == "vector":
            return TypeDesc("real")
        if td.kind == "cgrid":
            return TypeDesc("complex")
        if td.kind == "list":
            elem = td.element
            if isinstance(elem, TypeDesc) and elem.kind in _NUMERIC:
                return TypeDesc(elem.kind)
        raise _err("type-mismatch", f"sum needs a numeric list, got {td}", e.loc)
    if f == "len":
        arity(1)
        if args[0].kind not in ("list", "vector", "cgrid"):
            raise _err("type-mismatch", f"len needs a collection, got {args[0]}",
                       e.loc)
        return TypeDesc("int")
    if f == "laplacian":
        arity(1)
        _expect_kind(args[0], "cgrid", e.loc, "argument of laplacian")
        return args[0]
    if f == "complex":
        arity(2)
        for td in args:
            if td.kind not in ("int", "real"):
                raise _err("type-mismatch",
                           "complex(re, im) needs real arguments", e.loc)
        return TypeDesc("complex")

    intr = intrinsics.get(f)
    if intr is None:
        raise _err("unknown-intrinsic", f"unknown function '{f}'", e.loc)
    if intr.stochastic and not ctx.allow_random:
        raise _err(ctx.random_ban_code,
                   f"stochastic intrinsic '{f}' is not allowed here", e.loc)
    try:
        check_ctx = intrinsics.CheckContext(
            e.args, lambda ex: const_fold(ex, ctx.consts_val))
        return intr.check(args, check_ctx)
    except intrinsics.IntrinsicTypeError as exc:
        raise _err("type-mismatch", f"{f}: {exc}", e.loc)


def _random_type(e: RandomExpr, ctx: _Ctx) -> TypeDesc:
    if not ctx.allow_random:
        raise _err(ctx.random_ban_code, "random() is not allowed here", e.loc)
    dist = e.dist
    for a in dist.args:
        _check_expr(a, ctx)
    if e.range_ is None:
        if dist.name != "GAUSS":
            raise _err("bad-random",
                       f"{dist.name} needs an explicit value range", e.loc)
        _gauss_args(dist)
        return TypeDesc("real")
    if isinstance(e.range_, ListLit):
        if len(e.range_.items) != 2:
            raise _err("bad-random", "interval range must be [lo, hi]",
                       e.range_.loc)
        for item in e.range_.items:
            _check_expr(item, ctx)
            if item.ty.kind not in ("int", "real"):
                raise _err("type-mismatch", "range bounds must be real",
                           item.loc)
        e.range_.ty = TypeDesc.list_of(TypeDesc("real"))
        if dist.name == "FLAT":
            if dist.args:
                raise _err("bad-random", "FLAT takes no parameters", dist.loc)
        elif dist.name == "GAUSS":
            _gauss_args(dist)
        else:
            raise _err("bad-random",
                       f"{dist.name} needs a finite value set", e.loc)
        return TypeDesc("real")
    # finite set range
    items = e.range_.items
    kinds = []
    for item in items:
        td = _check_expr(item, ctx)
        if td.kind not in ("int", "real", "bool"):
            raise _err("type-mismatch",
                       "set elements must be int, real, or bool", item.loc)
        kinds.append(td.kind)
    if "bool" in kinds and any(k != "bool" for k in kinds):
        raise _err("type-mismatch", "set elements disagree", e.range_.loc)
    result = "bool" if kinds[0] == "bool" else \
        ("real" if "real" in kinds else "int")
    e.range_.ty = TypeDesc.list_of(TypeDesc(result))
    if dist.name == "FLAT":
        if dist.args:
            raise _err("bad-random", "FLAT takes no parameters", dist.loc)
    elif dist.name == "WEIGHTS":
        if len(dist.args) != len(items):
            raise _err("bad-random",
                       "WEIGHTS needs one weight per value", dist.loc)
        for a in dist.args:
            if a.ty.kind not in ("int", "real"):
                raise _err("type-mismatch", "weights must be real", a.loc)
    elif dist.name == "PSI":
        if len(dist.args) != len(items):
            raise _err("bad-random",
                       "PSI needs one amplitude per value", dist.loc)
        for a in dist.args:
            if a.ty.kind not in _NUMERIC:
                raise _err("type-mismatch", "amplitudes must be numeric",
                           a.loc)
    else:
        raise _err("bad-random", "GAUSS needs an interval range", e.loc)
    return TypeDesc(result)


def _gauss_args(dist: DistExpr):
    if len(dist.args) != 2:
        raise _err("bad-random", "GAUSS takes (mean, sigma)", dist.loc)
    for a in dist.args:
        if a.ty.kind not in ("int", "real"):
            raise _err("type-mismatch", "GAUSS parameters must be real", a.loc)


# --- constant folding & random scan -----------------------------------------------


def const_fold(e: Expr, consts_val: dict):
    """Fold an expression to a raw Python value, or None if not constant.

    ``consts_val`` maps constant names to Values.
    """
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Name):
        v = consts_val.get(e.id)
        return None if v is None else v.value
    if isinstance(e, Unary):
        x = const_fold(e.operand, consts_val)
        if x is None:
            return None
        if e.op == "-":
            return -x if not isinstance(x, bool) else None
        return (not x) if isinstance(x, bool) else None
    if isinstance(e, Binary):
        left = const_fold(e.left, consts_val)
        if left is None:
            return None
        # short-circuit boolean folding
        if e.op == "&&" and left is False:
            return False
        if e.op == "||" and left is True:
            return True
        right = const_fold(e.right, consts_val)
        if right is None:
            return None
        try:
            return _fold_binary(e.op, left, right)
        except (ArithmeticError, TypeError):
            return None
    return None


def _fold_binary(op, a, b):
    if op == "&&":
        return a and b
    if op == "||":
        return a or b
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise ArithmeticError()
        return a / b
    if op == "^":
        return a ** b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    raise TypeError(op)


def _scan_random(node) -> bool:
    """Syntactic scan for random() calls and stochastic intrinsic calls."""
    if isinstance(node, RandomExpr):
        return True
    if isinstance(node, Call):
        intr = intrinsics.get(node.func)
        if intr is not None and intr.stochastic:
            return True
        return any(_scan_random(a) for a in node.args)
    if isinstance(node, list):
        return any(_scan_random(x) for x in node)
    if hasattr(node, "__dataclass_fields__"):
        from dataclasses import fields as dc_fields
        for f in dc_fields(node):
            if f.name in ("loc", "ty"):
                continue
            if _scan_random(getattr(node, f.name)):
                return True
    return False
