"""Model-level property checks with concrete witnesses.

The checks are bounded: they enumerate finite domains, sample random
states, or trace reachable states, and report exactly what was checked.
The only unbounded claim is "pass-trivially", which requires the guard
disjunction to fold to the constant true.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .engine import (
    CausalModel,
    DeterminismVerdict,
    Env,
    NativeTransition,
    apply_law,
    build_initial_state,
    classify_determinism,
    eval_expr,
    eval_guard,
)
from .errors import (
    NoValidInStateFoundError,
    UnsampleableFieldError,
)
from .frontend.ast_nodes import Call, RandomExpr
from .frontend.typecheck import const_fold
from . import intrinsics
from .rng import RngStream, derive_seed
from .state import (
    SystemState,
    TypeDesc,
    VBool,
    VInt,
    VReal,
    sample_state,
    sample_value,
    state_to_json,
)

_ENUMERATION_CAP = 1_000_000
_REJECTION_TRIES = 10_000


@dataclass(frozen=True)
class CheckStrategy:
    """How to bound a property check.

    enumerate: all states of finite domains; sample: ``count`` random
    states with per-trial derived seeds; trace: ``runs`` runs of
    ``steps_per_run`` steps from valid start states.
    """

    kind: str = "sample"
    count: int = 10_000
    runs: int = 20
    steps_per_run: int = 50
    seed: int = 0
    tol: float = 0.0

    def __post_init__(self):
        if self.kind not in ("enumerate", "sample", "trace"):
            raise ValueError(f"unknown strategy '{self.kind}'")
        if self.count < 1 or self.runs < 1 or self.steps_per_run < 1:
            raise ValueError("strategy budgets must be >= 1")


@dataclass(frozen=True)
class ConsistencyVerdict:
    status: str                    # pass | fail | error
    states_checked: int = 0
    witness: SystemState | None = None
    laws: tuple = ()
    seed: int | None = None
    message: str = ""


@dataclass(frozen=True)
class CompletenessVerdict:
    status: str                    # pass-bounded | pass-trivially | fail | error
    states_checked: int = 0
    witness: SystemState | None = None
    producing_law: str | None = None
    seed: int | None = None
    message: str = ""


@dataclass(frozen=True)
class AnalysisReport:
    model_name: str
    consistency: ConsistencyVerdict
    completeness: CompletenessVerdict
    determinism: DeterminismVerdict
    computability_notes: tuple
    reality_conformance: str = "not-machine-checkable"


def validstate(model: CausalModel, s: SystemState) -> bool:
    """Disjunction of all law guards on the state."""
    return any(eval_guard(law, s, model.consts) for law in model.laws)


# --- state generation ---------------------------------------------------------


def unsampleable_fields(model: CausalModel) -> list:
    """Names of fields sample_state cannot draw (no domain, grids, pw)."""
    out = []
    rng = RngStream(0)
    for name, td in model.schema.fields.items():
        try:
            sample_value(td, model.schema, rng, name)
        except UnsampleableFieldError:
            out.append(name)
    return out


def _enumerate_domain(td: TypeDesc, name: str):
    if td.kind == "bool":
        if td.domain is not None and td.domain.is_finite:
            return [VBool(bool(v)) for v in td.domain.values]
        return [VBool(False), VBool(True)]
    if td.domain is None:
        raise UnsampleableFieldError(name, "no domain to enumerate")
    if td.domain.is_finite:
        wrap = {"int": VInt, "real": VReal}.get(td.kind)
        if wrap is None:
            raise UnsampleableFieldError(name, f"cannot enumerate {td.kind}")
        return [wrap(v) for v in td.domain.values]
    if td.kind == "int":
        lo, hi = int(td.domain.lo), int(td.domain.hi)
        return [VInt(v) for v in range(lo, hi + 1)]
    raise UnsampleableFieldError(name, "interval domains are not enumerable")


def enumerate_states(model: CausalModel):
    """All states over finite field domains, in declaration order."""
    schema = model.schema
    names = list(schema.fields)
    domains = [_enumerate_domain(schema.fields[n], n) for n in names]
    total = 1
    for d in domains:
        total *= len(d)
        if total > _ENUMERATION_CAP:
            raise ValueError(
                f"enumeration exceeds {_ENUMERATION_CAP} states")
    for combo in itertools.product(*domains):
        yield SystemState(schema, 0.0, dict(zip(names, combo)))


def _sampled_states(model: CausalModel, strategy: CheckStrategy):
    for i in range(strategy.count):
        rng = RngStream(derive_seed(strategy.seed, i))
        yield sample_state(model.schema, rng)


def _trace_start(model: CausalModel, run_idx: int, strategy: CheckStrategy,
                 can_sample: bool) -> SystemState:
    if not can_sample:
        return build_initial_state(model)
    rng = RngStream(derive_seed(strategy.seed, run_idx))
    for _ in range(_REJECTION_TRIES):
        s = sample_state(model.schema, rng)
        if validstate(model, s):
            return s
    raise NoValidInStateFoundError(
        f"no valid in-state found in {_REJECTION_TRIES} draws")


# --- consistency ----------------------------------------------------------------


def check_consistency(model: CausalModel,
                      strategy: CheckStrategy) -> ConsistencyVerdict:
    """At most one guard may hold. enumerate/sample check arbitrary states
    (the stronger condition); trace checks encountered out-states only."""
    if len(model.laws) == 1:
        return ConsistencyVerdict("pass", states_checked=0,
                                  message="single law: vacuously consistent")
    if strategy.kind == "trace":
        return _consistency_by_trace(model, strategy)
    states = (enumerate_states(model) if strategy.kind == "enumerate"
              else _sampled_states(model, strategy))
    checked = 0
    for s in states:
        hits = [law.name for law in model.laws
                if eval_guard(law, s, model.consts)]
        if len(hits) > 1:
            return ConsistencyVerdict("fail", states_checked=checked,
                                      witness=s, laws=tuple(hits),
                                      seed=strategy.seed)
        checked += 1
    return ConsistencyVerdict("pass", states_checked=checked,
                              seed=strategy.seed)


def _consistency_by_trace(model, strategy) -> ConsistencyVerdict:
    can_sample = not unsampleable_fields(model)
    checked = 0
    for r in range(strategy.runs):
        s = _trace_start(model, r, strategy, can_sample)
        rng = RngStream(derive_seed(strategy.seed ^ 0x7472616365, r))
        for _ in range(strategy.steps_per_run):
            hits = [law for law in model.laws
                    if eval_guard(law, s, model.consts)]
            if len(hits) > 1:
                return ConsistencyVerdict(
                    "fail", states_checked=checked, witness=s,
                    laws=tuple(l.name for l in hits), seed=strategy.seed)
            if not hits:
                break
            s1 = apply_law(hits[0], s, model.default_timestep, rng,
                           model.consts)
            s = SystemState(s1.schema, s.time + model.default_timestep,
                            s1.values)
            checked += 1
            hits2 = [law.name for law in model.laws
                     if eval_guard(law, s, model.consts)]
            if len(hits2) > 1:
                return ConsistencyVerdict("fail", states_checked=checked,
                                          witness=s, laws=tuple(hits2),
                                          seed=strategy.seed)
            if _model_halts(model, s):
                break
    return ConsistencyVerdict("pass", states_checked=checked,
                              seed=strategy.seed)


def _model_halts(model, s) -> bool:
    if model.halt is None:
        return False
    return bool(eval_expr(model.halt, Env(s, model.consts)).value)


# --- completeness ----------------------------------------------------------------


def guard_disjunction_trivially_true(model: CausalModel) -> bool:
    consts = model.schema.constants
    consts_val = {n: v for n, (_, v) in consts.items()}
    return any(const_fold(law.guard, consts_val) is True
               for law in model.laws)


def check_completeness(model: CausalModel,
                       strategy: CheckStrategy) -> CompletenessVerdict:
    """Every generated out-state must satisfy some guard.

    pass-trivially requires the guard disjunction to constant-fold to
    true; otherwise out-states are generated per the strategy and the
    first invalid one is returned as a witness with its producing law.
    """
    if guard_disjunction_trivially_true(model):
        return CompletenessVerdict("pass-trivially")
    if strategy.kind == "trace":
        return _completeness_by_trace(model, strategy)
    states = (enumerate_states(model) if strategy.kind == "enumerate"
              else _sampled_states(model, strategy))
    checked = 0
    found_valid = False
    for i, s in enumerate(states):
        hits = [law for law in model.laws if eval_guard(law, s, model.consts)]
        if not hits:
            continue
        found_valid = True
        rng = RngStream(derive_seed(strategy.seed ^ 0x6F7574, i))
        out = apply_law(hits[0], s, model.default_timestep, rng, model.consts)
        checked += 1
        if not validstate(model, out):
            return CompletenessVerdict("fail", states_checked=checked,
                                       witness=out,
                                       producing_law=hits[0].name,
                                       seed=strategy.seed)
    if not found_valid:
        raise NoValidInStateFoundError(
            "sampling produced no state satisfying any guard")
    return CompletenessVerdict("pass-bounded", states_checked=checked,
                               seed=strategy.seed)


def _completeness_by_trace(model, strategy) -> CompletenessVerdict:
    can_sample = not unsampleable_fields(model)
    checked = 0
    for r in range(strategy.runs):
        s = _trace_start(model, r, strategy, can_sample)
        if not validstate(model, s):
            continue  # model-init start state may be a halt-only state
        rng = RngStream(derive_seed(strategy.seed ^ 0x7472616365, r))
        for _ in range(strategy.steps_per_run):
            hits = [law for law in model.laws
                    if eval_guard(law, s, model.consts)]
            if not hits:
                break
            s1 = apply_law(hits[0], s, model.default_timestep, rng,
                           model.consts)
            s = SystemState(s1.schema, s.time + model.default_timestep,
                            s1.values)
            checked += 1
            if not validstate(model, s):
                return CompletenessVerdict("fail", states_checked=checked,
                                           witness=s,
                                           producing_law=hits[0].name,
                                           seed=strategy.seed)
            if _model_halts(model, s):
                break
    return CompletenessVerdict("pass-bounded", states_checked=checked,
                               seed=strategy.seed)


# --- full analysis ----------------------------------------------------------------


def _intrinsic_inventory(model: CausalModel) -> list:
    used = set()
    uses_random = False

    def scan(node):
        nonlocal uses_random
        if isinstance(node, RandomExpr):
            uses_random = True
            scan(node.dist.args)
            if node.range_ is not None:
                scan(node.range_)
            return
        if isinstance(node, Call):
            if intrinsics.get(node.func) is not None:
                used.add(node.func)
            scan(node.args)
            return
        if isinstance(node, list):
            for x in node:
                scan(x)
            return
        if hasattr(node, "__dataclass_fields__"):
            from dataclasses import fields as dc_fields
            for f in dc_fields(node):
                if f.name in ("loc", "ty"):
                    continue
                scan(getattr(node, f.name))

    notes = []
    for law in model.laws:
        scan(law.guard)
        if isinstance(law.transition, NativeTransition):
            notes.append(f"law '{law.name}' uses a native transition "
                         "(not inspectable as CML)")
        else:
            scan(law.transition)
    for name in sorted(used):
        intr = intrinsics.get(name)
        flavor = "stochastic" if intr.stochastic else "deterministic"
        notes.append(f"uses intrinsic '{name}' ({flavor})")
    if uses_random:
        notes.append("uses the random() primitive")
    return notes


def analyze(model: CausalModel, strategy: CheckStrategy) -> AnalysisReport:
    """Bundle consistency, bounded completeness, determinism, and
    computability bookkeeping. Check failures are recorded in the report,
    never raised."""
    notes = []
    bad = unsampleable_fields(model)
    for name in bad:
        notes.append(f"field '{name}' is unsampleable")
    effective = strategy
    if strategy.kind == "sample" and bad:
        effective = CheckStrategy("trace", count=strategy.count,
                                  runs=strategy.runs,
                                  steps_per_run=strategy.steps_per_run,
                                  seed=strategy.seed, tol=strategy.tol)
        notes.append("sample strategy downgraded to trace "
                     "(unsampleable fields)")
    try:
        consistency = check_consistency(model, effective)
    except Exception as exc:  # noqa: BLE001 - report, never crash
        consistency = ConsistencyVerdict("error", message=str(exc))
    try:
        completeness = check_completeness(model, effective)
    except Exception as exc:  # noqa: BLE001
        completeness = CompletenessVerdict("error", message=str(exc))
    determinism = classify_determinism(model)
    notes.extend(_intrinsic_inventory(model))
    return AnalysisReport(model_name=model.name,
                          consistency=consistency,
                          completeness=completeness,
                          determinism=determinism,
                          computability_notes=tuple(notes))


def report_to_json(report: AnalysisReport) -> dict:
    def consistency_json(v: ConsistencyVerdict):
        out = {"status": v.status, "statesChecked": v.states_checked}
        if v.message:
            out["message"] = v.message
        if v.seed is not None:
            out["seed"] = v.seed
        if v.witness is not None:
            out["witness"] = state_to_json(v.witness)
            out["laws"] = list(v.laws)
        return out

    def completeness_json(v: CompletenessVerdict):
        out = {"status": v.status, "statesChecked": v.states_checked}
        if v.message:
            out["message"] = v.message
        if v.seed is not None:
            out["seed"] = v.seed
        if v.witness is not None:
            out["witness"] = state_to_json(v.witness)
            out["producingLaw"] = v.producing_law
        return out

    d = report.determinism
    return {
        "model": report.model_name,
        "consistency": consistency_json(report.consistency),
        "completeness": completeness_json(report.completeness),
        "determinism": {"deterministic": d.deterministic,
                        "randomLaws": list(d.random_laws)},
        "computabilityNotes": list(report.computability_notes),
        "realityConformance": report.reality_conformance,
    }
