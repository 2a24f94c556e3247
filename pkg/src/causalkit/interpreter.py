"""Whole-model execution: the uniform-timestep loop, trace recording,
halting, and branching (many-worlds style) execution.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .engine import (
    CausalModel,
    Env,
    RandomSource,
    RngSource,
    apply_law,
    eval_expr,
    select_law,
)
from .errors import (
    BranchSignal,
    ContinuousRandomError,
    EvalError,
    MultipleApplicableError,
    NoApplicableLawError,
    SinkError,
)
from .rng import RngStream
from .state import SystemState, state_to_json

# --- configuration and traces ---------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    dt: float
    max_steps: int
    seed: int = 0
    mode: str = "strict"
    record_every: int = 1
    observables: tuple = ()  # (label, typed Expr) pairs

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class Termination:
    kind: str  # halted | max-steps | no-applicable-law | multiple-applicable |
               # eval-error | depth-bound | pruned
    message: str = ""
    witness: SystemState | None = None
    laws: tuple = ()

    @property
    def is_error(self) -> bool:
        return self.kind not in ("halted", "max-steps")


@dataclass(frozen=True)
class TraceRow:
    step: int
    time: float
    values: tuple                  # observable values (raw python scalars)
    snapshot: SystemState | None = None


@dataclass(frozen=True)
class Trace:
    model_name: str
    config: RunConfig
    rows: tuple
    termination: Termination
    final_state: SystemState

    @property
    def observable_names(self):
        return tuple(label for label, _ in self.config.observables)


def _halts(model: CausalModel, s: SystemState) -> bool:
    if model.halt is None:
        return False
    env = Env(s, model.consts)
    return bool(eval_expr(model.halt, env).value)


def _observe(model: CausalModel, s: SystemState, observables) -> tuple:
    env = Env(s, model.consts)
    return tuple(eval_expr(expr, env).value for _, expr in observables)


def run(model: CausalModel, init: SystemState, cfg: RunConfig) -> Trace:
    """Drive the model from ``init`` until it halts, exhausts max_steps,
    or an engine error occurs. Failures land in the termination record,
    never as exceptions.

    Row times are computed as init.time + stepIndex * dt (not accumulated),
    and rows are recorded exactly at record_every strides.
    """
    rng = RngSource(RngStream(cfg.seed))
    rows = [TraceRow(0, init.time, _observe(model, init, cfg.observables),
                     init)]
    s = init
    steps = 0
    while True:
        try:
            if _halts(model, s):
                termination = Termination("halted")
                break
            if steps >= cfg.max_steps:
                termination = Termination("max-steps")
                break
            law = select_law(model, s, cfg.mode)
            s1 = apply_law(law, s, cfg.dt, rng, model.consts)
            s = SystemState(s1.schema, init.time + (steps + 1) * cfg.dt,
                            s1.values)
            steps += 1
            if steps % cfg.record_every == 0:
                rows.append(TraceRow(steps, s.time,
                                     _observe(model, s, cfg.observables), s))
        except NoApplicableLawError as exc:
            termination = Termination("no-applicable-law", str(exc),
                                      witness=exc.witness)
            break
        except MultipleApplicableError as exc:
            termination = Termination("multiple-applicable", str(exc),
                                      witness=exc.witness,
                                      laws=tuple(exc.law_names))
            break
        except EvalError as exc:
            termination = Termination("eval-error", str(exc))
            break
    return Trace(model.name, cfg, tuple(rows), termination, s)


# --- branching execution -----------------------------------------------------------


class _BranchPoint(BranchSignal):
    def __init__(self, probs, labels):
        self.probs = probs
        self.labels = labels


class ReplaySource(RandomSource):
    """Replays a scripted prefix of categorical outcomes; the first
    unscripted draw raises a branch point. Continuous draws refuse."""

    def __init__(self, script):
        self.script = list(script)
        self.pos = 0

    def categorical(self, probs, labels=None) -> int:
        if self.pos < len(self.script):
            i = self.script[self.pos]
            self.pos += 1
            return i
        raise _BranchPoint(np.asarray(probs, dtype=float), labels)

    def uniform01(self) -> float:
        raise ContinuousRandomError()

    def normal(self, mean, sigma) -> float:
        raise ContinuousRandomError()


@dataclass
class WorldNode:
    weight: float
    outcome: str | None = None          # edge label of the draw that made it
    snapshot: SystemState | None = None
    children: list = field(default_factory=list)
    termination: Termination | None = None
    pruned: bool = False


@dataclass(frozen=True)
class WorldTree:
    root: WorldNode
    pruned_mass: float

    def leaves(self):
        out = []

        def walk(node):
            if node.pruned:
                return
            if node.termination is not None:
                out.append(node)
            for c in node.children:
                walk(c)

        walk(self.root)
        return out

    def leaf_weight_total(self) -> float:
        return sum(l.weight for l in self.leaves())


@dataclass
class _Lineage:
    state: SystemState
    weight: float
    draws: int       # categorical draws consumed so far
    steps: int
    node: WorldNode
    serial: int      # creation order, used for deterministic pruning


def branch_run(model: CausalModel, init: SystemState, cfg: RunConfig,
               depth_bound: int, width_bound: int) -> WorldTree:
    """Execute like ``run`` but fork one weighted child per outcome at
    every categorical random draw.

    A lineage stops branching once it has consumed depth_bound draws
    (leaf kind "depth-bound"). After each synchronous round of steps the
    frontier is pruned to width_bound lineages, dropping the lowest
    weights deterministically; pruned stubs stay in the tree and their
    total mass is reported. Continuous draws are not branchable and
    raise ContinuousRandomError.
    """
    if depth_bound < 1:
        raise ValueError("depth_bound must be >= 1")
    if width_bound < 1:
        raise ValueError("width_bound must be >= 1")
    root = WorldNode(weight=1.0, snapshot=init)
    serial = 1
    active = [_Lineage(init, 1.0, 0, 0, root, 0)]
    pruned_mass = 0.0

    def settle(lin: _Lineage, term: Termination):
        lin.node.termination = term
        lin.node.snapshot = lin.state

    while active:
        survivors: list = []
        # work items: (lineage, script); a non-empty script means the
        # lineage is re-executing the current step after a fork
        work = deque((lin, []) for lin in active)
        while work:
            lin, script = work.popleft()
            if not script:
                try:
                    if _halts(model, lin.state):
                        settle(lin, Termination("halted"))
                        continue
                    if lin.steps >= cfg.max_steps:
                        settle(lin, Termination("max-steps"))
                        continue
                except EvalError as exc:
                    settle(lin, Termination("eval-error", str(exc)))
                    continue
            law = None
            try:
                law = select_law(model, lin.state, cfg.mode)
                s1 = apply_law(law, lin.state, cfg.dt, ReplaySource(script),
                               model.consts)
                lin.state = SystemState(
                    s1.schema, init.time + (lin.steps + 1) * cfg.dt,
                    s1.values)
                lin.steps += 1
                lin.draws += len(script)
                lin.node.snapshot = lin.state
                survivors.append(lin)
            except _BranchPoint as bp:
                if lin.draws + len(script) >= depth_bound:
                    settle(lin, Termination(
                        "depth-bound",
                        f"branching depth {depth_bound} reached"))
                    continue
                children = []
                for k, p in enumerate(bp.probs):
                    if p <= 0.0:
                        continue
                    label = (str(bp.labels[k]) if bp.labels is not None
                             else str(k))
                    node = WorldNode(weight=lin.weight * float(p),
                                     outcome=label)
                    lin.node.children.append(node)
                    children.append(
                        (_Lineage(lin.state, lin.weight * float(p),
                                  lin.draws, lin.steps, node, serial),
                         script + [k]))
                    serial += 1
                for item in reversed(children):
                    work.appendleft(item)
            except NoApplicableLawError as exc:
                settle(lin, Termination("no-applicable-law", str(exc),
                                        witness=exc.witness))
            except MultipleApplicableError as exc:
                settle(lin, Termination("multiple-applicable", str(exc),
                                        witness=exc.witness,
                                        laws=tuple(exc.law_names)))
            except ContinuousRandomError:
                raise ContinuousRandomError(law=law.name if law else None)
            except EvalError as exc:
                settle(lin, Termination("eval-error", str(exc)))
        if len(survivors) > width_bound:
            order = sorted(survivors, key=lambda l: (-l.weight, l.serial))
            for lin in order[width_bound:]:
                lin.node.pruned = True
                lin.node.termination = Termination("pruned")
                lin.node.snapshot = lin.state
                pruned_mass += lin.weight
            survivors = sorted(order[:width_bound], key=lambda l: l.serial)
        active = survivors
    return WorldTree(root, pruned_mass)


# --- serialization ----------------------------------------------------------------


def format_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, complex):
        return f"{format(value.real, '.17g')}{value.imag:+.17g}i"
    return str(value)


def _jsonable(value):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def termination_to_json(t: Termination) -> dict:
    out: dict = {"kind": t.kind}
    if t.message:
        out["message"] = t.message
    if t.laws:
        out["laws"] = list(t.laws)
    if t.witness is not None:
        out["witness"] = state_to_json(t.witness)
    return out


def write_trace(trace: Trace, format_: str = "csv", sink=None) -> int:
    """Serialize a trace as CSV or JSONL; returns bytes written.

    CSV: header ``step,time,<observables>`` and one row per recorded row,
    floats with 17 significant digits. JSONL: one object per row plus a
    trailing metadata object carrying the config and termination reason.
    """
    names = trace.observable_names
    if format_ == "csv":
        lines = ["step,time" + ("," + ",".join(names) if names else "")]
        for row in trace.rows:
            cells = [str(row.step), format_scalar(row.time)]
            cells += [format_scalar(v) for v in row.values]
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    elif format_ == "jsonl":
        lines = []
        for row in trace.rows:
            lines.append(json.dumps(
                {"step": row.step, "time": row.time,
                 "values": {n: _jsonable(v) for n, v in zip(names, row.values)}}))
        meta = {"model": trace.model_name,
                "config": {"dt": trace.config.dt,
                           "maxSteps": trace.config.max_steps,
                           "seed": trace.config.seed,
                           "mode": trace.config.mode,
                           "recordEvery": trace.config.record_every,
                           "observables": list(names)},
                "terminationReason": termination_to_json(trace.termination)}
        lines.append(json.dumps(meta))
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown trace format '{format_}'")
    return write_text(text, sink)


def write_text(text: str, sink) -> int:
    data = text.encode("utf-8")
    try:
        if sink is None:
            import sys
            sys.stdout.write(text)
            sys.stdout.flush()
        elif isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
            with open(sink, "wb") as fh:
                fh.write(data)
        elif hasattr(sink, "write"):
            try:
                sink.write(data)
            except TypeError:
                sink.write(text)
        else:
            raise SinkError(f"cannot write to {sink!r}")
    except OSError as exc:
        raise SinkError(str(exc))
    return len(data)


def world_tree_to_json(tree: WorldTree) -> dict:
    def node_json(node: WorldNode) -> dict:
        out: dict = {"weight": node.weight}
        if node.outcome is not None:
            out["outcome"] = node.outcome
        if node.pruned:
            out["pruned"] = True
        if node.termination is not None and not node.pruned:
            out["termination"] = termination_to_json(node.termination)
        if node.snapshot is not None and not node.children:
            out["state"] = state_to_json(node.snapshot)
        if node.children:
            out["children"] = [node_json(c) for c in node.children]
        return out

    return {"prunedMass": tree.pruned_mass, "root": node_json(tree.root)}
