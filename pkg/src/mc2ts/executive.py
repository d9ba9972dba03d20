"""Runtime mission executive.

Executes plans against sampled actual costs.  Under the mixed-criticality
policy the executive compares consumption since plan adoption with each
executed step's LO budget, switching to HI mode on any overrun and back to
LO once every resource is within budget again; in HI mode upcoming LO
actions are dropped, as are LO actions whose dependencies were dropped.
Plans are rebuilt every ``replan_period`` plan steps (executed or dropped).
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Callable, Iterable

from .accounting import AccountingStrategy, switch_decision
from .model import ActionSpec, CostVector, Mode, Point, ResourceKind, Scenario, action_cost
from .planner import NoFeasiblePlan, Plan, SearchConfig, plan
from .sampler import CostSampler, EnvironmentProfile, HalfNormalSampler, derive_seed

__all__ = [
    "ExecutionPolicy",
    "ExecutionState",
    "MissionResult",
    "TraceEvent",
    "execute_plan",
    "run_batch",
    "run_mission",
    "trace_records",
    "write_trace",
]

LegCosts = Callable[[Point, ActionSpec], tuple[CostVector, CostVector]]


class ExecutionPolicy(enum.Enum):
    MIXED_CRITICALITY = "mixed_criticality"
    # execute every step; no modes
    PLAIN = "plain"
    # plain, plus an immediate replan with pessimistic accounting after any LO overrun
    OVERRUN_REPLAN = "overrun_replan"

    @classmethod
    def for_strategy(cls, strategy: AccountingStrategy) -> ExecutionPolicy:
        return {
            AccountingStrategy.MIXED_CRITICALITY: cls.MIXED_CRITICALITY,
            AccountingStrategy.PESSIMISTIC_ONLY: cls.PLAIN,
            AccountingStrategy.OPTIMISTIC_ONLY: cls.OVERRUN_REPLAN,
        }[strategy]


@dataclass(frozen=True)
class TraceEvent:
    step: int
    action_id: int | None
    event: str
    consumed: CostVector
    mode: Mode


@dataclass
class ExecutionState:
    position: Point
    consumed: CostVector
    mode: Mode = Mode.LO
    completed: set[int] = field(default_factory=set)
    dropped: set[int] = field(default_factory=set)
    actions_since_replan: int = 0
    trace: list[TraceEvent] = field(default_factory=list)
    step: int = 0

    @classmethod
    def initial(cls, s: Scenario) -> ExecutionState:
        return cls(position=s.start, consumed=CostVector.zero(s.resources))

    def log(self, action_id: int | None, event: str) -> None:
        self.trace.append(TraceEvent(self.step, action_id, event, self.consumed, self.mode))


@dataclass(frozen=True)
class MissionResult:
    success: bool
    objectives_achieved: int
    hi_completed: int
    lo_completed: int
    final_consumed: CostVector
    mode_switch_count: int
    trace: tuple[TraceEvent, ...]
    dropped_count: int = 0
    replans: int = 0
    hi_bound_overruns: int = 0
    failure: str | None = None


@dataclass
class _Window:
    """Outcome of executing (part of) one plan."""

    finished: bool = False
    failed: str | None = None
    overrun: bool = False
    switches: int = 0
    drops: int = 0
    hi_overruns: int = 0


def _geometric(s: Scenario) -> LegCosts:
    def legs(pos: Point, a: ActionSpec) -> tuple[CostVector, CostVector]:
        return action_cost(s, pos, a, Mode.LO), action_cost(s, pos, a, Mode.HI)

    return legs


def execute_plan(
    s: Scenario,
    p: Plan,
    state: ExecutionState,
    sampler: CostSampler,
    *,
    policy: ExecutionPolicy = ExecutionPolicy.MIXED_CRITICALITY,
    replan_period: int | None = None,
    leg_costs: LegCosts | None = None,
) -> _Window:
    """Run plan steps from ``state`` until the return, a failure or a replan point.

    ``state`` is updated in place.  Budgets in ``p`` are relative to the
    consumption at the moment this call starts.
    """
    legs = leg_costs or _geometric(s)
    budget = s.budget
    base = state.consumed
    out = _Window()
    mc = policy is ExecutionPolicy.MIXED_CRITICALITY
    for k, step in enumerate(p.steps):
        if replan_period is not None and state.actions_since_replan >= replan_period:
            return out
        a = step.action
        state.step += 1
        if mc and not a.is_hi:
            if state.mode is Mode.HI:
                _drop(state, a, "drop")
                out.drops += 1
                continue
            if a.depends_on & state.dropped:
                _drop(state, a, "drop_dependency")
                out.drops += 1
                continue

        state.log(a.id, "start")
        c_lo, c_hi = legs(state.position, a)
        actual = sampler.sample(a, c_lo, c_hi)
        state.consumed = state.consumed + actual
        state.position = a.location
        state.completed.add(a.id)
        state.dropped.discard(a.id)
        state.actions_since_replan += 1
        state.log(a.id, "finish")

        if state.consumed.exceeds(budget):
            state.log(a.id, "failure")
            out.failed = "budget exceeded"
            return out
        if a.is_recharge:
            out.finished = True
            return out

        used = state.consumed - base
        if used.exceeds(step.budget.hi):
            out.hi_overruns += 1
        decision = switch_decision(used, step.budget.lo)
        if mc:
            if decision is not state.mode:
                if decision is Mode.HI:
                    out.switches += 1
                state.mode = decision
                state.log(a.id, f"mode_{decision.value}")
        elif policy is ExecutionPolicy.OVERRUN_REPLAN and decision is Mode.HI:
            state.log(a.id, "overrun")
            out.overrun = True
            return out
    return out


def _drop(state: ExecutionState, a: ActionSpec, event: str) -> None:
    state.dropped.add(a.id)
    state.actions_since_replan += 1
    state.log(a.id, event)


def run_mission(
    s: Scenario,
    cfg: SearchConfig,
    profile: EnvironmentProfile,
    replan_period: int = 2,
    rng: random.Random | int | None = None,
    *,
    sampler: CostSampler | None = None,
    policy: ExecutionPolicy | None = None,
    leg_costs: LegCosts | None = None,
) -> MissionResult:
    """Simulate one mission: plan, execute, replan, until the return or a failure."""
    if replan_period < 1:
        raise ValueError("replan_period must be >= 1")
    if rng is None or isinstance(rng, int):
        rng = random.Random(rng)
    planner_rng = random.Random(rng.getrandbits(64))
    env_rng = random.Random(rng.getrandbits(64))
    if sampler is None:
        sampler = HalfNormalSampler(profile, env_rng)
    if policy is None:
        policy = ExecutionPolicy.for_strategy(cfg.accounting_strategy)

    state = ExecutionState.initial(s)
    search_cfg = cfg
    switches = drops = replans = hi_overruns = 0
    failure: str | None = None

    while True:
        try:
            current = plan(s, state, search_cfg, planner_rng)
        except NoFeasiblePlan:
            state.log(None, "no_feasible_plan")
            failure = "no feasible plan"
            break
        replans += 1
        state.mode = Mode.LO
        state.actions_since_replan = 0
        state.log(None, "replan")
        window = execute_plan(
            s, current, state, sampler, policy=policy, replan_period=replan_period, leg_costs=leg_costs
        )
        switches += window.switches
        drops += window.drops
        hi_overruns += window.hi_overruns
        if window.failed:
            failure = window.failed
            break
        if window.finished:
            break
        if window.overrun and search_cfg.accounting_strategy is not AccountingStrategy.PESSIMISTIC_ONLY:
            search_cfg = replace(search_cfg, accounting_strategy=AccountingStrategy.PESSIMISTIC_ONLY)

    success = failure is None
    hi_done = sum(1 for i in state.completed if (a := s.action(i)).is_hi and not a.is_recharge)
    lo_done = sum(1 for i in state.completed if not s.action(i).is_hi)
    return MissionResult(
        success=success,
        objectives_achieved=hi_done + lo_done if success else 0,
        hi_completed=hi_done,
        lo_completed=lo_done,
        final_consumed=state.consumed,
        mode_switch_count=switches,
        trace=tuple(state.trace),
        dropped_count=drops,
        replans=replans,
        hi_bound_overruns=hi_overruns,
        failure=failure,
    )


def run_batch(
    s: Scenario,
    cfg: SearchConfig,
    profile: EnvironmentProfile,
    runs: int,
    base_seed: int,
    replan_period: int = 2,
) -> list[MissionResult]:
    if runs < 1:
        raise ValueError("runs must be >= 1")
    return [
        run_mission(s, cfg, profile, replan_period, random.Random(derive_seed(base_seed, i)))
        for i in range(runs)
    ]


def trace_records(trace: Iterable[TraceEvent]) -> list[dict]:
    out = []
    for ev in trace:
        c = ev.consumed
        out.append(
            {
                "step": ev.step,
                "action_id": ev.action_id,
                "event": ev.event,
                "consumed_duration": c[ResourceKind.DURATION] if ResourceKind.DURATION in c.kinds else None,
                "consumed_energy": c[ResourceKind.ENERGY] if ResourceKind.ENERGY in c.kinds else None,
                "mode": ev.mode.value,
            }
        )
    return out


def write_trace(trace: Iterable[TraceEvent], dest: str | Path | IO[str]) -> None:
    """Line-delimited JSON, one record per trace event."""
    lines = "".join(json.dumps(r) + "\n" for r in trace_records(trace))
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(lines, encoding="utf-8")
    else:
        dest.write(lines)
