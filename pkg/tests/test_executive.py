import io
import json
import random
from pathlib import Path

import pytest

import mc2ts.executive as executive
from mc2ts.accounting import AccountingStrategy
from mc2ts.executive import (
    ExecutionPolicy,
    ExecutionState,
    execute_plan,
    run_batch,
    run_mission,
    trace_records,
    write_trace,
)
from mc2ts.model import Mode
from mc2ts.planner import SearchConfig
from mc2ts.sampler import EnvironmentKind, EnvironmentProfile, ScriptedSampler, derive_seed
from mc2ts.scenarios import generate

from conftest import make_scenario
from helpers import abstract_plan, vec

GOLDEN = Path(__file__).parent / "data" / "run_batch_golden.json"


def events(state):
    return [(e.action_id, e.event) for e in state.trace if e.event not in ("start", "finish")]


def executed(state):
    return [e.action_id for e in state.trace if e.event == "finish"]


@pytest.fixture
def s6():
    # 1, 2, 3, 5, 6 LO; 4 HI; 6 depends on 2
    return make_scenario(
        [(10, 10), (20, 20), (30, 30), (40, 40), (50, 50), (60, 60)], hi_ids={4}, deps={6: {2}}
    )


def test_overrun_switches_and_drops_next_lo(s6):
    p, legs = abstract_plan(s6, [(1, 2, 4), (2, 3, 6), (3, 2, 4), (4, 5, 10), (0, 4, 8)])
    # step 2 overruns its LO budget (5); step 4 keeps consumption above b4(LO) = 12
    sampler = ScriptedSampler([vec(2), vec(3.5), vec(8), vec(4)])
    state = ExecutionState.initial(s6)
    w = execute_plan(s6, p, state, sampler, leg_costs=legs)
    assert w.finished and w.switches == 1 and w.drops == 1
    assert executed(state) == [1, 2, 4, 0]
    assert events(state) == [(2, "mode_HI"), (3, "drop")]
    assert state.mode is Mode.HI
    assert state.consumed.values[0] <= p.steps[-1].budget.hi.values[0]


def test_reversion_and_dependency_drop(s6):
    plan_steps = [(1, 2, 4), (2, 3, 6), (4, 5, 10), (6, 2, 4), (5, 2, 4), (0, 4, 8)]
    p, legs = abstract_plan(s6, plan_steps)
    # 1 overruns -> HI; 2 dropped; 4 cheap, so consumed 2.5+4 falls under b3(LO)=10 -> LO;
    # 6 depends on dropped 2 -> dropped; 5 executes
    sampler = ScriptedSampler([vec(2.5), vec(4), vec(2), vec(4)])
    state = ExecutionState.initial(s6)
    w = execute_plan(s6, p, state, sampler, leg_costs=legs)
    assert w.finished
    assert events(state) == [
        (1, "mode_HI"),
        (2, "drop"),
        (4, "mode_LO"),
        (6, "drop_dependency"),
    ]
    assert executed(state) == [1, 4, 5, 0]
    assert state.dropped == {2, 6}


def test_budget_exceeded_is_a_failure(s6):
    p, legs = abstract_plan(s6, [(4, 5, 10), (0, 4, 8)])
    state = ExecutionState.initial(s6)
    w = execute_plan(s6, p, state, ScriptedSampler([vec(2000)]), leg_costs=legs)
    assert w.failed == "budget exceeded"
    assert state.trace[-1].event == "failure"


def test_plain_policy_never_drops(s6):
    p, legs = abstract_plan(s6, [(1, 2, 4), (2, 3, 6), (3, 2, 4), (0, 4, 8)])
    state = ExecutionState.initial(s6)
    w = execute_plan(s6, p, state, ScriptedSampler([vec(4), vec(6), vec(4), vec(8)]), policy=ExecutionPolicy.PLAIN, leg_costs=legs)
    assert w.finished and w.drops == 0 and executed(state) == [1, 2, 3, 0]


def test_overrun_replan_policy_stops_window(s6):
    p, legs = abstract_plan(s6, [(1, 2, 4), (2, 3, 6), (0, 4, 8)])
    state = ExecutionState.initial(s6)
    w = execute_plan(s6, p, state, ScriptedSampler([vec(3)]), policy=ExecutionPolicy.OVERRUN_REPLAN, leg_costs=legs)
    assert w.overrun and not w.finished
    assert events(state) == [(1, "overrun")]


def test_replan_period_counts_dropped_steps(s6):
    p, legs = abstract_plan(s6, [(1, 2, 4), (2, 3, 6), (3, 2, 4), (0, 4, 8)])
    state = ExecutionState.initial(s6)
    w = execute_plan(s6, p, state, ScriptedSampler([vec(3), vec(1)]), replan_period=2, leg_costs=legs)
    assert not w.finished and state.actions_since_replan == 2
    assert events(state) == [(1, "mode_HI"), (2, "drop")]


def test_policy_for_strategy():
    assert ExecutionPolicy.for_strategy(AccountingStrategy.PESSIMISTIC_ONLY) is ExecutionPolicy.PLAIN
    assert ExecutionPolicy.for_strategy(AccountingStrategy.OPTIMISTIC_ONLY) is ExecutionPolicy.OVERRUN_REPLAN


def test_zero_sigma_never_switches():
    s = generate(3)
    quiet = EnvironmentProfile(EnvironmentKind.NORMAL, 1e300)
    res = run_mission(s, SearchConfig(200), quiet, replan_period=100, rng=5)
    assert res.success and res.mode_switch_count == 0 and res.dropped_count == 0
    assert res.replans == 1
    planned = [e.action_id for e in res.trace if e.event == "finish"]
    assert res.objectives_achieved == len(planned) - 1


def test_hi_actions_are_never_dropped():
    s = generate(8)
    prof = EnvironmentProfile.exceptional()
    for seed in range(15):
        res = run_mission(s, SearchConfig(100), prof, rng=seed)
        for e in res.trace:
            if e.event.startswith("drop"):
                assert not s.action(e.action_id).is_hi


def test_optimistic_escalates_after_overrun(monkeypatch):
    s = generate(2)
    seen = []
    real = executive.plan

    def spy(s_, state, cfg, rng):
        seen.append(cfg.accounting_strategy)
        return real(s_, state, cfg, rng)

    monkeypatch.setattr(executive, "plan", spy)
    cfg = SearchConfig(60, accounting_strategy=AccountingStrategy.OPTIMISTIC_ONLY)
    # the first executed action costs its full HI allowance: a LO overrun
    sampler = ScriptedSampler(lambda a, lo, hi: hi if not seen[1:] else lo.scaled(0.5))
    res = run_mission(s, cfg, EnvironmentProfile.normal(), rng=0, sampler=sampler)
    assert any(e.event == "overrun" for e in res.trace)
    assert seen[0] is AccountingStrategy.OPTIMISTIC_ONLY
    assert all(x is AccountingStrategy.PESSIMISTIC_ONLY for x in seen[1:]) and len(seen) > 1


def test_no_feasible_plan_is_reported():
    s = make_scenario([(10, 10)], hi_ids={1}, duration=100.0)
    res = run_mission(s, SearchConfig(10), EnvironmentProfile.normal(), rng=0)
    assert not res.success and res.failure == "no feasible plan"
    assert res.objectives_achieved == 0


def test_failure_zeroes_objectives():
    s = generate(2)
    res = run_mission(
        s, SearchConfig(50), EnvironmentProfile.normal(), rng=0,
        sampler=ScriptedSampler(lambda a, lo, hi: hi.scaled(50)),
    )
    assert res.failure == "budget exceeded" and res.objectives_achieved == 0


def test_run_batch():
    s = generate(5)
    cfg = SearchConfig(50)
    prof = EnvironmentProfile.normal()
    one = run_batch(s, cfg, prof, 1, base_seed=3)
    assert one == [run_mission(s, cfg, prof, 2, random.Random(derive_seed(3, 0)))]
    assert run_batch(s, cfg, prof, 4, 3) == run_batch(s, cfg, prof, 4, 3)
    with pytest.raises(ValueError):
        run_batch(s, cfg, prof, 0, 3)


def test_run_batch_golden():
    ref = json.loads(GOLDEN.read_text())
    s = generate(ref["scenario_seed"])
    res = run_batch(s, SearchConfig(ref["computation_budget"]), EnvironmentProfile.named(ref["profile"]), ref["runs"], ref["base_seed"])
    xs = [r.objectives_achieved for r in res]
    mean = sum(xs) / len(xs)
    assert abs(mean - ref["mean_objectives"]) <= 3 * ref["stderr_objectives"] + 1e-12


def test_trace_jsonl(tmp_path):
    s = generate(1)
    res = run_mission(s, SearchConfig(30), EnvironmentProfile.normal(), rng=1)
    buf = io.StringIO()
    write_trace(res.trace, buf)
    lines = [json.loads(x) for x in buf.getvalue().splitlines()]
    assert lines == trace_records(res.trace)
    assert set(lines[0]) == {"step", "action_id", "event", "consumed_duration", "consumed_energy", "mode"}
    write_trace(res.trace, tmp_path / "t.jsonl")
    assert (tmp_path / "t.jsonl").read_text() == buf.getvalue()
