"""Experiment driver: strategy comparisons over time or computation budgets."""

from __future__ import annotations

import csv
import enum
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from .accounting import AccountingStrategy
from .executive import run_mission
from .model import Mode, ResourceKind, Scenario, action_cost, distance
from .planner import SearchConfig
from .sampler import EnvironmentProfile, derive_seed
from .scenarios import generate

__all__ = [
    "CSV_COLUMNS",
    "SUMMARY_COLUMNS",
    "Experiment",
    "ExperimentSpec",
    "RunRecord",
    "SummaryRow",
    "default_time_budgets",
    "emit_csv",
    "make_scenarios",
    "run_experiment",
    "summarize",
]

SWEEP_TIME_BUDGET = 600.0

CSV_COLUMNS = (
    "experiment",
    "strategy",
    "time_budget",
    "computation_budget",
    "scenario_id",
    "run_id",
    "success",
    "objectives",
    "hi_completed",
    "lo_completed",
    "mode_switches",
    "consumed_duration",
    "consumed_energy",
)

SUMMARY_COLUMNS = (
    "experiment",
    "strategy",
    "time_budget",
    "computation_budget",
    "n",
    "success_rate",
    "success_stderr",
    "mean_objectives",
    "stderr_objectives",
    "mean_hi_completed",
    "mean_lo_completed",
)


class Experiment(enum.Enum):
    PESSIMISTIC_BASELINE = "pessimistic"
    OPTIMISTIC_BASELINE = "optimistic"
    COMPUTATION_SWEEP = "computation"

    @property
    def strategies(self) -> tuple[AccountingStrategy, AccountingStrategy]:
        baseline = (
            AccountingStrategy.OPTIMISTIC_ONLY
            if self is Experiment.OPTIMISTIC_BASELINE
            else AccountingStrategy.PESSIMISTIC_ONLY
        )
        return baseline, AccountingStrategy.MIXED_CRITICALITY

    @property
    def default_profile(self) -> EnvironmentProfile:
        if self is Experiment.OPTIMISTIC_BASELINE:
            return EnvironmentProfile.exceptional()
        return EnvironmentProfile.normal()


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: Experiment
    scenarios: int = 50
    runs_per_scenario: int = 100
    # empty means: default_time_budgets(...) over the generated scenario set
    time_budgets: tuple[float, ...] = ()
    computation_budgets: tuple[int, ...] = (600,)
    profile: EnvironmentProfile | None = None
    replan_period: int = 2
    seed: int = 0
    horizon: int = 5
    exploration_c: float = 0.5
    n_targets: int = 15
    n_hi: int = 4
    table1_literal: bool = False
    n_time_budgets: int = 8

    def __post_init__(self):
        if self.scenarios < 1 or self.runs_per_scenario < 1:
            raise ValueError("scenarios and runs_per_scenario must be positive")
        if not self.computation_budgets:
            raise ValueError("computation_budgets must be non-empty")
        if any(c < 1 for c in self.computation_budgets):
            raise ValueError("computation budgets must be >= 1")
        if any(not t > 0 for t in self.time_budgets):
            raise ValueError("time budgets must be positive")
        if self.replan_period < 1:
            raise ValueError("replan_period must be >= 1")
        if self.n_time_budgets < 2:
            raise ValueError("n_time_budgets must be >= 2")

    @property
    def environment(self) -> EnvironmentProfile:
        return self.profile or self.experiment.default_profile


@dataclass(frozen=True)
class RunRecord:
    experiment: str
    strategy: str
    time_budget: float
    computation_budget: int
    scenario_id: int
    run_id: int
    success: bool
    objectives: int
    hi_completed: int
    lo_completed: int
    mode_switches: int
    consumed_duration: float
    consumed_energy: float


@dataclass(frozen=True)
class SummaryRow:
    experiment: str
    strategy: str
    time_budget: float
    computation_budget: int
    n: int
    success_rate: float
    success_stderr: float
    mean_objectives: float
    stderr_objectives: float
    mean_hi_completed: float
    mean_lo_completed: float


def make_scenarios(spec: ExperimentSpec) -> list[Scenario]:
    return [
        generate(
            derive_seed(spec.seed, "scenario", i) % 2**32,
            spec.n_targets,
            spec.n_hi,
            table1_literal=spec.table1_literal,
        )
        for i in range(spec.scenarios)
    ]


def _nearest_neighbour_hi_duration(s: Scenario) -> float:
    """HI duration of a nearest-neighbour tour through every target, then home."""
    pos = s.start
    todo = list(s.objectives)
    total = 0.0
    while todo:
        nxt = min(todo, key=lambda a: (distance(pos, a.location), a.id))
        total += action_cost(s, pos, nxt, Mode.HI)[ResourceKind.DURATION]
        pos = nxt.location
        todo.remove(nxt)
    return total + action_cost(s, pos, s.recharge, Mode.HI)[ResourceKind.DURATION]


def default_time_budgets(scenarios: Sequence[Scenario], count: int = 8) -> tuple[float, ...]:
    """Evenly spaced time budgets for a scenario set.

    The smallest is the HI duration of the direct return (rounded up to the
    next multiple of 10), so the return barely fits; the largest covers a
    nearest-neighbour tour of all targets under HI costs in every scenario.
    """
    low = max(action_cost(s, s.start, s.recharge, Mode.HI)[ResourceKind.DURATION] for s in scenarios)
    high = max(_nearest_neighbour_hi_duration(s) for s in scenarios)
    low = math.ceil(low / 10.0) * 10.0
    high = max(math.ceil(high / 10.0) * 10.0, low + 10.0 * (count - 1))
    step = (high - low) / (count - 1)
    return tuple(round(low + i * step, 6) for i in range(count))


@dataclass(frozen=True)
class _Task:
    experiment: str
    strategy: AccountingStrategy
    time_budget: float
    computation_budget: int
    scenario_id: int
    run_id: int
    scenario: Scenario
    cfg: SearchConfig
    profile: EnvironmentProfile
    replan_period: int
    seed: int


def _run_task(task: _Task) -> RunRecord:
    s = task.scenario.with_budget(duration=task.time_budget)
    res = run_mission(s, task.cfg, task.profile, task.replan_period, random.Random(task.seed))
    c = res.final_consumed
    return RunRecord(
        experiment=task.experiment,
        strategy=task.strategy.value,
        time_budget=task.time_budget,
        computation_budget=task.computation_budget,
        scenario_id=task.scenario_id,
        run_id=task.run_id,
        success=res.success,
        objectives=res.objectives_achieved,
        hi_completed=res.hi_completed,
        lo_completed=res.lo_completed,
        mode_switches=res.mode_switch_count,
        consumed_duration=c[ResourceKind.DURATION],
        consumed_energy=c[ResourceKind.ENERGY],
    )


def _tasks(spec: ExperimentSpec, scenarios: list[Scenario], time_budgets: Sequence[float]) -> list[_Task]:
    out = []
    for strategy in spec.experiment.strategies:
        for tb in time_budgets:
            for cb in spec.computation_budgets:
                cfg = SearchConfig(cb, spec.horizon, spec.exploration_c, strategy)
                for sid, s in enumerate(scenarios):
                    for run in range(spec.runs_per_scenario):
                        # same seed across strategies and budgets: common random numbers
                        seed = derive_seed(spec.seed, "run", sid, run)
                        out.append(
                            _Task(
                                spec.experiment.value, strategy, float(tb), cb, sid, run, s, cfg,
                                spec.environment, spec.replan_period, seed,
                            )
                        )
    return out


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> list[RunRecord]:
    """Per-run records in a fixed order (strategy, time budget, computation budget, scenario, run)."""
    scenarios = make_scenarios(spec)
    if spec.experiment is Experiment.COMPUTATION_SWEEP:
        time_budgets: Sequence[float] = spec.time_budgets or (SWEEP_TIME_BUDGET,)
    else:
        time_budgets = spec.time_budgets or default_time_budgets(scenarios, spec.n_time_budgets)
    tasks = _tasks(spec, scenarios, time_budgets)
    if jobs <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (jobs * 8))))


def _mean_stderr(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mean = sum(xs) / n
    if n < 2:
        return mean, 0.0
    var = sum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, math.sqrt(var / n)


def summarize(records: Sequence[RunRecord]) -> list[SummaryRow]:
    """Mean and standard error per (experiment, strategy, time budget, computation budget)."""
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.experiment, r.strategy, r.time_budget, r.computation_budget), []).append(r)
    rows = []
    for (exp, strat, tb, cb), rs in groups.items():
        succ_mean, succ_se = _mean_stderr([1.0 if r.success else 0.0 for r in rs])
        obj_mean, obj_se = _mean_stderr([float(r.objectives) for r in rs])
        rows.append(
            SummaryRow(
                experiment=exp,
                strategy=strat,
                time_budget=tb,
                computation_budget=cb,
                n=len(rs),
                success_rate=succ_mean,
                success_stderr=succ_se,
                mean_objectives=obj_mean,
                stderr_objectives=obj_se,
                mean_hi_completed=sum(r.hi_completed for r in rs) / len(rs),
                mean_lo_completed=sum(r.lo_completed for r in rs) / len(rs),
            )
        )
    return rows


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(path: Path, columns: Sequence[str], rows: Sequence) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            d = asdict(row)
            w.writerow([_fmt(d[c]) for c in columns])


def summary_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}_summary{p.suffix or '.csv'}")


def emit_csv(table: Sequence[RunRecord], path: str | Path) -> tuple[Path, Path]:
    """Write per-run records to ``path`` and the aggregate next to it (``*_summary.csv``)."""
    p = Path(path)
    _write(p, CSV_COLUMNS, table)
    sp = summary_path(p)
    _write(sp, SUMMARY_COLUMNS, summarize(table))
    return p, sp
