"""Command line entry point: ``mc2ts {generate,plan,simulate,bench}``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import scenarios
from .accounting import AccountingStrategy
from .bench import Experiment, ExperimentSpec, emit_csv, run_experiment
from .executive import run_mission, write_trace
from .model import validate_scenario
from .planner import NoFeasiblePlan, SearchConfig, plan
from .sampler import EnvironmentProfile, derive_seed

STRATEGIES = {
    "mc": AccountingStrategy.MIXED_CRITICALITY,
    "pessimistic": AccountingStrategy.PESSIMISTIC_ONLY,
    "optimistic": AccountingStrategy.OPTIMISTIC_ONLY,
}


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--comp-budget", type=int, default=600, help="selection-phase iterations per plan")
    p.add_argument("--horizon", type=int, default=5)
    p.add_argument("--exploration-c", type=float, default=0.5)
    p.add_argument("--strategy", choices=sorted(STRATEGIES), default="mc")
    p.add_argument("--seed", type=int, default=0)


def _load(args) -> scenarios.Scenario:
    s = scenarios.load(args.scenario)
    if getattr(args, "time_budget", None) is not None:
        s = s.with_budget(duration=args.time_budget)
    return s


def _config(args) -> SearchConfig:
    return SearchConfig(args.comp_budget, args.horizon, args.exploration_c, STRATEGIES[args.strategy])


def cmd_generate(args) -> int:
    s = scenarios.generate(
        args.seed,
        args.n_targets,
        args.n_hi,
        args.grid,
        time_budget=args.time_budget,
        energy_budget=args.energy_budget,
        dependency_chains=args.dependency_chains,
        table1_literal=args.table1_literal,
    )
    text = scenarios.dumps(s)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_plan(args) -> int:
    s = _load(args)
    problems = validate_scenario(s)
    for v in problems:
        print(f"warning: {v.rule}: {v.message}", file=sys.stderr)
    p = plan(s, None, _config(args), random.Random(args.seed))
    doc = {
        "objective": p.objective,
        "steps": [
            {"action_id": st.action.id, "lo": st.budget.lo.as_dict(), "hi": st.budget.hi.as_dict()}
            for st in p.steps
        ],
    }
    print(json.dumps(doc, indent=2))
    return 0


def cmd_simulate(args) -> int:
    s = _load(args)
    profile = EnvironmentProfile.named(args.profile)
    cfg = _config(args)
    for run in range(args.runs):
        res = run_mission(s, cfg, profile, args.replan_period, random.Random(derive_seed(args.seed, run)))
        if args.trace and run == 0:
            write_trace(res.trace, args.trace)
        print(
            json.dumps(
                {
                    "run": run,
                    "success": res.success,
                    "objectives": res.objectives_achieved,
                    "hi_completed": res.hi_completed,
                    "lo_completed": res.lo_completed,
                    "mode_switches": res.mode_switch_count,
                    "consumed": res.final_consumed.as_dict(),
                    "failure": res.failure,
                }
            )
        )
    return 0


def cmd_bench(args) -> int:
    experiment = Experiment(args.experiment)
    spec = ExperimentSpec(
        experiment=experiment,
        scenarios=args.scenarios,
        runs_per_scenario=args.runs,
        time_budgets=args.time_budgets or (),
        computation_budgets=args.comp_budgets
        or ((10, 30, 100, 300, 600, 1000) if experiment is Experiment.COMPUTATION_SWEEP else (600,)),
        profile=EnvironmentProfile.named(args.profile) if args.profile else None,
        replan_period=args.replan_period,
        seed=args.seed,
        table1_literal=args.table1_literal,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = run_experiment(spec, jobs=args.jobs)
    runs_path, summary = emit_csv(records, out / f"{experiment.value}_runs.csv")
    print(f"wrote {runs_path} and {summary}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mc2ts", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random scenario file")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n-targets", type=int, default=15)
    g.add_argument("--n-hi", type=int, default=4)
    g.add_argument("--grid", type=float, default=100.0)
    g.add_argument("--time-budget", type=float, default=scenarios.DEFAULT_TIME_BUDGET)
    g.add_argument("--energy-budget", type=float, default=scenarios.DEFAULT_ENERGY_BUDGET)
    g.add_argument("--dependency-chains", type=int, default=0)
    g.add_argument("--table1-literal", action="store_true", help="use the uncorrected HI move energy (0.1)")
    g.add_argument("--out", help="output path (default: stdout)")
    g.set_defaults(func=cmd_generate)

    p = sub.add_parser("plan", help="build one plan from the mission start")
    p.add_argument("scenario")
    p.add_argument("--time-budget", type=float)
    _search_args(p)
    p.set_defaults(func=cmd_plan)

    m = sub.add_parser("simulate", help="simulate missions on a scenario")
    m.add_argument("scenario")
    m.add_argument("--time-budget", type=float)
    m.add_argument("--profile", choices=("normal", "exceptional"), default="normal")
    m.add_argument("--replan-period", type=int, default=2)
    m.add_argument("--runs", type=int, default=1)
    m.add_argument("--trace", help="write the first run's trace as JSON lines")
    _search_args(m)
    m.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="run a strategy comparison and write CSV files")
    b.add_argument("--experiment", choices=[e.value for e in Experiment], required=True)
    b.add_argument("--scenarios", type=int, default=50)
    b.add_argument("--runs", type=int, default=100)
    b.add_argument("--time-budgets", type=_float_list)
    b.add_argument("--comp-budgets", type=_int_list)
    b.add_argument("--profile", choices=("normal", "exceptional"))
    b.add_argument("--replan-period", type=int, default=2)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.add_argument("--table1-literal", action="store_true")
    b.add_argument("--jobs", type=int, default=1, help="worker processes")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (scenarios.ScenarioFormatError, NoFeasiblePlan, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
