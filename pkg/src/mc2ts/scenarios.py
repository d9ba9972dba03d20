"""Random scenario generation and the JSON scenario file format."""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Any

from .model import (
    HI_REWARD,
    LO_REWARD,
    RECHARGE_REWARD,
    ActionKind,
    ActionSpec,
    CostVector,
    Criticality,
    ResourceKind,
    Scenario,
    UnitCosts,
)

__all__ = [
    "ScenarioFormatError",
    "DEFAULT_ENERGY_BUDGET",
    "DEFAULT_TIME_BUDGET",
    "RECHARGE_ID",
    "generate",
    "load",
    "loads",
    "save",
    "dumps",
    "scenario_to_dict",
    "scenario_from_dict",
]

DEFAULT_ENERGY_BUDGET = 60.0
DEFAULT_TIME_BUDGET = 1000.0
RECHARGE_ID = 0

_TOP_FIELDS = ("grid_size", "start", "recharge_site", "budget", "unit_costs", "actions", "rng_seed")
_ACTION_FIELDS = ("id", "kind", "x", "y", "criticality", "reward", "depends_on")
_COST_TABLE = ("move", "retrieve", "recharge")


class ScenarioFormatError(ValueError):
    """Malformed scenario document; the message names the offending field."""


def generate(
    seed: int,
    n_targets: int = 15,
    n_hi: int = 4,
    grid: float = 100.0,
    *,
    time_budget: float = DEFAULT_TIME_BUDGET,
    energy_budget: float = DEFAULT_ENERGY_BUDGET,
    dependency_chains: int = 0,
    table1_literal: bool = False,
) -> Scenario:
    """Random data-collection scenario.

    Targets are uniform over the grid; ``n_hi`` of them are HI.  The robot
    starts at (0, 0) and must end at (grid, grid), where the recharge action
    (id 0) sits.  ``dependency_chains`` adds that many random LO->LO chains
    of two or three targets each.
    """
    if not 1 <= n_hi < n_targets:
        raise ValueError(f"need 1 <= n_hi < n_targets, got n_hi={n_hi}, n_targets={n_targets}")
    if not grid > 0:
        raise ValueError("grid must be positive")
    n_lo = n_targets - n_hi
    if not n_lo * LO_REWARD < HI_REWARD:
        raise ValueError(f"{n_lo} LO targets would outweigh a HI target (reward dominance)")
    if dependency_chains < 0:
        raise ValueError("dependency_chains must be >= 0")

    rng = random.Random(seed)
    points = [(rng.uniform(0.0, grid), rng.uniform(0.0, grid)) for _ in range(n_targets)]
    hi_ids = set(rng.sample(range(1, n_targets + 1), n_hi))
    lo_ids = [i for i in range(1, n_targets + 1) if i not in hi_ids]

    deps: dict[int, set[int]] = {i: set() for i in range(1, n_targets + 1)}
    pool = list(lo_ids)
    rng.shuffle(pool)
    for _ in range(dependency_chains):
        length = min(len(pool), rng.choice((2, 3)))
        if length < 2:
            break
        chain, pool = pool[:length], pool[length:]
        for before, after in zip(chain, chain[1:]):
            deps[after].add(before)

    actions = [
        ActionSpec(
            id=RECHARGE_ID,
            kind=ActionKind.RECHARGE_RETURN,
            location=(grid, grid),
            criticality=Criticality.HI,
            reward=RECHARGE_REWARD,
        )
    ]
    for i, p in enumerate(points, start=1):
        hi = i in hi_ids
        actions.append(
            ActionSpec(
                id=i,
                kind=ActionKind.RETRIEVE_DATA,
                location=p,
                criticality=Criticality.HI if hi else Criticality.LO,
                reward=HI_REWARD if hi else LO_REWARD,
                depends_on=frozenset(deps[i]),
            )
        )
    return Scenario(
        grid_size=float(grid),
        start=(0.0, 0.0),
        recharge_site=(float(grid), float(grid)),
        actions=tuple(actions),
        unit_costs=UnitCosts.standard(literal=table1_literal),
        budget=CostVector.of(duration=time_budget, energy=energy_budget),
        rng_seed=seed,
    )


# -- serialisation -------------------------------------------------------------


def _cost_dict(c: CostVector) -> dict[str, float]:
    return c.as_dict()


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    u = s.unit_costs
    return {
        "grid_size": s.grid_size,
        "start": list(s.start),
        "recharge_site": list(s.recharge_site),
        "budget": _cost_dict(s.budget),
        "unit_costs": {
            "move": {"lo": _cost_dict(u.move_lo), "hi": _cost_dict(u.move_hi)},
            "retrieve": {"lo": _cost_dict(u.retrieve_lo), "hi": _cost_dict(u.retrieve_hi)},
            "recharge": {"lo": _cost_dict(u.recharge_lo), "hi": _cost_dict(u.recharge_hi)},
        },
        "actions": [
            {
                "id": a.id,
                "kind": a.kind.value,
                "x": a.location[0],
                "y": a.location[1],
                "criticality": a.criticality.value,
                "reward": a.reward,
                "depends_on": sorted(a.depends_on),
            }
            for a in s.actions
        ],
        "rng_seed": s.rng_seed,
    }


def _strict_keys(obj: Any, allowed: tuple[str, ...], where: str, required: tuple[str, ...] | None = None) -> None:
    if not isinstance(obj, dict):
        raise ScenarioFormatError(f"{where}: expected an object")
    for key in obj:
        if key not in allowed:
            raise ScenarioFormatError(f"{where}: unknown field {key!r}")
    for key in allowed if required is None else required:
        if key not in obj:
            raise ScenarioFormatError(f"{where}: missing field {key!r}")


def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioFormatError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _point(v: Any, where: str) -> tuple[float, float]:
    if not isinstance(v, list) or len(v) != 2:
        raise ScenarioFormatError(f"{where}: expected [x, y]")
    return (_number(v[0], f"{where}[0]"), _number(v[1], f"{where}[1]"))


def _cost(v: Any, where: str) -> CostVector:
    if not isinstance(v, dict) or not v:
        raise ScenarioFormatError(f"{where}: expected a non-empty object of resource costs")
    comps = {}
    for key, val in v.items():
        try:
            kind = ResourceKind(key)
        except ValueError:
            raise ScenarioFormatError(f"{where}: unknown field {key!r}") from None
        comps[kind] = _number(val, f"{where}.{key}")
    try:
        return CostVector(comps)
    except ValueError as exc:
        raise ScenarioFormatError(f"{where}: {exc}") from None


def _enum(cls, v: Any, where: str):
    try:
        return cls(v)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ScenarioFormatError(f"{where}: {v!r} is not one of {choices}") from None


def scenario_from_dict(doc: Any) -> Scenario:
    _strict_keys(doc, _TOP_FIELDS, "scenario")
    costs = doc["unit_costs"]
    _strict_keys(costs, _COST_TABLE, "unit_costs")
    table = {}
    for name in _COST_TABLE:
        _strict_keys(costs[name], ("lo", "hi"), f"unit_costs.{name}")
        table[f"{name}_lo"] = _cost(costs[name]["lo"], f"unit_costs.{name}.lo")
        table[f"{name}_hi"] = _cost(costs[name]["hi"], f"unit_costs.{name}.hi")

    if not isinstance(doc["actions"], list):
        raise ScenarioFormatError("actions: expected a list")
    actions = []
    for i, raw in enumerate(doc["actions"]):
        where = f"actions[{i}]"
        _strict_keys(raw, _ACTION_FIELDS, where, required=("id", "kind", "x", "y", "criticality", "reward"))
        if isinstance(raw["id"], bool) or not isinstance(raw["id"], int):
            raise ScenarioFormatError(f"{where}.id: expected an integer")
        deps = raw.get("depends_on", [])
        if not isinstance(deps, list) or not all(isinstance(d, int) and not isinstance(d, bool) for d in deps):
            raise ScenarioFormatError(f"{where}.depends_on: expected a list of integers")
        actions.append(
            ActionSpec(
                id=raw["id"],
                kind=_enum(ActionKind, raw["kind"], f"{where}.kind"),
                location=(_number(raw["x"], f"{where}.x"), _number(raw["y"], f"{where}.y")),
                criticality=_enum(Criticality, raw["criticality"], f"{where}.criticality"),
                reward=_number(raw["reward"], f"{where}.reward"),
                depends_on=frozenset(deps),
            )
        )
    seed = doc["rng_seed"]
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioFormatError("rng_seed: expected an integer")
    grid = _number(doc["grid_size"], "grid_size")
    if not grid > 0:
        raise ScenarioFormatError("grid_size: must be positive")
    return Scenario(
        grid_size=grid,
        start=_point(doc["start"], "start"),
        recharge_site=_point(doc["recharge_site"], "recharge_site"),
        actions=tuple(actions),
        unit_costs=UnitCosts(**table),
        budget=_cost(doc["budget"], "budget"),
        rng_seed=seed,
    )


def dumps(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


def loads(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return scenario_from_dict(doc)
    except ScenarioFormatError as exc:
        raise ScenarioFormatError(f"{source}: {exc}") from None


def save(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps(s), encoding="utf-8")


def load(path: str | Path) -> Scenario:
    p = Path(path)
    return loads(p.read_text(encoding="utf-8"), source=str(p))
