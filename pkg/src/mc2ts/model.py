"""Mission domain types: resources, cost vectors, actions and scenarios."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping

__all__ = [
    "ActionKind",
    "ActionSpec",
    "CostVector",
    "Criticality",
    "Mode",
    "ResourceKind",
    "Scenario",
    "UnitCosts",
    "Violation",
    "action_cost",
    "distance",
    "validate_scenario",
    "HI_REWARD",
    "LO_REWARD",
    "RECHARGE_REWARD",
]

Point = tuple[float, float]

RECHARGE_REWARD = 1.0
HI_REWARD = 0.2
LO_REWARD = 0.0166


class ResourceKind(enum.Enum):
    DURATION = "duration"
    ENERGY = "energy"


# canonical component order inside every CostVector
_ORDER = {kind: i for i, kind in enumerate(ResourceKind)}


class Criticality(enum.Enum):
    LO = "LO"
    HI = "HI"


class Mode(enum.Enum):
    LO = "LO"
    HI = "HI"


class ActionKind(enum.Enum):
    REACH = "reach"
    RETRIEVE_DATA = "retrieve_data"
    RECHARGE_RETURN = "recharge_return"


_new = object.__new__
_set = object.__setattr__


class CostVector:
    """Immutable per-resource magnitudes.

    Components are stored in a fixed resource order, so two vectors over the
    same resources can be combined component by component.
    """

    __slots__ = ("kinds", "values")

    kinds: tuple[ResourceKind, ...]
    values: tuple[float, ...]

    def __init__(self, values: Mapping[ResourceKind, float]):
        kinds = tuple(sorted(values, key=_ORDER.__getitem__))
        vals = tuple(float(values[k]) for k in kinds)
        for kind, v in zip(kinds, vals):
            if not v >= 0.0:
                raise ValueError(f"cost component {kind.value} must be >= 0, got {v!r}")
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, **components: float) -> CostVector:
        """``CostVector.of(duration=5.0, energy=1.0)``"""
        return cls({ResourceKind(name): v for name, v in components.items()})

    @classmethod
    def from_values(cls, kinds: tuple[ResourceKind, ...], values: Iterable[float]) -> CostVector:
        # trusted fast path: kinds already canonical, values non-negative
        obj = _new(cls)
        _set(obj, "kinds", kinds)
        _set(obj, "values", values if type(values) is tuple else tuple(values))
        return obj

    @classmethod
    def zero(cls, kinds: Iterable[ResourceKind]) -> CostVector:
        return cls({k: 0.0 for k in kinds})

    def __setattr__(self, name, value):
        raise AttributeError("CostVector is immutable")

    def __reduce__(self):
        return (CostVector.from_values, (self.kinds, self.values))

    def __getitem__(self, kind: ResourceKind) -> float:
        try:
            return self.values[self.kinds.index(kind)]
        except ValueError:
            raise KeyError(f"resource {kind.value!r} is not tracked") from None

    def __iter__(self) -> Iterator[ResourceKind]:
        return iter(self.kinds)

    def __len__(self) -> int:
        return len(self.kinds)

    def _check_same(self, other: CostVector) -> None:
        if self.kinds != other.kinds:
            raise ValueError(
                f"resource sets differ: {[k.value for k in self.kinds]} vs {[k.value for k in other.kinds]}"
            )

    def __add__(self, other: CostVector) -> CostVector:
        self._check_same(other)
        return CostVector.from_values(self.kinds, [a + b for a, b in zip(self.values, other.values)])

    def __sub__(self, other: CostVector) -> CostVector:
        # consumption deltas; clamps tiny negative rounding residue to zero
        self._check_same(other)
        return CostVector.from_values(self.kinds, [max(a - b, 0.0) for a, b in zip(self.values, other.values)])

    def scaled(self, factor: float) -> CostVector:
        if factor < 0:
            raise ValueError("scale factor must be >= 0")
        return CostVector.from_values(self.kinds, [v * factor for v in self.values])

    def maximum(self, other: CostVector) -> CostVector:
        self._check_same(other)
        return CostVector.from_values(self.kinds, [max(a, b) for a, b in zip(self.values, other.values)])

    def dominates(self, other: CostVector) -> bool:
        """True iff every component of self is >= the same component of other."""
        self._check_same(other)
        return all(a >= b for a, b in zip(self.values, other.values))

    def exceeds(self, other: CostVector) -> bool:
        """True iff at least one component of self is strictly greater."""
        self._check_same(other)
        return any(a > b for a, b in zip(self.values, other.values))

    def as_dict(self) -> dict[str, float]:
        return {k.value: v for k, v in zip(self.kinds, self.values)}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CostVector):
            return NotImplemented
        return self.kinds == other.kinds and self.values == other.values

    def __hash__(self) -> int:
        return hash((self.kinds, self.values))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k.value}={v!r}" for k, v in zip(self.kinds, self.values))
        return f"CostVector({inner})"


@dataclass(frozen=True)
class UnitCosts:
    """Per-unit move and fixed per-kind costs, one variant per mode assumption."""

    move_lo: CostVector
    move_hi: CostVector
    retrieve_lo: CostVector
    retrieve_hi: CostVector
    recharge_lo: CostVector
    recharge_hi: CostVector

    @classmethod
    def standard(cls, *, literal: bool = False) -> UnitCosts:
        """Default action costs.

        With ``literal=True`` the HI move energy is 0.1 (below the LO value of
        0.2, which breaks the cost ordering); otherwise it is 0.4, i.e. twice
        the LO allowance like every other HI entry.
        """
        return cls(
            move_lo=CostVector.of(duration=2.0, energy=0.2),
            move_hi=CostVector.of(duration=4.0, energy=0.1 if literal else 0.4),
            retrieve_lo=CostVector.of(duration=5.0, energy=1.0),
            retrieve_hi=CostVector.of(duration=10.0, energy=2.0),
            recharge_lo=CostVector.of(duration=0.0, energy=0.0),
            recharge_hi=CostVector.of(duration=0.0, energy=0.0),
        )

    def move(self, mode: Mode) -> CostVector:
        return self.move_hi if mode is Mode.HI else self.move_lo

    def fixed(self, kind: ActionKind, mode: Mode) -> CostVector | None:
        hi = mode is Mode.HI
        if kind is ActionKind.RETRIEVE_DATA:
            return self.retrieve_hi if hi else self.retrieve_lo
        if kind is ActionKind.RECHARGE_RETURN:
            return self.recharge_hi if hi else self.recharge_lo
        if kind is ActionKind.REACH:
            return None
        raise ValueError(f"unknown action kind {kind!r}")

    def pairs(self) -> Iterator[tuple[str, CostVector, CostVector]]:
        yield "move", self.move_lo, self.move_hi
        yield "retrieve", self.retrieve_lo, self.retrieve_hi
        yield "recharge", self.recharge_lo, self.recharge_hi


@dataclass(frozen=True)
class ActionSpec:
    id: int
    kind: ActionKind
    location: Point
    criticality: Criticality
    reward: float
    depends_on: frozenset[int] = field(default_factory=frozenset)

    @property
    def is_hi(self) -> bool:
        return self.criticality is Criticality.HI

    @property
    def is_recharge(self) -> bool:
        return self.kind is ActionKind.RECHARGE_RETURN


@dataclass(frozen=True)
class Scenario:
    grid_size: float
    start: Point
    recharge_site: Point
    actions: tuple[ActionSpec, ...]
    unit_costs: UnitCosts
    budget: CostVector
    rng_seed: int = 0

    @property
    def resources(self) -> tuple[ResourceKind, ...]:
        return self.budget.kinds

    def action(self, action_id: int) -> ActionSpec:
        for a in self.actions:
            if a.id == action_id:
                return a
        raise KeyError(f"no action with id {action_id}")

    @property
    def recharge(self) -> ActionSpec:
        for a in self.actions:
            if a.is_recharge:
                return a
        raise LookupError("scenario has no recharge_return action")

    @property
    def objectives(self) -> tuple[ActionSpec, ...]:
        return tuple(a for a in self.actions if not a.is_recharge)

    def with_budget(self, **components: float) -> Scenario:
        """Copy with some budget components replaced (by resource name)."""
        values = self.budget.as_dict()
        values.update(components)
        return replace(self, budget=CostVector.of(**values))


@dataclass(frozen=True)
class Violation:
    rule: str
    action_ids: tuple[int, ...]
    message: str


def distance(p: Point, q: Point) -> float:
    return math.hypot(q[0] - p[0], q[1] - p[1])


def _restrict(cost: CostVector, kinds: tuple[ResourceKind, ...]) -> CostVector:
    return CostVector.from_values(kinds, [cost[k] for k in kinds])


def action_cost(s: Scenario, from_pos: Point, a: ActionSpec, mode_assumption: Mode) -> CostVector:
    """Worst-case cost of travelling from ``from_pos`` to ``a`` and performing it."""
    kinds = s.resources
    d = distance(from_pos, a.location)
    move = s.unit_costs.move(mode_assumption)
    fixed = s.unit_costs.fixed(a.kind, mode_assumption)
    vals = [d * move[k] for k in kinds]
    if fixed is not None:
        vals = [v + fixed[k] for v, k in zip(vals, kinds)]
    return CostVector.from_values(kinds, vals)


def _inside(p: Point, size: float) -> bool:
    return 0.0 <= p[0] <= size and 0.0 <= p[1] <= size


def validate_scenario(s: Scenario) -> list[Violation]:
    """Every broken scenario invariant; an empty list means the scenario is valid."""
    out: list[Violation] = []
    ids = [a.id for a in s.actions]
    by_id = {a.id: a for a in s.actions}

    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        out.append(Violation("duplicate id", tuple(dupes), "action ids must be unique"))

    for name, lo, hi in s.unit_costs.pairs():
        bad = [k.value for k in s.resources if k in lo.kinds and k in hi.kinds and hi[k] < lo[k]]
        if bad:
            if name == "move":
                affected = ids
            else:
                kind = ActionKind.RETRIEVE_DATA if name == "retrieve" else ActionKind.RECHARGE_RETURN
                affected = [a.id for a in s.actions if a.kind is kind]
            out.append(
                Violation(
                    "cost ordering",
                    tuple(affected),
                    f"{name} cost has C(HI) < C(LO) for {', '.join(bad)}",
                )
            )

    for a in s.actions:
        unknown = sorted(d for d in a.depends_on if d not in by_id)
        if unknown:
            out.append(Violation("unknown dependency", (a.id, *unknown), f"action {a.id} depends on missing ids"))
        if a.is_hi:
            lo_deps = sorted(d for d in a.depends_on if d in by_id and not by_id[d].is_hi)
            if lo_deps:
                out.append(
                    Violation(
                        "criticality dependency",
                        (a.id, *lo_deps),
                        f"HI action {a.id} depends on LO actions {lo_deps}",
                    )
                )
        if a.reward <= 0:
            out.append(Violation("non-positive reward", (a.id,), f"action {a.id} has reward {a.reward!r}"))
        if not _inside(a.location, s.grid_size):
            out.append(Violation("outside grid", (a.id,), f"action {a.id} at {a.location} is off the grid"))
    if a_cycle := _dependency_cycle(s.actions):
        out.append(Violation("dependency cycle", tuple(a_cycle), "dependencies form a cycle"))

    for name, p in (("start", s.start), ("recharge_site", s.recharge_site)):
        if not _inside(p, s.grid_size):
            out.append(Violation("outside grid", (), f"{name} {p} is off the grid"))

    hi_actions = [a for a in s.actions if a.is_hi]
    lo_actions = [a for a in s.actions if not a.is_hi]
    if not hi_actions or not lo_actions:
        out.append(Violation("empty criticality set", (), "both HI and LO action sets must be non-empty"))
    lo_total = sum(a.reward for a in lo_actions)
    weak = [a.id for a in hi_actions if not lo_total < a.reward]
    if weak:
        out.append(
            Violation(
                "reward dominance",
                tuple(weak),
                f"sum of LO rewards {lo_total!r} is not below the reward of HI actions {weak}",
            )
        )

    recharges = [a for a in s.actions if a.is_recharge]
    if len(recharges) != 1:
        out.append(
            Violation("recharge action", tuple(a.id for a in recharges), "exactly one recharge_return action required")
        )
    else:
        r = recharges[0]
        if not r.is_hi or tuple(r.location) != tuple(s.recharge_site):
            out.append(Violation("recharge action", (r.id,), "recharge_return must be HI and sit at recharge_site"))

    for name, vec in (("budget", s.budget),) + tuple((n, v) for n, lo, hi in s.unit_costs.pairs() for v in (lo, hi)):
        missing = [k.value for k in s.resources if k not in vec.kinds]
        if missing:
            out.append(Violation("resource set", (), f"{name} lacks resources {missing}"))
    return out


def _dependency_cycle(actions: tuple[ActionSpec, ...]) -> list[int]:
    deps = {a.id: a.depends_on for a in actions}
    state: dict[int, int] = {}

    def visit(n: int, trail: list[int]) -> list[int]:
        state[n] = 1
        for d in sorted(deps.get(n, ())):
            if d not in deps:
                continue
            if state.get(d) == 1:
                return trail + [d]
            if d not in state and (found := visit(d, trail + [d])):
                return found
        state[n] = 2
        return []

    for a in actions:
        if a.id not in state and (found := visit(a.id, [a.id])):
            return found
    return []
