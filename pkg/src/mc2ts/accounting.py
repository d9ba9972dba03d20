"""Dual accumulated worst-case cost bookkeeping.

Every tree node carries two accumulated budgets per resource: the LO one
(all actions at their optimistic worst case) and the HI one (the worst
outcome over every point at which a LO->HI mode switch could have happened
since the last HI action).

    LO action:  lo_k = lo_{k-1} + C(LO)       hi_k = lo_{k-1} + C(HI)
    HI action:  lo_k = lo_{k-1} + C(LO)       hi_k = max_{h <= j < k} hi_j + C(HI)

where ``h`` is the last HI action on the branch (or the root).  The max is
kept incrementally, per resource, in :class:`BranchContext`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from operator import add, ge, le

from .model import CostVector, Criticality, Mode

__all__ = [
    "AccountingError",
    "AccountingStrategy",
    "BranchContext",
    "BudgetEntry",
    "CostOrderingError",
    "accumulate",
    "accumulate_values",
    "feasible",
    "root_context",
    "strategy_costs",
    "switch_decision",
]

Values = tuple[float, ...]


class AccountingError(AssertionError):
    """An accumulated budget broke dominance or monotonicity."""


class CostOrderingError(ValueError):
    """C(HI) < C(LO) in some component."""


class AccountingStrategy(enum.Enum):
    MIXED_CRITICALITY = "mixed_criticality"
    PESSIMISTIC_ONLY = "pessimistic_only"
    OPTIMISTIC_ONLY = "optimistic_only"


@dataclass(frozen=True)
class BudgetEntry:
    lo: CostVector
    hi: CostVector


@dataclass(frozen=True)
class BranchContext:
    """State carried down a branch: previous entry and the HI window max.

    ``h_marker`` is the depth of the last HI node (0 for the root) and
    ``depth`` the depth of the node owning ``prev``.
    """

    prev: BudgetEntry
    hi_chain_max: CostVector
    h_marker: int = 0
    depth: int = 0


def root_context(kinds) -> BranchContext:
    zero = CostVector.zero(kinds)
    return BranchContext(BudgetEntry(zero, zero), zero)


def accumulate_values(
    prev_lo: Values, chain: Values, is_hi: bool, c_lo: Values, c_hi: Values
) -> tuple[Values, Values, Values]:
    """Raw-tuple form of :func:`accumulate` returning ``(lo, hi, new_chain)``.

    ``chain`` is the running per-resource max of hi over the current window;
    it always includes the previous entry's hi value.
    """
    lo = tuple(map(add, prev_lo, c_lo))
    if is_hi:
        hi = tuple(map(add, chain, c_hi))
        new_chain = hi
    else:
        hi = tuple(map(add, prev_lo, c_hi))
        new_chain = tuple(map(max, chain, hi))
    if not all(map(ge, hi, lo)):
        raise AccountingError(f"dominance broken: hi {hi} < lo {lo}")
    if not all(map(ge, new_chain, chain)):
        raise AccountingError(f"window max decreased: {chain} -> {new_chain}")
    if not all(map(ge, lo, prev_lo)):
        raise AccountingError(f"lo decreased: {prev_lo} -> {lo}")
    return lo, hi, new_chain


def accumulate(
    ctx: BranchContext, crit: Criticality, c_lo: CostVector, c_hi: CostVector
) -> tuple[BudgetEntry, BranchContext]:
    if not c_hi.dominates(c_lo):
        raise CostOrderingError(f"C(HI) {c_hi} < C(LO) {c_lo}")
    kinds = ctx.prev.lo.kinds
    if c_lo.kinds != kinds:
        raise ValueError("cost resources differ from the branch resources")
    is_hi = crit is Criticality.HI
    chain = ctx.hi_chain_max.values
    if not all(map(ge, chain, ctx.prev.hi.values)):
        raise AccountingError("hi_chain_max below previous hi")
    lo, hi, new_chain = accumulate_values(ctx.prev.lo.values, chain, is_hi, c_lo.values, c_hi.values)
    entry = BudgetEntry(CostVector.from_values(kinds, lo), CostVector.from_values(kinds, hi))
    depth = ctx.depth + 1
    new_ctx = BranchContext(
        prev=entry,
        hi_chain_max=CostVector.from_values(kinds, new_chain),
        h_marker=depth if is_hi else ctx.h_marker,
        depth=depth,
    )
    return entry, new_ctx


def feasible(entry: BudgetEntry, budget: CostVector) -> bool:
    """Within budget under HI assumptions (inclusive); hi >= lo makes this sufficient."""
    if entry.hi.kinds != budget.kinds:
        raise ValueError("entry and budget track different resources")
    return all(map(le, entry.hi.values, budget.values))


def switch_decision(actual: CostVector, planned_lo: CostVector) -> Mode:
    """HI iff some resource strictly exceeds its planned LO budget."""
    return Mode.HI if actual.exceeds(planned_lo) else Mode.LO


def strategy_costs(
    strategy: AccountingStrategy, c_lo: CostVector, c_hi: CostVector
) -> tuple[CostVector, CostVector]:
    """Cost pair fed to :func:`accumulate` under a planning strategy.

    With equal LO and HI costs the equations collapse to plain prefix sums,
    so the single-assumption baselines are the same bookkeeping with the
    pair replaced by (C(HI), C(HI)) or (C(LO), C(LO)).
    """
    if strategy is AccountingStrategy.PESSIMISTIC_ONLY:
        return c_hi, c_hi
    if strategy is AccountingStrategy.OPTIMISTIC_ONLY:
        return c_lo, c_lo
    return c_lo, c_hi
