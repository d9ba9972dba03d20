"""UCT tree search over mission actions with dual worst-case budgets.

Search builds a fresh tree per call.  Each node is a partial action
sequence; an action may extend a node only if the resulting HI budget fits
the remaining resources *and* the recharge return would still fit right
after it, so every node of the tree can be closed by a safe return.  The
return is the only terminal action.  Rollouts pick dependency-satisfied
feasible actions uniformly at random for up to ``horizon`` steps and are
then closed by the return before being scored.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from operator import le
from typing import TYPE_CHECKING, Iterable, Iterator

from .accounting import (
    AccountingStrategy,
    BranchContext,
    BudgetEntry,
    CostOrderingError,
    accumulate_values,
    strategy_costs,
)
from .model import ActionSpec, CostVector, Mode, ResourceKind, Scenario, action_cost

if TYPE_CHECKING:
    from .executive import ExecutionState

__all__ = [
    "NoFeasiblePlan",
    "Plan",
    "PlanStep",
    "SearchConfig",
    "SearchResult",
    "TreeNode",
    "TreeSearch",
    "backpropagate",
    "objective_value",
    "plan",
    "search",
    "uct_score",
]

TIME_WEIGHT = 1e-4
NORMALIZER = 7.5


class NoFeasiblePlan(RuntimeError):
    """Not even the recharge return fits the remaining budget."""


@dataclass(frozen=True)
class SearchConfig:
    computation_budget: int = 600
    horizon: int = 5
    exploration_c: float = 0.5
    accounting_strategy: AccountingStrategy = AccountingStrategy.MIXED_CRITICALITY

    def __post_init__(self):
        if self.computation_budget < 1:
            raise ValueError("computation_budget must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.exploration_c < 0:
            raise ValueError("exploration_c must be >= 0")


@dataclass(frozen=True)
class PlanStep:
    action: ActionSpec
    budget: BudgetEntry


@dataclass(frozen=True)
class Plan:
    steps: tuple[PlanStep, ...]
    objective: float

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[PlanStep]:
        return iter(self.steps)

    @property
    def action_ids(self) -> tuple[int, ...]:
        return tuple(step.action.id for step in self.steps)


def _objective(reward_sum: float, t: float, b_time: float) -> float:
    return (reward_sum - (t / b_time) * TIME_WEIGHT) / NORMALIZER


def objective_value(completed: Iterable[ActionSpec], t: float, b_time: float) -> float:
    """Normalised mission value: rewards minus a tiny elapsed-time penalty."""
    if not b_time > 0:
        raise ValueError("b_time must be positive")
    return _objective(sum(a.reward for a in completed), t, b_time)


def uct_score(mean: float, parent_visits: int, child_visits: int, c: float) -> float:
    return mean + c * math.sqrt(math.log(parent_visits) / child_visits)


class TreeNode:
    __slots__ = (
        "action",
        "index",
        "parent",
        "children",
        "visits",
        "total_value",
        "own_rollouts",
        "lo",
        "hi",
        "chain",
        "depth",
        "h_marker",
        "mask",
        "reward_sum",
        "terminal",
        "candidates",
        "solved",
        "exact_value",
        "unsolved",
        "kinds",
    )

    def __init__(self, action, index, parent, lo, hi, chain, mask, reward_sum, kinds):
        self.action: ActionSpec | None = action
        self.index: int = index
        self.parent: TreeNode | None = parent
        self.children: dict[int, TreeNode] = {}
        self.visits = 0
        self.total_value = 0.0
        self.own_rollouts = 0
        self.lo = lo
        self.hi = hi
        self.chain = chain
        self.mask = mask
        self.reward_sum = reward_sum
        self.kinds = kinds
        if parent is None:
            self.depth = 0
            self.h_marker = 0
        else:
            self.depth = parent.depth + 1
            self.h_marker = self.depth if action.is_hi else parent.h_marker
        self.terminal = action is not None and action.is_recharge
        # feasible untried expansions as (index, lo, hi, chain); None until first selected
        self.candidates: list | None = [] if self.terminal else None
        self.solved = False
        self.exact_value = 0.0
        self.unsolved = 0

    @property
    def action_id(self) -> int | None:
        return None if self.action is None else self.action.id

    @property
    def mean(self) -> float:
        return self.total_value / self.visits if self.visits else 0.0

    @property
    def budget(self) -> BudgetEntry:
        return BudgetEntry(CostVector.from_values(self.kinds, self.lo), CostVector.from_values(self.kinds, self.hi))

    @property
    def branch_ctx(self) -> BranchContext:
        return BranchContext(
            prev=self.budget,
            hi_chain_max=CostVector.from_values(self.kinds, self.chain),
            h_marker=self.h_marker,
            depth=self.depth,
        )

    def path(self) -> list[TreeNode]:
        out = []
        node: TreeNode | None = self
        while node is not None:
            out.append(node)
            node = node.parent
        out.reverse()
        return out

    @property
    def completed_set(self) -> frozenset[int]:
        """Action ids on the path from the root (mission history excluded)."""
        return frozenset(n.action.id for n in self.path() if n.action is not None)

    def iter_subtree(self) -> Iterator[TreeNode]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(list(node.children.values())))

    def __repr__(self) -> str:
        return f"TreeNode(action={self.action_id}, visits={self.visits}, mean={self.mean:.6f})"


def backpropagate(path: list[TreeNode], value: float) -> None:
    for node in path:
        node.visits += 1
        node.total_value += value
    path[-1].own_rollouts += 1


@dataclass
class SearchResult:
    plan: Plan
    root: TreeNode
    iterations: int


class TreeSearch:
    """One search instance: precomputed leg costs plus the tree under construction."""

    def __init__(
        self,
        scenario: Scenario,
        from_state: ExecutionState | None,
        cfg: SearchConfig,
        rng: random.Random,
    ):
        self.scenario = scenario
        self.cfg = cfg
        self.rng = rng
        kinds = scenario.resources
        self.kinds = kinds

        if from_state is None:
            position = scenario.start
            consumed = CostVector.zero(kinds)
            done: frozenset[int] = frozenset()
        else:
            position = from_state.position
            consumed = from_state.consumed
            done = frozenset(from_state.completed)
        self.budget = tuple(b - c for b, c in zip(scenario.budget.values, consumed.values))

        self.actions = sorted((a for a in scenario.actions if a.id not in done), key=lambda a: a.id)
        n = len(self.actions)
        index = {a.id: j for j, a in enumerate(self.actions)}
        recharges = [j for j, a in enumerate(self.actions) if a.is_recharge]
        if len(recharges) != 1:
            raise ValueError("scenario must hold exactly one pending recharge_return action")
        self.recharge = recharges[0]
        self.objective_idx = [j for j in range(n) if j != self.recharge]
        self.bits = [1 << j for j in range(n)]
        self.dep = [
            sum(1 << index[d] for d in a.depends_on if d in index) for a in self.actions
        ]
        self.is_hi = [a.is_hi for a in self.actions]
        self.reward = [a.reward for a in self.actions]

        # leg costs from every position (actions, then current position) to every action
        strategy = cfg.accounting_strategy
        origins = [a.location for a in self.actions] + [position]
        self.origin = n
        self.c_lo: list[list[tuple]] = []
        self.c_hi: list[list[tuple]] = []
        for p in origins:
            row_lo, row_hi = [], []
            for a in self.actions:
                lo, hi = strategy_costs(
                    strategy,
                    action_cost(scenario, p, a, Mode.LO),
                    action_cost(scenario, p, a, Mode.HI),
                )
                if not hi.dominates(lo):
                    raise CostOrderingError(
                        f"action {a.id}: C(HI) {hi} < C(LO) {lo}; mixed-criticality accounting needs C(HI) >= C(LO)"
                    )
                row_lo.append(lo.values)
                row_hi.append(hi.values)
            self.c_lo.append(row_lo)
            self.c_hi.append(row_hi)

        if ResourceKind.DURATION in kinds:
            self.t_index = kinds.index(ResourceKind.DURATION)
            self.b_time = scenario.budget[ResourceKind.DURATION]
            self.base_t = consumed[ResourceKind.DURATION]
        else:
            self.t_index = None
            self.b_time = 1.0
            self.base_t = 0.0
        self.base_reward = sum(a.reward for a in scenario.actions if a.id in done)

        zero = (0.0,) * len(kinds)
        self.root = TreeNode(None, self.origin, None, zero, zero, zero, 0, self.base_reward, kinds)
        if self._step(zero, zero, self.origin, self.recharge) is None:
            raise NoFeasiblePlan(f"recharge return does not fit remaining budget {self.budget}")

    # -- bookkeeping helpers -------------------------------------------------

    def _value(self, reward_sum: float, lo: tuple) -> float:
        t = self.base_t + (lo[self.t_index] if self.t_index is not None else 0.0)
        return _objective(reward_sum, t, self.b_time)

    def _step(self, lo, chain, pos, to):
        """Accumulated entry after ``to``, or None if it or the follow-up return would overrun."""
        budget = self.budget
        nlo, nhi, nchain = accumulate_values(lo, chain, self.is_hi[to], self.c_lo[pos][to], self.c_hi[pos][to])
        if not all(map(le, nhi, budget)):
            return None
        r = self.recharge
        if to != r:
            _, rhi, _ = accumulate_values(nlo, nchain, True, self.c_lo[to][r], self.c_hi[to][r])
            if not all(map(le, rhi, budget)):
                return None
        return nlo, nhi, nchain

    def _materialize(self, node: TreeNode) -> None:
        out = []
        mask = node.mask
        for j in range(len(self.actions)):
            if mask & self.bits[j] or self.dep[j] & ~mask:
                continue
            r = self._step(node.lo, node.chain, node.index, j)
            if r is not None:
                out.append((j, *r))
        node.candidates = out

    # -- the four phases -----------------------------------------------------

    def select(self, node: TreeNode) -> list[TreeNode]:
        """Descend by UCT until a node with an untried feasible action (or a leaf)."""
        path = [node]
        c = self.cfg.exploration_c
        sqrt, log = math.sqrt, math.log
        while True:
            if node.terminal:
                return path
            if node.candidates is None:
                self._materialize(node)
            if node.candidates or not node.children:
                return path
            log_n = log(node.visits)
            best, best_score = None, -math.inf
            for child in node.children.values():
                v = child.visits
                score = child.total_value / v + c * sqrt(log_n / v)
                if score > best_score:
                    best, best_score = child, score
            node = best
            path.append(node)

    def expand(self, node: TreeNode) -> TreeNode:
        cands = node.candidates
        if not cands:
            raise ValueError("node has no untried feasible action")
        k = self.rng.randrange(len(cands))
        j, lo, hi, chain = cands[k]
        cands[k] = cands[-1]
        cands.pop()
        if not all(map(le, hi, self.budget)):
            raise AssertionError("infeasible child reached the tree")
        action = self.actions[j]
        child = TreeNode(action, j, node, lo, hi, chain, node.mask | self.bits[j], node.reward_sum + action.reward, self.kinds)
        if child.terminal:
            child.solved = True
            child.exact_value = self._value(child.reward_sum, lo)
        else:
            node.unsolved += 1
        node.children[action.id] = child
        return child

    def rollout(self, node: TreeNode, horizon: int | None = None, rng: random.Random | None = None) -> float:
        if node.terminal:
            return self._value(node.reward_sum, node.lo)
        horizon = self.cfg.horizon if horizon is None else horizon
        randrange = (rng or self.rng).randrange
        step = self._step
        bits, dep, reward = self.bits, self.dep, self.reward
        lo, chain, pos, mask, rsum = node.lo, node.chain, node.index, node.mask, node.reward_sum
        free = [j for j in self.objective_idx if not mask & bits[j]]
        for _ in range(horizon):
            cands = [j for j in free if not dep[j] & ~mask]
            picked = None
            while cands:
                k = randrange(len(cands))
                j = cands[k]
                r = step(lo, chain, pos, j)
                if r is not None:
                    picked = j
                    break
                cands[k] = cands[-1]
                cands.pop()
            if picked is None:
                break
            lo, _, chain = r
            pos = picked
            mask |= bits[picked]
            rsum += reward[picked]
            free.remove(picked)
        rc = self.recharge
        lo, _, _ = accumulate_values(lo, chain, True, self.c_lo[pos][rc], self.c_hi[pos][rc])
        return self._value(rsum + reward[rc], lo)

    def _update_solved(self, path: list[TreeNode]) -> None:
        for node in reversed(path):
            if node.solved:
                continue
            if node.candidates is None or node.candidates or node.unsolved or not node.children:
                return
            node.solved = True
            node.exact_value = max(ch.exact_value for ch in node.children.values())
            if node.parent is not None:
                node.parent.unsolved -= 1

    def iterate(self) -> None:
        path = self.select(self.root)
        leaf = path[-1]
        if leaf.candidates:
            leaf = self.expand(leaf)
            path.append(leaf)
        value = self.rollout(leaf)
        backpropagate(path, value)
        self._update_solved(path)

    # -- extraction ----------------------------------------------------------

    def extract(self) -> Plan:
        """Robust-child descent; a fully enumerated subtree uses its exact best child."""
        nodes: list[TreeNode] = []
        node = self.root
        while node.children:
            kids = node.children.values()
            if node.solved:
                node = max(kids, key=lambda ch: (ch.exact_value, -ch.action.id))
            else:
                node = max(kids, key=lambda ch: (ch.visits, ch.mean, -ch.action.id))
            nodes.append(node)

        steps = [(n.action, n.lo, n.hi) for n in nodes]
        if not nodes or not nodes[-1].terminal:
            while True:
                last = nodes[-1] if nodes else self.root
                r = self._step(last.lo, last.chain, last.index, self.recharge)
                if r is not None:
                    break
                nodes.pop()  # unreachable when the return check holds; kept as a guard
            steps = [(n.action, n.lo, n.hi) for n in nodes]
            rc = self.actions[self.recharge]
            steps.append((rc, r[0], r[1]))
            value = self._value(last.reward_sum + rc.reward, r[0])
        else:
            value = self._value(nodes[-1].reward_sum, nodes[-1].lo)

        kinds = self.kinds
        plan_steps = tuple(
            PlanStep(a, BudgetEntry(CostVector.from_values(kinds, lo), CostVector.from_values(kinds, hi)))
            for a, lo, hi in steps
        )
        return Plan(plan_steps, value)

    def run(self) -> SearchResult:
        for _ in range(self.cfg.computation_budget):
            self.iterate()
        return SearchResult(self.extract(), self.root, self.cfg.computation_budget)


def search(
    s: Scenario, from_state: ExecutionState | None, cfg: SearchConfig, rng: random.Random
) -> SearchResult:
    return TreeSearch(s, from_state, cfg, rng).run()


def plan(s: Scenario, from_state: ExecutionState | None, cfg: SearchConfig, rng: random.Random) -> Plan:
    """Best plan found after ``cfg.computation_budget`` iterations; ends with the return.

    Raises :class:`NoFeasiblePlan` if the return alone does not fit.
    """
    return search(s, from_state, cfg, rng).plan
