"""Plans over abstract, position-independent costs for executive tests."""

from mc2ts.accounting import accumulate, root_context
from mc2ts.model import CostVector
from mc2ts.planner import Plan, PlanStep


def vec(x):
    return CostVector.of(duration=x, energy=x / 10)


def abstract_plan(s, steps):
    """``steps`` is ``[(action_id, c_lo, c_hi), ...]`` in duration units.

    Returns the plan and a ``leg_costs`` hook charging each action its
    fixed pair regardless of where the robot comes from.
    """
    ctx = root_context(s.resources)
    out = []
    table = {}
    for aid, lo, hi in steps:
        a = s.action(aid)
        table[aid] = (vec(lo), vec(hi))
        entry, ctx = accumulate(ctx, a.criticality, vec(lo), vec(hi))
        out.append(PlanStep(a, entry))

    def legs(pos, a):
        return table[a.id]

    return Plan(tuple(out), 0.0), legs
