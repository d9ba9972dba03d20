import pytest

from mc2ts.model import (
    HI_REWARD,
    LO_REWARD,
    RECHARGE_REWARD,
    ActionKind,
    ActionSpec,
    CostVector,
    Criticality,
    Scenario,
    UnitCosts,
)


def degenerate_costs() -> UnitCosts:
    """HI table equal to the LO table."""
    u = UnitCosts.standard()
    return UnitCosts(u.move_lo, u.move_lo, u.retrieve_lo, u.retrieve_lo, u.recharge_lo, u.recharge_lo)


def make_scenario(points, hi_ids=(), *, duration=1000.0, energy=60.0, deps=None, unit_costs=None, grid=100.0):
    """Targets 1..n at ``points``; recharge (id 0) at the far corner."""
    deps = deps or {}
    actions = [
        ActionSpec(0, ActionKind.RECHARGE_RETURN, (grid, grid), Criticality.HI, RECHARGE_REWARD)
    ]
    for i, p in enumerate(points, start=1):
        hi = i in hi_ids
        actions.append(
            ActionSpec(
                i,
                ActionKind.RETRIEVE_DATA,
                tuple(map(float, p)),
                Criticality.HI if hi else Criticality.LO,
                HI_REWARD if hi else LO_REWARD,
                frozenset(deps.get(i, ())),
            )
        )
    return Scenario(
        grid_size=grid,
        start=(0.0, 0.0),
        recharge_site=(grid, grid),
        actions=tuple(actions),
        unit_costs=unit_costs or UnitCosts.standard(),
        budget=CostVector.of(duration=duration, energy=energy),
        rng_seed=0,
    )


@pytest.fixture
def small_scenario():
    return make_scenario([(30, 20), (60, 70), (80, 40), (20, 80)], hi_ids={2, 3})
