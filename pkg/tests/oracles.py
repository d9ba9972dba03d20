"""Independent brute-force references used by the tests.

Nothing here calls into the planner or the accounting module; budgets are
recomputed from their definition as worst cases over mode-switch points.
"""

from __future__ import annotations

from itertools import permutations

from mc2ts.model import Mode, ResourceKind, action_cost


def switch_oracle(seq):
    """Per-step (lo, hi) tuples for ``seq = [(is_hi, c_lo, c_hi), ...]``.

    lo is the LO prefix sum.  hi is the worst consumption at the end of the
    step over every single switch point s <= k (switch during action s; LO
    actions after s are dropped) and the all-HI chain, restricted to
    scenarios in which step k is still executed.
    """
    n = len(seq)
    r = len(seq[0][1])
    prefix = [tuple(0.0 for _ in range(r))]
    for _, c_lo, _ in seq:
        prefix.append(tuple(a + b for a, b in zip(prefix[-1], c_lo)))
    out = []
    for k in range(n):
        is_hi_k = seq[k][0]
        lo = prefix[k + 1]
        hi = []
        for q in range(r):
            if not is_hi_k:
                # a switch before a LO step drops it, so only s = k counts
                hi.append(prefix[k][q] + seq[k][2][q])
                continue
            cands = []
            chain = 0.0
            for j in range(k + 1):
                if seq[j][0]:
                    chain = chain + seq[j][2][q]
            cands.append(chain)
            for s in range(k + 1):
                v = prefix[s][q] + seq[s][2][q]
                for j in range(s + 1, k + 1):
                    if seq[j][0]:
                        v = v + seq[j][2][q]
                cands.append(v)
            hi.append(max(cands))
        out.append((lo, tuple(hi)))
    return out


def _fits(hi, budget):
    return all(h <= b for h, b in zip(hi, budget))


def _legs(s, strategy_costs, src, a):
    lo = action_cost(s, src, a, Mode.LO)
    hi = action_cost(s, src, a, Mode.HI)
    lo, hi = strategy_costs(lo, hi)
    return [(a.is_hi, lo.values, hi.values)]


def sequence_entries(s, ids, pair=lambda lo, hi: (lo, hi)):
    """Oracle (lo, hi) entries of visiting ``ids`` from the start, in order."""
    seq = []
    pos = s.start
    for i in ids:
        a = s.action(i)
        seq += _legs(s, pair, pos, a)
        pos = a.location
    return switch_oracle(seq) if seq else []


def admissible(s, ids, pair=lambda lo, hi: (lo, hi)):
    """Every prefix fits, and the return fits right after every objective."""
    budget = s.budget.values
    rc = s.recharge.id
    for k in range(1, len(ids) + 1):
        prefix = list(ids[:k])
        entries = sequence_entries(s, prefix, pair)
        if not _fits(entries[-1][1], budget):
            return False
        if prefix[-1] != rc:
            closed = sequence_entries(s, prefix + [rc], pair)
            if not _fits(closed[-1][1], budget):
                return False
    return True


def value(s, ids, pair=lambda lo, hi: (lo, hi)):
    """Objective of a closed sequence (ends with the return)."""
    entries = sequence_entries(s, ids, pair)
    t_idx = s.resources.index(ResourceKind.DURATION)
    t = entries[-1][0][t_idx]
    b_time = s.budget[ResourceKind.DURATION]
    rewards = sum(s.action(i).reward for i in ids)
    return (rewards - (t / b_time) * 1e-4) / 7.5


def brute_force_optimum(s, pair=lambda lo, hi: (lo, hi)):
    """Best objective over every admissible ordering of every target subset."""
    rc = s.recharge.id
    targets = [a.id for a in s.objectives]
    best = None
    for k in range(len(targets) + 1):
        for perm in permutations(targets, k):
            ids = list(perm) + [rc]
            if admissible(s, ids, pair):
                v = value(s, ids, pair)
                if best is None or v > best[0]:
                    best = (v, tuple(ids))
    return best


def rollout_expectation(s, horizon, pair=lambda lo, hi: (lo, hi)):
    """Exact mean of the random rollout policy from the mission start."""
    rc = s.recharge.id
    targets = [a.id for a in s.objectives]

    def rec(prefix, h):
        if h > 0:
            nxt = [
                i for i in targets
                if i not in prefix
                and s.action(i).depends_on <= set(prefix)
                and admissible(s, prefix + [i], pair)
            ]
            if nxt:
                return sum(rec(prefix + [i], h - 1) for i in nxt) / len(nxt)
        return value(s, prefix + [rc], pair)

    return rec([], horizon)
