"""Half-normal actual-cost model and reproducible RNG streams."""

from __future__ import annotations

import enum
import hashlib
import math
import random
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

from .model import ActionSpec, CostVector

__all__ = [
    "CostSampler",
    "EnvironmentKind",
    "EnvironmentProfile",
    "HalfNormalSampler",
    "ScriptedSampler",
    "derive_rng",
    "derive_seed",
    "sample_actual_cost",
]


class EnvironmentKind(enum.Enum):
    NORMAL = "normal"
    EXCEPTIONAL = "exceptional"


@dataclass(frozen=True)
class EnvironmentProfile:
    kind: EnvironmentKind
    sigma_divisor: float

    def __post_init__(self):
        if not self.sigma_divisor > 0:
            raise ValueError("sigma_divisor must be positive")

    @classmethod
    def normal(cls) -> EnvironmentProfile:
        return cls(EnvironmentKind.NORMAL, 10.0)

    @classmethod
    def exceptional(cls) -> EnvironmentProfile:
        return cls(EnvironmentKind.EXCEPTIONAL, 3.0)

    @classmethod
    def named(cls, name: str) -> EnvironmentProfile:
        return {"normal": cls.normal, "exceptional": cls.exceptional}[name.lower()]()

    def sigma(self, c_lo: float) -> float:
        return c_lo / self.sigma_divisor


def sample_actual_cost(c_lo: CostVector, profile: EnvironmentProfile, rng: random.Random) -> CostVector:
    """Actual cost: per resource, ``c_lo/2 + |N(0, (c_lo/divisor)^2)|``.

    Resources are drawn independently. The result is never below ``c_lo/2``
    and is not capped at C(HI).
    """
    gauss = rng.gauss
    div = profile.sigma_divisor
    return CostVector.from_values(c_lo.kinds, tuple([0.5 * c + abs(gauss(0.0, c / div)) for c in c_lo.values]))


class CostSampler(Protocol):
    def sample(self, action: ActionSpec, c_lo: CostVector, c_hi: CostVector) -> CostVector: ...


class HalfNormalSampler:
    """Owns one RNG stream; one draw per executed action and resource."""

    def __init__(self, profile: EnvironmentProfile, rng: random.Random):
        self.profile = profile
        self.rng = rng

    def sample(self, action: ActionSpec, c_lo: CostVector, c_hi: CostVector) -> CostVector:
        return sample_actual_cost(c_lo, self.profile, self.rng)


class ScriptedSampler:
    """Replays actual costs, for hand-traced executions.

    ``script`` is either a sequence consumed in execution order, or a
    callable ``(action, c_lo, c_hi) -> CostVector``.
    """

    def __init__(self, script: Sequence[CostVector] | Callable[[ActionSpec, CostVector, CostVector], CostVector]):
        self._fn = script if callable(script) else None
        self._queue = None if callable(script) else list(script)
        self.calls = 0

    def sample(self, action: ActionSpec, c_lo: CostVector, c_hi: CostVector) -> CostVector:
        self.calls += 1
        if self._fn is not None:
            return self._fn(action, c_lo, c_hi)
        if not self._queue:
            raise IndexError("scripted sampler ran out of costs")
        return self._queue.pop(0)


def derive_seed(*parts: object) -> int:
    """Stable 64-bit seed from arbitrary parts (independent of PYTHONHASHSEED)."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive_rng(*parts: object) -> random.Random:
    return random.Random(derive_seed(*parts))


def half_normal_mean(c_lo: float, divisor: float) -> float:
    return 0.5 * c_lo + (c_lo / divisor) * math.sqrt(2.0 / math.pi)
