"""Opposition-based learning.

Type-I opposition reflects a point through the middle of the static search
box.  It drives both opposition-based initialization and generation
jumping.  Type-II opposition works in objective space and is provided as a
standalone utility only.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict

import numpy as np

from .core import (
    BudgetCounter,
    Population,
    Problem,
    RngStream,
    SearchBounds,
    evaluate_all,
)
from .utils import ConfigurationError, ContractViolation, DomainError


class OppositionKind(str, Enum):
    NEVER = "never"
    INIT_ONLY = "init-only"
    EVERY_GENERATION = "every-generation"
    PROBABILISTIC = "probabilistic"


@dataclass(frozen=True)
class OppositionMode:
    kind: OppositionKind = OppositionKind.NEVER
    jump_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", OppositionKind(self.kind))
        if self.kind is OppositionKind.PROBABILISTIC:
            if not 0.0 <= self.jump_rate <= 1.0:
                raise ConfigurationError(
                    f"jump rate must be in [0, 1]: {self.jump_rate}"
                )
        elif self.jump_rate:
            raise ConfigurationError(
                f"jump rate only applies to probabilistic opposition, "
                f"not {self.kind.value}"
            )

    @classmethod
    def never(cls) -> "OppositionMode":
        return cls(OppositionKind.NEVER)

    @classmethod
    def init_only(cls) -> "OppositionMode":
        return cls(OppositionKind.INIT_ONLY)

    @classmethod
    def every_generation(cls) -> "OppositionMode":
        return cls(OppositionKind.EVERY_GENERATION)

    @classmethod
    def probabilistic(cls, jump_rate: float) -> "OppositionMode":
        return cls(OppositionKind.PROBABILISTIC, jump_rate)

    @property
    def at_init(self) -> bool:
        return self.kind is not OppositionKind.NEVER

    def jumps(self, rng: RngStream) -> bool:
        """Whether to jump after this generation.

        Only the probabilistic mode consumes a draw.
        """
        if self.kind is OppositionKind.EVERY_GENERATION:
            return True
        if self.kind is OppositionKind.PROBABILISTIC:
            return bool(rng.random() < self.jump_rate)
        return False

    def describe(self) -> Dict[str, object]:
        out: Dict[str, object] = {"mode": self.kind.value}
        if self.kind is OppositionKind.PROBABILISTIC:
            out["jump_rate"] = self.jump_rate
        return out


def opposite_point(x: np.ndarray, bounds: SearchBounds) -> np.ndarray:
    if not bounds.contains(x):
        raise ContractViolation("opposite of an out-of-bounds point")
    # clip absorbs one-ulp rounding past the box
    return bounds.clip(bounds.upper + bounds.lower - x)


def opposite_population(
    p: Population,
    bounds: SearchBounds,
    problem: Problem,
    budget: BudgetCounter,
) -> Population:
    """Evaluated opposites of every member, including midpoint fixed points."""
    opposites = [opposite_point(m.position, bounds) for m in p]
    return Population(evaluate_all(problem, opposites, budget), p.generation)


def merge_select_best(p: Population, p_opp: Population) -> Population:
    """The ``len(p)`` fittest of ``p`` and ``p_opp`` together.

    Ties prefer members of ``p`` over opposites, then lower index.
    Survivors keep their union order (originals first).
    """
    if len(p) != len(p_opp):
        raise ContractViolation(
            f"population sizes differ: {len(p)} != {len(p_opp)}"
        )
    union = list(p) + list(p_opp)
    fitness = np.concatenate([p.fitness, p_opp.fitness])
    # stable sort keeps union order among equal fitness values
    chosen = np.sort(np.argsort(fitness, kind="stable")[: len(p)])
    return Population([union[i] for i in chosen], p.generation)


def type2_opposite_value(f: float, ymin: float, ymax: float) -> float:
    if not ymin <= f <= ymax:
        raise DomainError(f"{f} is outside [{ymin}, {ymax}]")
    return ymin + ymax - f
