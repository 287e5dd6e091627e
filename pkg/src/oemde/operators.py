"""DE variation operators: scale factors, the mutation pool, crossover and
one-to-one selection.

Draw order matters for reproducibility.  Per individual a generation draws,
in this order: the scheme (skipped for single-scheme pools), the parents,
the scale factors (skipped for a fixed F), then the crossover draws.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Sequence

import numpy as np

from .core import Individual, RngStream
from .utils import ConfigurationError, ContractViolation

F_LOW = 0.1
F_HIGH = 1.5


class MutationScheme(str, Enum):
    RAND1 = "rand1"
    BEST1 = "best1"
    TARGET_TO_BEST1 = "target-to-best1"
    RAND2 = "rand2"
    BEST2 = "best2"

    @property
    def parent_count(self) -> int:
        return PARENT_COUNTS[self]

    @property
    def label(self) -> str:
        return "DE/" + self.value.replace("1", "/1").replace("2", "/2")


PARENT_COUNTS: Dict[MutationScheme, int] = {
    MutationScheme.RAND1: 3,
    MutationScheme.BEST1: 2,
    MutationScheme.TARGET_TO_BEST1: 2,
    MutationScheme.RAND2: 5,
    MutationScheme.BEST2: 4,
}

FULL_POOL = tuple(MutationScheme)


class ScaleFactorMode:
    """How the mutation scale factors F_{i,d} of one mutant are drawn."""

    def sample(self, d: int, rng: RngStream) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> Dict[str, object]:
        raise NotImplementedError


@dataclass(frozen=True)
class FixedScaleFactor(ScaleFactorMode):
    f: float = 0.5

    def __post_init__(self):
        if not self.f > 0:
            raise ConfigurationError(f"scale factor must be > 0: {self.f}")

    def sample(self, d: int, rng: RngStream) -> np.ndarray:
        return np.full(d, self.f)

    def describe(self) -> Dict[str, object]:
        return {"mode": "fixed", "f": self.f}


@dataclass(frozen=True)
class VectorizedScaleFactor(ScaleFactorMode):
    def sample(self, d: int, rng: RngStream) -> np.ndarray:
        return sample_scale_factors(d, rng)

    def describe(self) -> Dict[str, object]:
        return {"mode": "vectorized", "low": F_LOW, "high": F_HIGH}


def sample_scale_factors(d: int, rng: RngStream) -> np.ndarray:
    """One independent F per dimension, uniform on [0.1, 1.5)."""
    if d < 1:
        raise ContractViolation(f"dimension must be >= 1: {d}")
    return rng.uniform(F_LOW, F_HIGH, d)


def pick_scheme(
    pool: Sequence[MutationScheme], rng: RngStream
) -> MutationScheme:
    if not pool:
        raise ConfigurationError("mutation scheme pool is empty")
    if len(pool) == 1:
        return pool[0]
    return pool[rng.integers(len(pool))]


def select_parents(np_: int, target: int, j: int, rng: RngStream) -> List[int]:
    if np_ < j + 1:
        raise ConfigurationError(
            f"population of {np_} too small for a scheme with {j} parents"
        )
    return rng.distinct(j, np_, target)


def _rand1(x, best, p, f):
    return p[0] + f * (p[1] - p[2])


def _best1(x, best, p, f):
    return best + f * (p[0] - p[1])


def _target_to_best1(x, best, p, f):
    return x + f * (best - x) + f * (p[0] - p[1])


def _rand2(x, best, p, f):
    return p[0] + f * (p[1] - p[2]) + f * (p[3] - p[4])


def _best2(x, best, p, f):
    return best + f * (p[0] - p[1]) + f * (p[2] - p[3])


_FORMULAS: Dict[MutationScheme, Callable[..., np.ndarray]] = {
    MutationScheme.RAND1: _rand1,
    MutationScheme.BEST1: _best1,
    MutationScheme.TARGET_TO_BEST1: _target_to_best1,
    MutationScheme.RAND2: _rand2,
    MutationScheme.BEST2: _best2,
}


def apply_mutation_scheme(
    scheme: MutationScheme,
    target: Individual,
    best: Individual,
    parents: Sequence[Individual],
    f: np.ndarray,
) -> np.ndarray:
    """Mutant V_i of ``scheme`` with the per-dimension factors ``f``.

    The same F_{i,d} multiplies every difference term.  Bound handling is
    left to the caller.
    """
    if len(parents) != scheme.parent_count:
        raise ContractViolation(
            f"{scheme.label} takes {scheme.parent_count} parents, "
            f"got {len(parents)}"
        )
    d = target.dimension
    positions = [p.position for p in parents]
    if best.dimension != d or any(p.size != d for p in positions):
        raise ContractViolation("mutation inputs differ in dimension")
    return _FORMULAS[scheme](target.position, best.position, positions, f)


def crossover(
    parent: np.ndarray, mutant: np.ndarray, cr: float, rng: RngStream
) -> np.ndarray:
    """Binomial crossover.

    Draws the forced dimension first, then one uniform per dimension; a
    dimension takes the mutant value when its draw is <= ``cr``.
    """
    if not 0.0 <= cr <= 1.0:
        raise ContractViolation(f"crossover rate must be in [0, 1]: {cr}")
    if parent.shape != mutant.shape:
        raise ContractViolation("parent and mutant differ in dimension")
    d = parent.size
    d_rand = rng.integers(d)
    take = rng.random(d) <= cr
    take[d_rand] = True
    return np.where(take, mutant, parent)


def greedy_select(parent: Individual, trial: Individual) -> Individual:
    """Minimization; ties go to the trial."""
    if not (parent.evaluated and trial.evaluated):
        raise ContractViolation("greedy selection on unevaluated fitness")
    return trial if trial.fitness <= parent.fitness else parent
