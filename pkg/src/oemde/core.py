"""Domain types shared by every part of the optimizer.

A run owns exactly one :class:`RngStream` and one :class:`BudgetCounter`;
every objective call goes through :func:`evaluate` so the counter sees it.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .utils import (
    BudgetExhausted,
    ConfigurationError,
    ContractViolation,
    EvaluationError,
    normalize_seed,
)

Objective = Callable[[np.ndarray], float]


class RngStream:
    """Seeded random source; equal seeds give equal draw sequences."""

    def __init__(self, seed: int):
        self.seed = normalize_seed(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def random(self, size=None):
        """Uniform on [0, 1)."""
        return self._gen.random(size)

    def uniform(self, low: float, high: float, size=None):
        """Uniform on [low, high)."""
        return self._gen.uniform(low, high, size)

    def integers(self, n: int, size=None):
        """Uniform on {0, ..., n - 1}."""
        if n < 1:
            raise ContractViolation(f"cannot draw from an empty range: {n}")
        value = self._gen.integers(0, n, size)
        return int(value) if size is None else value

    def distinct(self, k: int, n: int, exclude: int) -> List[int]:
        """``k`` distinct indices of ``range(n)``, none equal to ``exclude``.

        The order of the returned indices is random.
        """
        candidates = [j for j in range(n) if j != exclude]
        if k > len(candidates):
            raise ConfigurationError(
                f"cannot draw {k} distinct indices from {n} "
                f"excluding {exclude}"
            )
        picks = self._gen.choice(len(candidates), size=k, replace=False)
        return [candidates[p] for p in picks]


@dataclass(frozen=True, eq=False)
class SearchBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).ravel()
        upper = np.asarray(self.upper, dtype=float).ravel()
        if lower.shape != upper.shape:
            raise ConfigurationError(
                f"bounds length mismatch: {lower.size} != {upper.size}"
            )
        if lower.size == 0:
            raise ConfigurationError("bounds must have at least 1 dimension")
        if not np.all(lower < upper):
            raise ConfigurationError("every lower bound must be < upper")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, low: float, high: float, dimension: int) -> "SearchBounds":
        return cls(np.full(dimension, low), np.full(dimension, high))

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all((x >= self.lower) & (x <= self.upper)))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True, eq=False)
class Individual:
    """A position and, once evaluated, its objective value.

    Frozen: a new position always means a new Individual, so a cached
    fitness can never go stale.
    """

    position: np.ndarray
    fitness: Optional[float] = None

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    @property
    def dimension(self) -> int:
        return self.position.size


@dataclass(eq=False)
class Population:
    members: List[Individual]
    generation: int = 0

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Individual]:
        return iter(self.members)

    def __getitem__(self, index: int) -> Individual:
        return self.members[index]

    @property
    def positions(self) -> np.ndarray:
        return np.stack([m.position for m in self.members])

    @property
    def fitness(self) -> np.ndarray:
        if not all(m.evaluated for m in self.members):
            raise ContractViolation("population has unevaluated members")
        return np.array([m.fitness for m in self.members], dtype=float)

    def best_index(self) -> int:
        # argmin returns the first minimum: ties go to the lowest index
        return int(np.argmin(self.fitness))

    def best(self) -> Individual:
        return self.members[self.best_index()]


@dataclass(frozen=True, eq=False)
class Problem:
    name: str
    dimension: int
    bounds: SearchBounds
    objective: Objective
    vtr: float = 0.0

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigurationError(f"dimension must be >= 1: {self}")
        if self.bounds.dimension != self.dimension:
            raise ConfigurationError(
                f"{self.name}: bounds have {self.bounds.dimension} "
                f"dimensions, problem has {self.dimension}"
            )


@dataclass
class BudgetCounter:
    """Objective-call accounting against ``nfc_max``.

    ``allowance`` is how far past ``nfc_max`` a generation in flight may
    go before :meth:`charge` refuses.
    """

    nfc_max: int
    nfc: int = 0
    allowance: int = 0

    @property
    def exhausted(self) -> bool:
        return self.nfc >= self.nfc_max

    @property
    def remaining(self) -> int:
        return max(self.nfc_max - self.nfc, 0)

    def charge(self) -> int:
        if self.nfc >= self.nfc_max + self.allowance:
            raise BudgetExhausted(
                f"budget of {self.nfc_max} (+{self.allowance}) evaluations "
                "already spent"
            )
        self.nfc += 1
        return self.nfc


@dataclass
class ConvergenceTrace:
    """Best-so-far error as a right-continuous step function of NFC."""

    records: List[Tuple[int, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def record(self, nfc: int, error: float) -> None:
        if self.records:
            last_nfc, last_error = self.records[-1]
            if nfc < last_nfc:
                raise ContractViolation(
                    f"trace NFC went backwards: {nfc} < {last_nfc}"
                )
            error = min(error, last_error)
            if nfc == last_nfc:
                self.records[-1] = (nfc, error)
                return
        self.records.append((int(nfc), float(error)))

    @property
    def nfc(self) -> np.ndarray:
        return np.array([r[0] for r in self.records], dtype=np.int64)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r[1] for r in self.records], dtype=float)

    def error_at(self, nfc):
        """Error held by the step function at ``nfc`` (scalar or array).

        Queries before the first record return the first recorded error.
        """
        if not self.records:
            raise LookupError("empty trace")
        idx = np.searchsorted(self.nfc, nfc, side="right") - 1
        values = self.errors[np.clip(idx, 0, None)]
        return float(values) if np.ndim(values) == 0 else values


def evaluate(problem: Problem, position: np.ndarray, budget: BudgetCounter):
    if position.shape != (problem.dimension,):
        raise ContractViolation(
            f"position shape {position.shape} does not match "
            f"dimension {problem.dimension} of {problem.name}"
        )
    budget.charge()
    value = float(problem.objective(position))
    if not math.isfinite(value):
        raise EvaluationError(
            f"{problem.name} returned {value} at NFC {budget.nfc}", position
        )
    return value


def evaluate_all(
    problem: Problem, positions: Sequence[np.ndarray], budget: BudgetCounter
) -> List[Individual]:
    return [
        Individual(np.asarray(x, dtype=float), evaluate(problem, x, budget))
        for x in positions
    ]


def init_population(
    problem: Problem, np_: int, rng: RngStream, budget: BudgetCounter
) -> Population:
    """Uniform random population of ``np_`` evaluated individuals."""
    if np_ < 1:
        raise ConfigurationError(f"population size must be >= 1: {np_}")
    bounds = problem.bounds
    if bounds.dimension != problem.dimension:
        raise ConfigurationError(
            f"{problem.name}: bounds/problem dimension mismatch"
        )
    if budget.remaining < np_:
        raise ContractViolation(
            f"{budget.remaining} evaluations left, {np_} needed to "
            "initialize"
        )
    positions = bounds.lower + rng.random(
        (np_, problem.dimension)
    ) * bounds.width
    # guard the half-open upper end against rounding up to upper
    positions = np.minimum(positions, np.nextafter(bounds.upper, -np.inf))
    return Population(evaluate_all(problem, list(positions), budget))
