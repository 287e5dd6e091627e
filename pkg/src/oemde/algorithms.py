"""The micro-DE generation loop and its named variants.

Every variant is the same engine driven by a :class:`StrategyConfig`:

====== =============== ========== ==========================
name   scale factor    pool       opposition
====== =============== ========== ==========================
DE     fixed 0.5       rand/1     never
MDE    fixed 0.5       rand/1     never
MDEVM  vectorized      rand/1     never
EMDE   vectorized      all five   never
OIEMDE vectorized      all five   initialization only
OEMDE  vectorized      all five   initialization + every generation
ODE    fixed 0.5       rand/1     initialization + jumping with rate 0.3
====== =============== ========== ==========================
"""
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .core import (
    BudgetCounter,
    ConvergenceTrace,
    Individual,
    Population,
    Problem,
    RngStream,
    evaluate,
    init_population,
)
from .operators import (
    FULL_POOL,
    FixedScaleFactor,
    MutationScheme,
    ScaleFactorMode,
    VectorizedScaleFactor,
    apply_mutation_scheme,
    crossover,
    greedy_select,
    pick_scheme,
    select_parents,
)
from .opposition import OppositionMode, merge_select_best, opposite_population
from .utils import ConfigurationError, timer

logger = logging.getLogger(__name__)

DEFAULT_NP = 6
DEFAULT_CR = 0.9
DEFAULT_EVTR = 1e-8
NFC_PER_DIM = 5000
BASELINE_F = 0.5
ODE_JUMP_RATE = 0.3


@dataclass(frozen=True)
class StrategyConfig:
    np: int = DEFAULT_NP
    cr: float = DEFAULT_CR
    scale_factor: ScaleFactorMode = field(
        default_factory=VectorizedScaleFactor
    )
    scheme_pool: Tuple[MutationScheme, ...] = FULL_POOL
    opposition: OppositionMode = field(default_factory=OppositionMode)
    nfc_max: int = NFC_PER_DIM
    evtr: float = DEFAULT_EVTR

    def __post_init__(self):
        object.__setattr__(
            self,
            "scheme_pool",
            tuple(MutationScheme(s) for s in self.scheme_pool),
        )
        if not self.scheme_pool:
            raise ConfigurationError("mutation scheme pool is empty")
        needed = max(s.parent_count for s in self.scheme_pool) + 1
        if self.np < needed:
            raise ConfigurationError(
                f"np={self.np} is too small for the pool, needs {needed}"
            )
        if not 0.0 <= self.cr <= 1.0:
            raise ConfigurationError(f"cr must be in [0, 1]: {self.cr}")
        if not self.evtr > 0:
            raise ConfigurationError(f"evtr must be > 0: {self.evtr}")
        if self.nfc_max < self.np:
            raise ConfigurationError(
                f"nfc_max={self.nfc_max} is smaller than np={self.np}"
            )

    def describe(self) -> Dict[str, object]:
        return {
            "np": self.np,
            "cr": self.cr,
            "scale_factor": self.scale_factor.describe(),
            "scheme_pool": [s.value for s in self.scheme_pool],
            "opposition": self.opposition.describe(),
            "nfc_max": self.nfc_max,
            "evtr": self.evtr,
        }


class VariantPreset(str, Enum):
    DE = "DE"
    MDE = "MDE"
    MDEVM = "MDEVM"
    EMDE = "EMDE"
    OIEMDE = "OIEMDE"
    OEMDE = "OEMDE"
    ODE = "ODE"


def _classic() -> Dict[str, object]:
    return dict(
        scale_factor=FixedScaleFactor(BASELINE_F),
        scheme_pool=(MutationScheme.RAND1,),
        opposition=OppositionMode.never(),
    )


# DE and MDE share a preset; DE is meant to be run with a larger --np
_PRESETS: Dict[VariantPreset, Callable[[], Dict[str, object]]] = {
    VariantPreset.DE: _classic,
    VariantPreset.MDE: _classic,
    VariantPreset.MDEVM: lambda: dict(
        scale_factor=VectorizedScaleFactor(),
        scheme_pool=(MutationScheme.RAND1,),
        opposition=OppositionMode.never(),
    ),
    VariantPreset.EMDE: lambda: dict(
        scale_factor=VectorizedScaleFactor(),
        scheme_pool=FULL_POOL,
        opposition=OppositionMode.never(),
    ),
    VariantPreset.OIEMDE: lambda: dict(
        scale_factor=VectorizedScaleFactor(),
        scheme_pool=FULL_POOL,
        opposition=OppositionMode.init_only(),
    ),
    VariantPreset.OEMDE: lambda: dict(
        scale_factor=VectorizedScaleFactor(),
        scheme_pool=FULL_POOL,
        opposition=OppositionMode.every_generation(),
    ),
    VariantPreset.ODE: lambda: dict(
        scale_factor=FixedScaleFactor(BASELINE_F),
        scheme_pool=(MutationScheme.RAND1,),
        opposition=OppositionMode.probabilistic(ODE_JUMP_RATE),
    ),
}


def variant_names() -> List[str]:
    return [v.value for v in VariantPreset]


def expand_preset(name: str, d: int, **overrides) -> StrategyConfig:
    """StrategyConfig of a named variant at dimension ``d``.

    ``overrides`` replace fields after expansion (``np``, ``cr``,
    ``nfc_max``, ``evtr``...) and are validated like any config.
    """
    try:
        preset = VariantPreset(name)
    except ValueError:
        raise ConfigurationError(
            f"unknown variant {name!r}; known: {', '.join(variant_names())}"
        ) from None
    if d < 1:
        raise ConfigurationError(f"dimension must be >= 1: {d}")
    config = StrategyConfig(
        np=DEFAULT_NP,
        cr=DEFAULT_CR,
        nfc_max=NFC_PER_DIM * d,
        evtr=DEFAULT_EVTR,
        **_PRESETS[preset](),
    )
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **overrides) if overrides else config


class Termination(str, Enum):
    ERROR_REACHED = "ErrorReached"
    BUDGET_EXHAUSTED = "BudgetExhausted"


@dataclass
class RunResult:
    best_position: np.ndarray
    best_fitness: float
    final_error: float
    nfc_used: int
    generations: int
    trace: ConvergenceTrace
    terminated_by: Termination
    seed: int
    scheme_counts: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "seed": self.seed,
            "best_fitness": self.best_fitness,
            "final_error": self.final_error,
            "nfc_used": self.nfc_used,
            "generations": self.generations,
            "terminated_by": self.terminated_by.value,
            "scheme_counts": dict(self.scheme_counts),
            "best_position": [float(x) for x in self.best_position],
        }


class Optimizer:
    """One seeded run of the engine, advanced a generation at a time.

    The population is updated synchronously: every mutant of a generation
    is built from the population as it stood when the generation started,
    including its best member.
    """

    def __init__(self, problem: Problem, config: StrategyConfig, seed: int):
        self.problem = problem
        self.config = config
        self.rng = RngStream(seed)
        self.budget = BudgetCounter(config.nfc_max, allowance=2 * config.np)
        self.trace = ConvergenceTrace()
        self.scheme_counts: Counter = Counter()
        self.population: Optional[Population] = None
        self.best: Optional[Individual] = None

    @property
    def seed(self) -> int:
        return self.rng.seed

    def error(self, fitness: float) -> float:
        return fitness - self.problem.vtr

    def _observe(self, candidate: Individual) -> None:
        if self.best is None or candidate.fitness < self.best.fitness:
            self.best = candidate
            self.trace.record(self.budget.nfc, self.error(candidate.fitness))

    def initialize(self) -> Population:
        pop = init_population(
            self.problem, self.config.np, self.rng, self.budget
        )
        if self.config.opposition.at_init:
            opp = opposite_population(
                pop, self.problem.bounds, self.problem, self.budget
            )
            pop = merge_select_best(pop, opp)
        self.population = pop
        self.best = pop.best()
        self.trace.record(self.budget.nfc, self.error(self.best.fitness))
        return pop

    def _mutant(self, pop: Population, i: int, best: Individual):
        config = self.config
        scheme = pick_scheme(config.scheme_pool, self.rng)
        self.scheme_counts[scheme.value] += 1
        parents = select_parents(
            len(pop), i, scheme.parent_count, self.rng
        )
        f = config.scale_factor.sample(self.problem.dimension, self.rng)
        v = apply_mutation_scheme(
            scheme, pop[i], best, [pop[j] for j in parents], f
        )
        return self.problem.bounds.clip(v)

    def step(self) -> Population:
        """Evolve one generation, then jump if the opposition mode says so."""
        if self.population is None:
            raise RuntimeError("initialize() must run before step()")
        pop = self.population
        best = pop.best()
        survivors = []
        for i, target in enumerate(pop):
            v = self._mutant(pop, i, best)
            u = crossover(target.position, v, self.config.cr, self.rng)
            trial = Individual(u, evaluate(self.problem, u, self.budget))
            self._observe(trial)
            survivors.append(greedy_select(target, trial))
        pop = Population(survivors, pop.generation)

        if self.config.opposition.jumps(self.rng):
            start = self.budget.nfc
            opp = opposite_population(
                pop, self.problem.bounds, self.problem, self.budget
            )
            for k, o in enumerate(opp):
                if o.fitness < self.best.fitness:
                    self.best = o
                    self.trace.record(start + k + 1, self.error(o.fitness))
            pop = merge_select_best(pop, opp)

        pop.generation += 1
        self.population = pop
        self.trace.record(self.budget.nfc, self.error(self.best.fitness))
        return pop

    def finished(self) -> bool:
        reached = abs(self.best.fitness - self.problem.vtr) <= self.config.evtr
        return reached or self.budget.exhausted

    def result(self) -> RunResult:
        best = self.best
        reached = abs(best.fitness - self.problem.vtr) <= self.config.evtr
        return RunResult(
            best_position=best.position.copy(),
            best_fitness=best.fitness,
            final_error=self.error(best.fitness),
            nfc_used=self.budget.nfc,
            generations=self.population.generation,
            trace=self.trace,
            terminated_by=(
                Termination.ERROR_REACHED
                if reached
                else Termination.BUDGET_EXHAUSTED
            ),
            seed=self.seed,
            scheme_counts={
                s.value: self.scheme_counts.get(s.value, 0)
                for s in self.config.scheme_pool
            },
        )

    def run(self) -> RunResult:
        self.initialize()
        while not self.finished():
            self.step()
        result = self.result()
        logger.debug(
            f"{self.problem.name} seed={self.seed}: error "
            f"{result.final_error:.3e} after {result.nfc_used} NFC "
            f"({result.terminated_by.value})"
        )
        return result


@timer
def run(problem: Problem, config: StrategyConfig, seed: int) -> RunResult:
    return Optimizer(problem, config, seed).run()
