"""Canonical benchmark functions grouped into the five black-box classes.

Every base function has its global minimum 0 at the origin.  Problems
shift it to a seeded point inside the central 80% of [-5, 5]^D, so the
value to reach is always 0.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List

import numpy as np

from .core import Problem, RngStream, SearchBounds
from .utils import ConfigurationError, derive_seed

LOWER = -5.0
UPPER = 5.0
SHIFT_MARGIN = 0.1


class FunctionClass(str, Enum):
    SEPARABLE = "Separable"
    LOW_MODERATE_CONDITIONING = "LowModerateConditioning"
    HIGH_CONDITIONING_UNIMODAL = "HighConditioningUnimodal"
    MULTIMODAL_ADEQUATE_STRUCTURE = "MultimodalAdequateStructure"
    MULTIMODAL_WEAK_STRUCTURE = "MultimodalWeakStructure"


def _exponents(d: int) -> np.ndarray:
    """(i - 1) / (D - 1) for i = 1..D, all zero when D == 1."""
    if d == 1:
        return np.zeros(1)
    return np.arange(d) / (d - 1)


def sphere(x: np.ndarray) -> float:
    return float(np.dot(x, x))


def rastrigin(x: np.ndarray) -> float:
    return float(np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x) + 10.0))


def rastrigin_conditioned(x: np.ndarray) -> float:
    """Rastrigin on axis-scaled coordinates, conditioning 10."""
    return rastrigin(10.0 ** (0.5 * _exponents(x.size)) * x)


def rosenbrock(x: np.ndarray) -> float:
    # moved so the minimum sits at the origin instead of at (1, ..., 1)
    z = x + 1.0
    return float(
        np.sum(100.0 * (z[:-1] ** 2 - z[1:]) ** 2 + (z[:-1] - 1.0) ** 2)
    )


def ellipsoid(x: np.ndarray) -> float:
    return float(np.sum(10.0 ** (6.0 * _exponents(x.size)) * x * x))


def discus(x: np.ndarray) -> float:
    return float(1e6 * x[0] ** 2 + np.sum(x[1:] ** 2))


def bent_cigar(x: np.ndarray) -> float:
    return float(x[0] ** 2 + 1e6 * np.sum(x[1:] ** 2))


def different_powers(x: np.ndarray) -> float:
    return float(np.sum(np.abs(x) ** (2.0 + 4.0 * _exponents(x.size))))


def griewank(x: np.ndarray) -> float:
    i = np.arange(1, x.size + 1)
    return float(
        1.0 + np.sum(x * x) / 4000.0 - np.prod(np.cos(x / np.sqrt(i)))
    )


def schaffers_f7(x: np.ndarray) -> float:
    s = np.sqrt(x[:-1] ** 2 + x[1:] ** 2)
    terms = np.sqrt(s) * (1.0 + np.sin(50.0 * s ** 0.2) ** 2)
    return float(np.mean(terms) ** 2)


def ackley(x: np.ndarray) -> float:
    # written as two non-negative parts so the optimum is exactly 0
    r = np.sqrt(np.mean(x * x))
    c = np.mean(np.cos(2.0 * np.pi * x))
    return float(20.0 * (1.0 - np.exp(-0.2 * r)) + (np.exp(1.0) - np.exp(c)))


def schwefel_1_2(x: np.ndarray) -> float:
    return float(np.sum(np.cumsum(x) ** 2))


def katsuura(x: np.ndarray) -> float:
    d = x.size
    powers = 2.0 ** np.arange(1, 33)
    scaled = np.outer(x, powers)
    inner = np.sum(np.abs(scaled - np.round(scaled)) / powers, axis=1)
    factors = (1.0 + np.arange(1, d + 1) * inner) ** (10.0 / d ** 1.2)
    return float(10.0 / d ** 2 * (np.prod(factors) - 1.0))


@dataclass(frozen=True)
class BenchmarkFunction:
    function_id: str
    function_class: FunctionClass
    base: Callable[[np.ndarray], float]
    min_dimension: int = 1


REGISTRY: Dict[str, BenchmarkFunction] = {
    f.function_id: f
    for f in [
        BenchmarkFunction("sphere", FunctionClass.SEPARABLE, sphere),
        BenchmarkFunction("rastrigin", FunctionClass.SEPARABLE, rastrigin),
        BenchmarkFunction(
            "rosenbrock",
            FunctionClass.LOW_MODERATE_CONDITIONING,
            rosenbrock,
            min_dimension=2,
        ),
        BenchmarkFunction(
            "ellipsoid", FunctionClass.HIGH_CONDITIONING_UNIMODAL, ellipsoid
        ),
        BenchmarkFunction(
            "discus", FunctionClass.HIGH_CONDITIONING_UNIMODAL, discus
        ),
        BenchmarkFunction(
            "bent_cigar", FunctionClass.HIGH_CONDITIONING_UNIMODAL, bent_cigar
        ),
        BenchmarkFunction(
            "different_powers",
            FunctionClass.HIGH_CONDITIONING_UNIMODAL,
            different_powers,
        ),
        BenchmarkFunction(
            "rastrigin_conditioned",
            FunctionClass.MULTIMODAL_ADEQUATE_STRUCTURE,
            rastrigin_conditioned,
        ),
        BenchmarkFunction(
            "griewank", FunctionClass.MULTIMODAL_ADEQUATE_STRUCTURE, griewank
        ),
        BenchmarkFunction(
            "schaffers_f7",
            FunctionClass.MULTIMODAL_ADEQUATE_STRUCTURE,
            schaffers_f7,
            min_dimension=2,
        ),
        BenchmarkFunction(
            "ackley", FunctionClass.MULTIMODAL_WEAK_STRUCTURE, ackley
        ),
        BenchmarkFunction(
            "schwefel_1_2",
            FunctionClass.MULTIMODAL_WEAK_STRUCTURE,
            schwefel_1_2,
        ),
        BenchmarkFunction(
            "katsuura", FunctionClass.MULTIMODAL_WEAK_STRUCTURE, katsuura
        ),
    ]
}


def function_ids() -> List[str]:
    return list(REGISTRY)


def get_function(function_id: str) -> BenchmarkFunction:
    try:
        return REGISTRY[function_id]
    except KeyError:
        raise ConfigurationError(
            f"unknown function {function_id!r}; "
            f"known: {', '.join(function_ids())}"
        ) from None


@dataclass(frozen=True)
class BenchmarkSpec:
    function_id: str
    dimension: int
    shift_seed: int = 0

    @property
    def function_class(self) -> FunctionClass:
        return get_function(self.function_id).function_class

    def validate(self) -> BenchmarkFunction:
        func = get_function(self.function_id)
        if self.dimension < func.min_dimension:
            raise ConfigurationError(
                f"{self.function_id} needs D >= {func.min_dimension}, "
                f"got {self.dimension}"
            )
        return func


def make_shift(spec: BenchmarkSpec) -> np.ndarray:
    """Seeded shift, uniform in the central 80% of the box."""
    rng = RngStream(
        derive_seed(spec.shift_seed, spec.function_id, spec.dimension)
    )
    width = UPPER - LOWER
    low = LOWER + SHIFT_MARGIN * width
    high = UPPER - SHIFT_MARGIN * width
    return rng.uniform(low, high, spec.dimension)


class ShiftedObjective:
    """``base(x - shift)``; a plain class so problems pickle across workers."""

    def __init__(self, base: Callable[[np.ndarray], float], shift):
        self.base = base
        self.shift = np.asarray(shift, dtype=float)

    def __call__(self, x: np.ndarray) -> float:
        return self.base(np.asarray(x, dtype=float) - self.shift)


def make_problem(spec: BenchmarkSpec) -> Problem:
    func = spec.validate()
    return Problem(
        name=f"{spec.function_id}-D{spec.dimension}",
        dimension=spec.dimension,
        bounds=SearchBounds.box(LOWER, UPPER, spec.dimension),
        objective=ShiftedObjective(func.base, make_shift(spec)),
        vtr=0.0,
    )
