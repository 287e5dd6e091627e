try:
    from ._version import version as __version__
except ImportError:
    __version__ = "not-installed"

from .algorithms import (
    Optimizer,
    RunResult,
    StrategyConfig,
    expand_preset,
    run,
)
from .benchmarks import BenchmarkSpec, make_problem

__all__ = [
    "BenchmarkSpec",
    "Optimizer",
    "RunResult",
    "StrategyConfig",
    "expand_preset",
    "make_problem",
    "run",
]
