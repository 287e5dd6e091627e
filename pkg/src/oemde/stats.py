"""Rank-sum significance tests and table-style summaries of run errors."""
import itertools
import math
from collections import namedtuple
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.stats import norm, rankdata, tiecorrect

from .utils import DomainError

EXACT_MAX_TOTAL = 16
DEFAULT_ALPHA = 0.05

Tally = namedtuple("Tally", ("plus", "equal", "minus"))


class Sign(str, Enum):
    PLUS = "+"
    EQUAL = "="
    MINUS = "-"


@dataclass(frozen=True)
class ComparisonVerdict:
    """'+' when the first (reference) sample has significantly lower errors,
    '-' when the second has, '=' otherwise."""

    sign: Sign
    p_value: float


@dataclass(frozen=True)
class RunSummary:
    mean_error: float
    std_error: float
    n_runs: int
    n_success: Optional[int] = None

    @property
    def success_rate(self) -> Optional[float]:
        if self.n_success is None:
            return None
        return self.n_success / self.n_runs

    def format(self) -> str:
        return format_cell(self.mean_error, self.std_error)


def format_cell(mean: float, std: float) -> str:
    return f"{mean:.2e}±{std:.2e}"


def _exact_p(doubled_ranks: np.ndarray, n: int, observed: int) -> float:
    """Two-sided exact p over every way to give ``n`` of the ranks to the
    first sample.  Works on doubled ranks so mid-ranks stay integral."""
    total = int(doubled_ranks.sum())
    size = doubled_ranks.size
    # |2 * (W - E[W])| scaled by size to stay in integers
    observed_dev = abs(observed * size - n * total)
    extreme = 0
    count = 0
    for combo in itertools.combinations(doubled_ranks.tolist(), n):
        count += 1
        if abs(sum(combo) * size - n * total) >= observed_dev:
            extreme += 1
    return extreme / count


def _normal_p(doubled_ranks: np.ndarray, n: int, observed: int) -> float:
    """Normal approximation with tie-corrected variance and continuity."""
    size = doubled_ranks.size
    m = size - n
    variance = n * m * (size + 1) / 12.0 * tiecorrect(doubled_ranks)
    if variance <= 0:
        return 1.0
    deviation = abs(observed * size - n * int(doubled_ranks.sum()))
    # back to rank units: deviation / (2 * size)
    z = max(deviation / (2.0 * size) - 0.5, 0.0) / math.sqrt(variance)
    return float(min(1.0, 2.0 * norm.sf(z)))


def wilcoxon_rank_sum(
    a: Sequence[float], b: Sequence[float], alpha: float = DEFAULT_ALPHA
) -> ComparisonVerdict:
    """Two-sided Wilcoxon rank-sum (Mann-Whitney) test of ``a`` against ``b``.

    Exact enumeration when the pooled size is at most 16, otherwise the
    normal approximation.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise DomainError(
            f"rank-sum test needs >= 2 values per sample, "
            f"got {a.size} and {b.size}"
        )
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1): {alpha}")
    n = a.size
    doubled = np.rint(2.0 * rankdata(np.concatenate([a, b]))).astype(np.int64)
    observed = int(doubled[:n].sum())
    if doubled.size <= EXACT_MAX_TOTAL:
        p = _exact_p(doubled, n, observed)
    else:
        p = _normal_p(doubled, n, observed)

    if p > alpha:
        return ComparisonVerdict(Sign.EQUAL, p)
    # mean doubled rank of a below the pooled mean: a has the lower errors
    below = observed * doubled.size < n * int(doubled.sum())
    return ComparisonVerdict(Sign.PLUS if below else Sign.MINUS, p)


def summarize(
    errors: Iterable[float], evtr: Optional[float] = None
) -> RunSummary:
    """Mean and population standard deviation of a set of run errors."""
    values = np.asarray(list(errors), dtype=float)
    if values.size == 0:
        raise DomainError("cannot summarize an empty set of runs")
    n_success = None if evtr is None else int(np.sum(values <= evtr))
    return RunSummary(
        mean_error=float(np.mean(values)),
        std_error=float(np.std(values)),
        n_runs=int(values.size),
        n_success=n_success,
    )


def tally_verdicts(verdicts: Iterable[ComparisonVerdict]) -> Tally:
    plus = equal = minus = 0
    for v in verdicts:
        if v.sign is Sign.PLUS:
            plus += 1
        elif v.sign is Sign.MINUS:
            minus += 1
        else:
            equal += 1
    return Tally(plus, equal, minus)
