"""Batch experiments over (variant, function, dimension, trial) cells.

Output directory layout::

    config.json                                resolved experiment config
    traces/<variant>/<function>_D<d>/trial_<t>.csv   nfc,best_error
    cells/<variant>/<function>_D<d>.json       per-run results + summary
    summary.csv, summary.json                  one row per cell
    verdicts.csv, tally.csv                    rank-sum signs vs reference
    curves/<function>_D<d>.csv, ..._median.csv  convergence plot data

Every file is written whole through a temp file and a rename.
"""
import json
import logging
import numbers
import shutil
from collections import defaultdict
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple, Union

import dask
import pandas as pd
from dask import delayed

from ..algorithms import (
    DEFAULT_EVTR,
    NFC_PER_DIM,
    VariantPreset,
    expand_preset,
    run,
    variant_names,
)
from ..benchmarks import BenchmarkSpec, get_function, make_problem
from ..core import ConvergenceTrace
from ..stats import (
    DEFAULT_ALPHA,
    ComparisonVerdict,
    Sign,
    summarize,
    tally_verdicts,
    wilcoxon_rank_sum,
)
from ..utils import (
    ConfigurationError,
    atomic_write_text,
    cell_dir_name,
    derive_seed,
    timer,
)
from .curves import emit_convergence_csv

logger = logging.getLogger(__name__)

Cell = Tuple[str, str, int]

TRACE_COLUMNS = ["nfc", "best_error"]
VERDICT_COLUMNS = ["function", "dimension", "competitor", "sign", "p_value"]
# per-run artifacts replaced wholesale by every experiment
RUN_DIRS = ("traces", "cells", "curves")
INT_FIELDS = (
    "trials",
    "base_seed",
    "shift_seed",
    "workers",
    "nfc_per_dim",
    "grid_points",
)
REAL_FIELDS = ("alpha", "evtr")


def _is_int(value) -> bool:
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


def _is_real(value) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


@dataclass
class ExperimentConfig:
    variants: List[str] = field(default_factory=lambda: ["OEMDE", "MDE"])
    functions: List[str] = field(default_factory=lambda: ["sphere"])
    dimensions: List[int] = field(default_factory=lambda: [10, 30])
    trials: int = 30
    base_seed: int = 0
    alpha: float = DEFAULT_ALPHA
    output_dir: str = "results"
    reference: str = VariantPreset.OEMDE.value
    shift_seed: int = 0
    workers: int = 1
    nfc_per_dim: int = NFC_PER_DIM
    evtr: float = DEFAULT_EVTR
    grid_points: int = 100

    def __post_init__(self):
        for name in ("variants", "functions", "dimensions"):
            value = getattr(self, name)
            if isinstance(value, (str, bytes)):
                raise ConfigurationError(f"{name} must be a list: {value!r}")
            try:
                setattr(self, name, list(value))
            except TypeError as e:
                raise ConfigurationError(f"{name} must be a list: {e}") from e
        if isinstance(self.output_dir, Path):
            self.output_dir = str(self.output_dir)
        self.validate()

    def validate(self) -> None:
        for name in INT_FIELDS:
            if not _is_int(getattr(self, name)):
                raise ConfigurationError(
                    f"{name} must be an integer: {getattr(self, name)!r}"
                )
        for name in REAL_FIELDS:
            if not _is_real(getattr(self, name)):
                raise ConfigurationError(
                    f"{name} must be a number: {getattr(self, name)!r}"
                )
        for d in self.dimensions:
            if not _is_int(d):
                raise ConfigurationError(
                    f"dimension must be an integer: {d!r}"
                )
        for name in ("variants", "functions", "reference", "output_dir"):
            values = getattr(self, name)
            if isinstance(values, str):
                values = [values]
            if not all(isinstance(v, str) for v in values):
                raise ConfigurationError(
                    f"{name} must hold strings: {values!r}"
                )
        for name in ("variants", "functions", "dimensions"):
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must not be empty")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1: {self.trials}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must be in (0, 1): {self.alpha}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1: {self.workers}")
        if self.nfc_per_dim < 1:
            raise ConfigurationError(
                f"nfc_per_dim must be >= 1: {self.nfc_per_dim}"
            )
        if self.grid_points < 2:
            raise ConfigurationError(
                f"grid_points must be >= 2: {self.grid_points}"
            )
        # expanding every cell's config surfaces unknown ids and bad sizes
        # before any run starts
        for variant in self.variants:
            for function in self.functions:
                for d in self.dimensions:
                    BenchmarkSpec(function, d, self.shift_seed).validate()
                    self.strategy(variant, d)
        if self.reference not in variant_names():
            raise ConfigurationError(
                f"unknown reference variant {self.reference!r}"
            )

    def strategy(self, variant: str, d: int):
        return expand_preset(
            variant, d, nfc_max=self.nfc_per_dim * d, evtr=self.evtr
        )

    def cells(self) -> Iterator[Cell]:
        for variant in self.variants:
            for function in self.functions:
                for d in self.dimensions:
                    yield variant, function, d

    def seed(self, variant: str, function: str, d: int, trial: int) -> int:
        return derive_seed(self.base_seed, variant, function, d, trial)

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ConfigurationError("experiment config must be a mapping")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(
                f"unknown config keys: {', '.join(unknown)}"
            )
        try:
            return cls(**data)  # type: ignore
        except TypeError as e:
            raise ConfigurationError(str(e)) from e

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"{path}: {e}") from e
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def trace_path(
    output_dir: Union[str, Path], variant: str, function: str, d: int, t: int
) -> Path:
    return (
        Path(output_dir)
        / "traces"
        / variant
        / cell_dir_name(function, d)
        / f"trial_{t:03d}.csv"
    )


def cell_path(
    output_dir: Union[str, Path], variant: str, function: str, d: int
) -> Path:
    name = f"{cell_dir_name(function, d)}.json"
    return Path(output_dir) / "cells" / variant / name


def trace_csv(trace) -> str:
    frame = pd.DataFrame(trace.records, columns=TRACE_COLUMNS)
    return frame.to_csv(index=False, float_format="%.17g")


def run_trial(
    config: ExperimentConfig, variant: str, function: str, d: int, t: int
) -> Tuple[Dict[str, object], ConvergenceTrace]:
    """One run; writes its own trace file, returns its record and trace."""
    problem = make_problem(BenchmarkSpec(function, d, config.shift_seed))
    seed = config.seed(variant, function, d, t)
    result = run(problem, config.strategy(variant, d), seed)
    atomic_write_text(
        trace_path(config.output_dir, variant, function, d, t),
        trace_csv(result.trace),
    )
    logger.debug(
        f"{variant} {function} D={d} trial {t}: "
        f"error {result.final_error:.3e}"
    )
    record = result.to_dict()
    record.update(trial=t)
    return record, result.trace


def summary_row(
    variant: str, function: str, d: int, runs: Sequence[Mapping], evtr: float
) -> Dict[str, object]:
    s = summarize([r["final_error"] for r in runs], evtr=evtr)
    return {
        "variant": variant,
        "function": function,
        "function_class": get_function(function).function_class.value,
        "dimension": d,
        "n_runs": s.n_runs,
        "mean_error": s.mean_error,
        "std_error": s.std_error,
        "n_success": s.n_success,
        "success_rate": s.success_rate,
        "cell": s.format(),
    }


def verdict_table(
    errors: Mapping[Cell, Sequence[float]], reference: str, alpha: float
) -> pd.DataFrame:
    """Sign of the reference against every other variant, per cell."""
    rows = []
    for (variant, function, d), competitor in sorted(errors.items()):
        if variant == reference:
            continue
        ref = errors.get((reference, function, d))
        if ref is None or len(ref) < 2 or len(competitor) < 2:
            continue
        v = wilcoxon_rank_sum(ref, competitor, alpha)
        rows.append(
            {
                "function": function,
                "dimension": d,
                "competitor": variant,
                "sign": v.sign.value,
                "p_value": v.p_value,
            }
        )
    return pd.DataFrame(rows, columns=VERDICT_COLUMNS)


def tally_table(verdicts: pd.DataFrame) -> pd.DataFrame:
    rows = []
    for (competitor, d), group in verdicts.groupby(
        ["competitor", "dimension"], sort=True
    ):
        plus, equal, minus = tally_verdicts(
            ComparisonVerdict(Sign(s), p)
            for s, p in zip(group["sign"], group["p_value"])
        )
        rows.append(
            {
                "competitor": competitor,
                "dimension": d,
                "plus": plus,
                "equal": equal,
                "minus": minus,
            }
        )
    return pd.DataFrame(
        rows, columns=["competitor", "dimension", "plus", "equal", "minus"]
    )


def write_tables(
    output_dir: Union[str, Path],
    rows: List[Dict[str, object]],
    verdicts: pd.DataFrame,
) -> None:
    out = Path(output_dir)
    summary = pd.DataFrame(rows)
    tally = tally_table(verdicts)
    atomic_write_text(
        out / "summary.csv", summary.to_csv(index=False, float_format="%.17g")
    )
    atomic_write_text(
        out / "verdicts.csv",
        verdicts.to_csv(index=False, float_format="%.17g"),
    )
    atomic_write_text(out / "tally.csv", tally.to_csv(index=False))
    document = {
        "cells": rows,
        "verdicts": verdicts.to_dict(orient="records"),
        "tally": tally.to_dict(orient="records"),
    }
    atomic_write_text(
        out / "summary.json", json.dumps(document, indent=2, default=_jsonable)
    )


def _jsonable(value):
    # numpy scalars coming out of pandas
    if hasattr(value, "item"):
        return value.item()
    raise TypeError(f"not JSON serializable: {value!r}")


def _compute(tasks, workers: int):
    if workers > 1:
        return dask.compute(*tasks, scheduler="processes", num_workers=workers)
    return dask.compute(*tasks, scheduler="synchronous")


@timer
def run_experiment(config: ExperimentConfig) -> Path:
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in RUN_DIRS:
        stale = out / name
        if stale.is_dir():
            logger.info(f"removing results of an earlier run in {stale}")
            shutil.rmtree(stale)
    atomic_write_text(
        out / "config.json", json.dumps(config.to_dict(), indent=2)
    )

    tasks = [
        delayed(run_trial)(config, variant, function, d, t)
        for variant, function, d in config.cells()
        for t in range(config.trials)
    ]
    logger.info(
        f"running {len(tasks)} trials on {config.workers} worker(s) "
        f"into {out}"
    )
    outcomes = _compute(tasks, config.workers)

    by_cell: Dict[Cell, List[Dict[str, object]]] = defaultdict(list)
    traces: Dict[Tuple[str, int], Dict[str, list]] = defaultdict(
        lambda: defaultdict(list)
    )
    cells = [c for c in config.cells() for _ in range(config.trials)]
    for (variant, function, d), (record, trace) in zip(cells, outcomes):
        by_cell[variant, function, d].append(record)
        traces[function, d][variant].append(trace)

    rows = []
    errors: Dict[Cell, List[float]] = {}
    for cell in config.cells():
        variant, function, d = cell
        runs = sorted(by_cell[cell], key=lambda r: r["trial"])
        row = summary_row(variant, function, d, runs, config.evtr)
        document = {
            "variant": variant,
            "function": function,
            "dimension": d,
            "strategy": config.strategy(variant, d).describe(),
            "summary": row,
            "runs": runs,
        }
        atomic_write_text(
            cell_path(out, variant, function, d),
            json.dumps(document, indent=2),
        )
        rows.append(row)
        errors[cell] = [r["final_error"] for r in runs]
        logger.info(f"{variant} {function} D={d}: {row['cell']}")

    if config.reference not in config.variants:
        logger.info(
            f"reference {config.reference} not among the variants; "
            "no verdicts"
        )
    verdicts = verdict_table(errors, config.reference, config.alpha)
    write_tables(out, rows, verdicts)
    for (function, d), cell_traces in traces.items():
        emit_convergence_csv(
            cell_traces, function, d, out / "curves", config.grid_points
        )
    return out
