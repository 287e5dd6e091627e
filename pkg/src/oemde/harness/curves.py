"""Convergence curves: error against NFC, per trial and as medians."""
from pathlib import Path
from typing import Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..core import ConvergenceTrace
from ..utils import CellNotFound, atomic_write_text, cell_dir_name

LONG_COLUMNS = ["variant", "trial", "nfc", "best_error"]
MEDIAN_COLUMNS = ["variant", "nfc_grid_point", "median_error"]

Traces = Mapping[str, Sequence[ConvergenceTrace]]


def nfc_grid(traces: Traces, points: int = 100) -> np.ndarray:
    """Evenly spaced NFC values from the earliest to the latest record."""
    firsts = [t.records[0][0] for ts in traces.values() for t in ts if t]
    lasts = [t.records[-1][0] for ts in traces.values() for t in ts if t]
    if not firsts:
        raise CellNotFound("no trace records to grid")
    grid = np.linspace(min(firsts), max(lasts), max(points, 2))
    return np.unique(np.rint(grid).astype(np.int64))


def convergence_frames(
    traces: Traces, points: int = 100
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    empty = sorted(variant for variant, runs in traces.items() if not runs)
    if empty:
        raise CellNotFound(f"no traces for {', '.join(empty)}")
    long_rows = []
    for variant, runs in traces.items():
        for trial, trace in enumerate(runs):
            long_rows.extend(
                (variant, trial, nfc, error) for nfc, error in trace.records
            )
    grid = nfc_grid(traces, points)
    median_rows = []
    for variant, runs in traces.items():
        # step semantics: each trace holds its last value between records
        values = np.stack([t.error_at(grid) for t in runs])
        for nfc, med in zip(grid, np.median(values, axis=0)):
            median_rows.append((variant, int(nfc), float(med)))
    return (
        pd.DataFrame(long_rows, columns=LONG_COLUMNS),
        pd.DataFrame(median_rows, columns=MEDIAN_COLUMNS),
    )


def emit_convergence_csv(
    traces: Traces,
    function: str,
    dimension: int,
    output_dir: Union[str, Path],
    points: int = 100,
) -> Tuple[Path, Path]:
    """Write ``<function>_D<d>.csv`` and its ``_median`` companion."""
    if not traces or not any(traces.values()):
        raise CellNotFound(f"no traces for {function} at D={dimension}")
    long_frame, median_frame = convergence_frames(traces, points)
    stem = cell_dir_name(function, dimension)
    out = Path(output_dir)
    long_path = atomic_write_text(
        out / f"{stem}.csv",
        long_frame.to_csv(index=False, float_format="%.17g"),
    )
    median_path = atomic_write_text(
        out / f"{stem}_median.csv",
        median_frame.to_csv(index=False, float_format="%.17g"),
    )
    return long_path, median_path
