import json
from pathlib import Path
from typing import Dict, Iterator, List, Union

import pandas as pd

from ..core import ConvergenceTrace
from ..utils import CellNotFound, parse_cell_dir, timer
from .runner import TRACE_COLUMNS, Cell, cell_path, trace_path

PathLike = Union[str, Path]


def iter_cells(output_dir: PathLike) -> Iterator[Cell]:
    """Every (variant, function, dimension) with a results file."""
    root = Path(output_dir) / "cells"
    if not root.is_dir():
        return
    for variant_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for path in sorted(variant_dir.glob("*.json")):
            match = parse_cell_dir(path.stem)
            if match:
                yield variant_dir.name, match["function"], int(match["dim"])


def load_cell(
    output_dir: PathLike, variant: str, function: str, d: int
) -> Dict:
    path = cell_path(output_dir, variant, function, d)
    if not path.is_file():
        raise CellNotFound(f"no results for {variant} {function} D={d}")
    return json.loads(path.read_text(encoding="utf-8"))


@timer
def load_errors(output_dir: PathLike) -> Dict[Cell, List[float]]:
    """Final errors of every persisted cell, in trial order."""
    errors = {}
    for cell in iter_cells(output_dir):
        runs = load_cell(output_dir, *cell)["runs"]
        errors[cell] = [r["final_error"] for r in runs]
    if not errors:
        raise CellNotFound(f"no result cells under {output_dir}")
    return errors


def read_trace_csv(path: PathLike) -> ConvergenceTrace:
    frame = pd.read_csv(path)
    if list(frame.columns) != TRACE_COLUMNS:
        raise ValueError(f"{path}: expected columns {TRACE_COLUMNS}")
    return ConvergenceTrace(
        [(int(n), float(e)) for n, e in zip(frame["nfc"], frame["best_error"])]
    )


@timer
def load_traces(
    output_dir: PathLike, variant: str, function: str, d: int
) -> List[ConvergenceTrace]:
    folder = trace_path(output_dir, variant, function, d, 0).parent
    paths = sorted(folder.glob("trial_*.csv"))
    if not paths:
        raise CellNotFound(f"no traces for {variant} {function} D={d}")
    return [read_trace_csv(p) for p in paths]


def load_cell_traces(
    output_dir: PathLike, function: str, d: int
) -> Dict[str, List[ConvergenceTrace]]:
    """Traces of every variant that ran ``function`` at dimension ``d``."""
    cells = iter_cells(output_dir)
    variants = sorted({v for v, f, dim in cells if (f, dim) == (function, d)})
    if not variants:
        raise CellNotFound(f"no variant ran {function} at D={d}")
    return {v: load_traces(output_dir, v, function, d) for v in variants}
