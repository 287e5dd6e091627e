import functools
import hashlib
import logging
import os
import re
import tempfile
import time
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


class ConfigurationError(ValueError):
    """Invalid configuration: unknown ids, bad parameters, mismatched sizes."""


class ContractViolation(ValueError):
    """An operation was called outside its preconditions."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BudgetExhausted(ContractViolation):
    """An evaluation was requested past the budget plus its allowance."""


class EvaluationError(ArithmeticError):
    """The objective returned a non-finite value."""

    def __init__(self, message: str, position: np.ndarray):
        super().__init__(message)
        self.position = np.array(position, copy=True)


class CellNotFound(LookupError):
    """No persisted results for a (variant, function, dimension) cell."""


def timer(func):
    """Log the runtime of the decorated function"""

    @functools.wraps(func)
    def wrapper_timer(*args, **kwargs):
        start_time = time.perf_counter()
        value = func(*args, **kwargs)
        run_time = time.perf_counter() - start_time
        logger.debug(f"Finished {func.__name__!r} in {run_time:.4f} secs")
        return value

    return wrapper_timer


def derive_seed(base_seed: int, *parts: object) -> int:
    """Stable 64-bit seed from a base seed and any identifying parts.

    Independent of ``PYTHONHASHSEED`` and of the order cells are run in.
    """
    key = "|".join([str(int(base_seed))] + [str(p) for p in parts])
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def normalize_seed(seed: int) -> int:
    return int(seed) & SEED_MASK


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write ``text`` to ``path`` via a temp file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(
        prefix=f".{path.name}.", suffix=".tmp", dir=str(path.parent)
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


cell_dir_pattern = re.compile(r"(?P<function>[A-Za-z0-9_]+)_D(?P<dim>[0-9]+)")


def parse_cell_dir(name: str) -> Optional[Dict[str, str]]:
    match = cell_dir_pattern.fullmatch(name)
    return match.groupdict() if match else None


def cell_dir_name(function: str, dimension: int) -> str:
    return f"{function}_D{dimension}"
