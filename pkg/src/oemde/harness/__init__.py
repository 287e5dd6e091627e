from .control import OEMDEControl
from .curves import emit_convergence_csv
from .runner import ExperimentConfig, run_experiment


__all__ = [
    "ExperimentConfig",
    "OEMDEControl",
    "emit_convergence_csv",
    "run_experiment",
]
