"""Noisy adiabatic simulation of low-lying lattice Schwinger levels with
regression-based and zero-noise error mitigation."""

from .circuit import (
    DensityState,
    GateCircuit,
    NoiseModel,
    apply_circuit,
    compile_slice,
    count_gates,
    fold_slice,
    measure_energy,
)
from .config import RunConfig, parse_config_file, resolve_config
from .evolve import EvolvedLine, evolve_energy_lines, rng_stream
from .grec import (
    EtaTable,
    GrecMitigator,
    TrainingSet,
    fit_etas,
    mitigate_line,
    sweep_training_lines,
    trend_check,
)
from .model import (
    PRESET_DOMAINS,
    PRESET_PARAMS,
    DomainSpec,
    ModelParams,
    RampSchedule,
    build_hamiltonian,
    get_preset,
    training_schedules,
)
from .pauli import NoiseRotation, PauliString, PauliSum
from .pipeline import run_all, simulate_lines, simulate_spectrum
from .report import gate_budget, improvement, region_error
from .spectrum import ideal_lines, locate_critical_point
from .zne import ZneExtrapolator, ZneSeries, extrapolate_point, mitigate_line_zne

__version__ = "0.1.0"

__all__ = [
    "DensityState",
    "DomainSpec",
    "EtaTable",
    "EvolvedLine",
    "GateCircuit",
    "GrecMitigator",
    "ModelParams",
    "NoiseModel",
    "NoiseRotation",
    "PRESET_DOMAINS",
    "PRESET_PARAMS",
    "PauliString",
    "PauliSum",
    "RampSchedule",
    "RunConfig",
    "TrainingSet",
    "ZneExtrapolator",
    "ZneSeries",
    "apply_circuit",
    "build_hamiltonian",
    "compile_slice",
    "count_gates",
    "evolve_energy_lines",
    "extrapolate_point",
    "fit_etas",
    "fold_slice",
    "gate_budget",
    "get_preset",
    "ideal_lines",
    "improvement",
    "locate_critical_point",
    "measure_energy",
    "mitigate_line",
    "mitigate_line_zne",
    "parse_config_file",
    "region_error",
    "resolve_config",
    "rng_stream",
    "run_all",
    "simulate_lines",
    "simulate_spectrum",
    "sweep_training_lines",
    "training_schedules",
    "trend_check",
    "__version__",
]
