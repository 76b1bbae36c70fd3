"""Workload-aware dual-rail (core/BRAM) voltage and frequency scaling for multi-FPGA platforms."""

from .characterization import (
    CharacterizationError,
    CurveKind,
    CurveTable,
    ResourceClass,
    ResourceCurves,
    default_curves,
    factor,
    load_curves,
)
from .model import (
    AppProfile,
    CoreWeights,
    VoltagePair,
    bundled_profiles,
    circuit_power,
    critical_path_delay,
    load_profile,
    reference_profile,
    timing_feasible,
    workload_factor,
)
from .optimizer import (
    OperatingPoint,
    Scheme,
    VoltageGrid,
    frequency_only_power,
    optimize_bram_only,
    optimize_core_only,
    optimize_joint,
    power_gating_power,
)
from .pll import PllConfig, break_even_tau, step_overhead_energy
from .predictor import MarkovPredictor
from .simulator import SimConfig, SimReport, compare_schemes, run
from .workload import GenParams, WorkloadTrace, discretize, generate, load_trace

__version__ = "0.1.0"
