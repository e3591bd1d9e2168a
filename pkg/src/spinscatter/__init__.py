"""Spin-resolved tight-binding scattering of an electron off magnetic moments."""

from .engine import ScatteringModel, ScatterOutcome, build_effective_hamiltonian, retarded_gf, solve_scattering
from .entanglement import (
    entanglement_metrics,
    logical_angles,
    measurement_angle,
    p2_bar,
    project_transmitted,
    success_probability,
)
from .estimator import PeakRefiner, TransmissionTransformer
from .exceptions import (
    ClosedChannelError,
    ConvergenceError,
    FluxConservationError,
    IllConditionedError,
    ModelRejectedError,
    NotAxiallySymmetricError,
    SpinScatterError,
    UndefinedControlError,
)
from .lead import LeadSpec, channel_table, self_energy, surface_gf_closed, surface_gf_iterative
from .models import MolecularParams, PRESETS, get_preset, molecular_block
from .sweep import SweepConfig, emit, peak_scan, refine_peak, run_sweep

__version__ = "0.1.0"

__all__ = [
    "ClosedChannelError", "ConvergenceError", "FluxConservationError", "IllConditionedError",
    "LeadSpec", "ModelRejectedError", "MolecularParams", "NotAxiallySymmetricError", "PRESETS",
    "PeakRefiner", "ScatterOutcome", "ScatteringModel", "SpinScatterError", "SweepConfig",
    "TransmissionTransformer", "UndefinedControlError", "build_effective_hamiltonian",
    "channel_table", "emit", "entanglement_metrics", "get_preset", "logical_angles",
    "measurement_angle", "molecular_block", "p2_bar", "peak_scan", "project_transmitted",
    "refine_peak", "retarded_gf", "run_sweep", "self_energy", "solve_scattering",
    "success_probability", "surface_gf_closed", "surface_gf_iterative",
]
