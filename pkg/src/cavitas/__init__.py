"""Collective-spin cavity dynamics: exact evolution, mesoscopic envelopes,
dissipative trajectories, and measurement protocols."""

__version__ = "0.1.0"

from .dissipation import (
    BathParams,
    JumpRecord,
    McResult,
    cat_decoherence,
    decoherence_echo,
    decoherence_free,
    dissipative_envelopes,
    field_jump_process,
    master_solve,
    mc_ensemble,
    thermal_jump_ops,
)
from .errors import (
    CavitasError,
    ConfigurationError,
    DomainError,
    IntegrationError,
    TruncationError,
)
from .exact_dynamics import (
    IntegratorConfig,
    RabiSeries,
    TCParams,
    apply_echo,
    dense_hamiltonian,
    evolve,
    exact_rabi_series,
)
from .hilbert import (
    FockCutoff,
    JointState,
    basis_product_state,
    coherent_field_state,
    default_cutoff,
    product_state,
)
from .kernels import backend_name
from .mesoscopic import (
    MesoParams,
    RevivalEvent,
    envelopes,
    mesoscopic_rabi,
    overlap_factor,
    revival_schedule,
    signal_coefficients,
)
from .protocols import (
    ExperimentConfig,
    SystemConfig,
    ValidationReport,
    aligned_integrator,
    excited_initial,
    fit_harmonics,
    flight_limit,
    measure_contrast,
    predicted_contrast,
    run_echo,
    run_envelopes,
    run_experiment,
    run_spontaneous,
    run_thermalized,
    thermalization_time,
    validate,
)
from .su2 import SpinQuantum

__all__ = [
    "BathParams",
    "CavitasError",
    "ConfigurationError",
    "DomainError",
    "ExperimentConfig",
    "FockCutoff",
    "IntegrationError",
    "IntegratorConfig",
    "JointState",
    "JumpRecord",
    "McResult",
    "MesoParams",
    "RabiSeries",
    "RevivalEvent",
    "SpinQuantum",
    "SystemConfig",
    "TCParams",
    "TruncationError",
    "ValidationReport",
    "__version__",
    "aligned_integrator",
    "apply_echo",
    "backend_name",
    "basis_product_state",
    "cat_decoherence",
    "coherent_field_state",
    "decoherence_echo",
    "decoherence_free",
    "default_cutoff",
    "dense_hamiltonian",
    "dissipative_envelopes",
    "envelopes",
    "evolve",
    "exact_rabi_series",
    "excited_initial",
    "field_jump_process",
    "fit_harmonics",
    "flight_limit",
    "master_solve",
    "mc_ensemble",
    "measure_contrast",
    "mesoscopic_rabi",
    "overlap_factor",
    "predicted_contrast",
    "product_state",
    "revival_schedule",
    "run_echo",
    "run_envelopes",
    "run_experiment",
    "run_spontaneous",
    "run_thermalized",
    "signal_coefficients",
    "thermal_jump_ops",
    "thermalization_time",
    "validate",
]
