"""Driven two-mode condensate dynamics: amplitude equations, order parameter,
variational trap modes and the map from a quadrupole field to model parameters."""

from .dopri import StepFailure
from .dynamics import (
    GROUND,
    DimensionlessParams,
    ModeAmplitudes,
    Trajectory,
    derivative,
    integrate,
    populations,
    propagate,
    rabi_reference,
)
from .experiment import (
    CriticalGradient,
    DrivenExperiment,
    ExperimentMap,
    dimensionless_params,
    eta_vs_A,
    find_critical_A,
)
from .modes import (
    AtomSpecies,
    MinimizationFailure,
    ModeIndex,
    PhysicalSetup,
    QuadratureFailure,
    TrapConfig,
    VariationalMode,
    alpha,
    beta_integral,
    minimize_variational,
    overlap,
    quad_beta,
    transition_frequency,
    variational_energy,
    wavefunction,
)
from .order import (
    AveragingConfig,
    CriticalKind,
    CriticalPoint,
    EtaEstimate,
    InvalidBracket,
    NonConvergence,
    Regime,
    classify_regime,
    detect_period,
    eta,
    find_critical_b,
    sweep_eta,
)

__version__ = "0.1.0"
