"""Extra probability charge transported by a wave packet on top of a plane wave."""

from .charge import ChargeBreakdown, charge_profile, delta_charge, qc_boundary_term, sign_charge
from .core import (
    ATOMIC,
    Grid,
    PlaneWave,
    SpectralFunction,
    UnitSystem,
    WaveFunction,
    density,
    dispersion,
    spectral_density,
    to_momentum,
    to_position,
)
from .errors import AccuracyError, ChargeflowError, ConvergenceError, DomainError, RangeError
from .evolution import (
    PulseParams,
    PulseRun,
    SolverConfig,
    electric_field,
    evolve_pulse,
    extract_excitation,
    free_propagate,
    vector_potential,
)
from .gaussian import GaussianPacket, cerf, delta_qd_analytic, q1_analytic, qc_analytic

__all__ = [
    "ATOMIC", "AccuracyError", "ChargeBreakdown", "ChargeflowError", "ConvergenceError", "DomainError",
    "GaussianPacket", "Grid", "PlaneWave", "PulseParams", "PulseRun", "RangeError", "SolverConfig",
    "SpectralFunction", "UnitSystem", "WaveFunction", "cerf", "charge_profile", "delta_charge",
    "delta_qd_analytic", "density", "dispersion", "electric_field", "evolve_pulse", "extract_excitation",
    "free_propagate", "q1_analytic", "qc_analytic", "qc_boundary_term", "sign_charge", "spectral_density",
    "to_momentum", "to_position", "vector_potential",
]
