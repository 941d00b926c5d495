"""Trajectory-ensemble simulator of DOPO-network coherent Ising machines.

Continuous-time truncated-Wigner and doubled-phase-space (positive-P) models
of coupled degenerate optical parametric oscillators, a discrete round-trip
model of the fiber-ring machine with optical delay-line coupling, and the
estimators (EPR inseparability criteria, correlations, photon numbers, spin
statistics, success probabilities) used to study them.
"""

from ._backend import active_backend, kernels
from .continuous import (
    ANTIFERRO,
    FERRO,
    ContinuousParams,
    FullModelRates,
    PumpSchedule,
    pump_schedule_eval,
    sample_initial_state,
)
from .discrete import (
    DiscreteParams,
    ThresholdEstimate,
    estimate_threshold,
    ring_coupling,
)
from .ensemble import (
    ContinuousModel,
    DiscreteModel,
    EnsembleConfig,
    EnsembleSeries,
    resolve_workers,
    run_ensemble,
    standard_error,
)
from .integrate import IntegratorConfig, integrate_trajectory
from .observables import (
    brute_force_ground_states,
    config_probabilities,
    correlation_pp,
    correlation_xx,
    epr_ring_variances,
    epr_two_variances,
    ising_energy,
    pack_spins,
    photon_number,
    positive_p_quadratures,
    post_select,
    spin_string,
    spins,
    success_probability,
    unpack_spins,
    variance_p,
    variance_x,
    wigner_quadratures,
)
from .reservoirs import ReservoirSpec, quadrature_variances, sample_noise_field
from .streams import RngStream, WienerConvention, derive_stream, sample_complex_wiener

__version__ = "0.1.0"

__all__ = [
    "ANTIFERRO",
    "FERRO",
    "ContinuousModel",
    "ContinuousParams",
    "DiscreteModel",
    "DiscreteParams",
    "EnsembleConfig",
    "EnsembleSeries",
    "FullModelRates",
    "IntegratorConfig",
    "PumpSchedule",
    "ReservoirSpec",
    "RngStream",
    "ThresholdEstimate",
    "WienerConvention",
    "active_backend",
    "brute_force_ground_states",
    "config_probabilities",
    "correlation_pp",
    "correlation_xx",
    "derive_stream",
    "epr_ring_variances",
    "epr_two_variances",
    "estimate_threshold",
    "integrate_trajectory",
    "ising_energy",
    "kernels",
    "pack_spins",
    "photon_number",
    "positive_p_quadratures",
    "post_select",
    "pump_schedule_eval",
    "quadrature_variances",
    "resolve_workers",
    "ring_coupling",
    "run_ensemble",
    "sample_complex_wiener",
    "sample_initial_state",
    "sample_noise_field",
    "spin_string",
    "spins",
    "standard_error",
    "success_probability",
    "unpack_spins",
    "variance_p",
    "variance_x",
    "wigner_quadratures",
]
