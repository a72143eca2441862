"""First-order systematic-error analysis for weakly measured quantum probes.

A weak system-probe coupling g is estimated from probe readout statistics.
When the probe decoheres between interaction and readout, the maximum-
likelihood estimate acquires a systematic bias; this package computes that
bias to first order — generically from any parametric outcome model, from
closed forms for weak-measurement setups with and without postselection, and
exactly for a qubit probe dephased by a thermal bosonic mode.  Postselecting
near-orthogonally (large weak values) suppresses the bias by the inverse
weak value, at the price of a small success probability.

Layers: `linalg` (operators, states, partial traces), `weakmeas` (weak
measurement states and distributions), `estimation` (Fisher information,
first-order bias, maximum-likelihood oracle), `dephasing` (the concrete
thermal-dephasing model and sweeps), `sweepio` (CSV), `validation`
(numerical self-checks), `cli` (command line).
"""

from .errors import (
    DegeneratePostselectionError,
    DegenerateProbeError,
    InvalidParameterError,
    InvalidStateError,
    NumericalFailureError,
    PerturbativeRegimeWarning,
    SearchIntervalError,
    SupportMismatchError,
    UninformativeBasisError,
    UninformativeModelError,
    ValidationError,
    WeakBiasError,
)
from .linalg import (
    IDENTITY_2,
    KET_0,
    KET_1,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityOperator,
    HermitianOperator,
    PureState,
    as_matrix,
    as_vector,
    eig_hermitian,
    expm_i_hermitian,
    ket_minus,
    ket_plus,
    kron,
    partial_trace,
    projector,
    pure_to_density,
    spectral_norm,
    trace_distance,
)
from .estimation import (
    BiasReport,
    OutcomeDistribution,
    ParametricModel,
    default_search_interval,
    d_relative_entropy_dg,
    fisher_information,
    mle_oracle,
    relative_entropy,
    systematic_error_first_order,
    systematic_error_postselected,
    systematic_error_standard,
)
from .weakmeas import (
    ProbeWeakValues,
    WeakMeasurementSetup,
    apply_probe_decoherence_exact,
    apply_probe_decoherence_first_order,
    first_order_model_postselected,
    first_order_model_standard,
    measurement_distribution,
    pointer_shift_exact,
    pointer_shift_first_order,
    probe_state_postselected_exact,
    probe_state_postselected_first_order,
    probe_state_standard_exact,
    probe_state_standard_first_order,
    probe_weak_values,
    system_expectation,
    system_weak_value,
    weak_value,
)
from .dephasing import (
    SWEEP_AXES,
    DephasingParams,
    SweepRecord,
    ThermalWeights,
    auto_n_max,
    bias_point,
    distributions_postselected,
    distributions_standard,
    evolve_joint_exact,
    joint_state_exact,
    mean_occupation,
    postselected_setup,
    postselection_state,
    probe_measurement_basis,
    standard_setup,
    sweep,
    sweep_grid,
    thermal_weights,
)
from .sweepio import csv_to_records, read_csv, records_to_csv, write_csv
from .validation import CheckResult, ValidationThresholds, run_all

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "WeakBiasError",
    "ValidationError",
    "InvalidParameterError",
    "InvalidStateError",
    "SupportMismatchError",
    "UninformativeModelError",
    "UninformativeBasisError",
    "DegeneratePostselectionError",
    "DegenerateProbeError",
    "SearchIntervalError",
    "NumericalFailureError",
    "PerturbativeRegimeWarning",
    # linear algebra
    "HermitianOperator",
    "PureState",
    "DensityOperator",
    "as_matrix",
    "as_vector",
    "kron",
    "eig_hermitian",
    "expm_i_hermitian",
    "partial_trace",
    "trace_distance",
    "projector",
    "pure_to_density",
    "spectral_norm",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "IDENTITY_2",
    "KET_0",
    "KET_1",
    "ket_plus",
    "ket_minus",
    # estimation
    "OutcomeDistribution",
    "ParametricModel",
    "BiasReport",
    "fisher_information",
    "relative_entropy",
    "d_relative_entropy_dg",
    "systematic_error_first_order",
    "systematic_error_standard",
    "systematic_error_postselected",
    "mle_oracle",
    "default_search_interval",
    # weak measurement
    "WeakMeasurementSetup",
    "ProbeWeakValues",
    "weak_value",
    "system_weak_value",
    "system_expectation",
    "probe_weak_values",
    "probe_state_standard_first_order",
    "probe_state_postselected_first_order",
    "apply_probe_decoherence_first_order",
    "pointer_shift_first_order",
    "measurement_distribution",
    "first_order_model_standard",
    "first_order_model_postselected",
    "probe_state_standard_exact",
    "probe_state_postselected_exact",
    "apply_probe_decoherence_exact",
    "pointer_shift_exact",
    # thermal-dephasing model
    "DephasingParams",
    "ThermalWeights",
    "SweepRecord",
    "SWEEP_AXES",
    "auto_n_max",
    "thermal_weights",
    "mean_occupation",
    "probe_measurement_basis",
    "postselection_state",
    "evolve_joint_exact",
    "joint_state_exact",
    "distributions_standard",
    "distributions_postselected",
    "standard_setup",
    "postselected_setup",
    "bias_point",
    "sweep",
    "sweep_grid",
    # CSV
    "records_to_csv",
    "csv_to_records",
    "write_csv",
    "read_csv",
    # validation
    "CheckResult",
    "ValidationThresholds",
    "run_all",
]
