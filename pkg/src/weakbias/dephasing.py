"""Concrete model: qubit probe dephased by a thermal single-mode bath.

A qubit system couples to a qubit probe through ``g sigma_z (x) sigma_z``
while the probe dephases through ``eps_d sigma_y (x) b^dag b`` against a
single bosonic mode in a thermal state of inverse temperature ``beta``
(truncated at Fock level ``n_max``).  Because the joint generator is
block-diagonal in the Fock index, the exact system+probe state is a thermal
mixture of per-branch pure evolutions.

The probe is read out in the rotated basis ``|k'> = exp(-i theta sigma_x)|k>``.
The experimental arm evolves with decoherence at a fixed coupling; the ideal
model arm runs the identical pipeline with the decoherence switched off, as a
function of the coupling g.  Bias reports compare the two through the
estimation module, with and without postselection onto
``|psi_f> = cos(delta)|-> + sin(delta)|+>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .errors import (
    DegeneratePostselectionError,
    InvalidParameterError,
    UninformativeBasisError,
    ValidationError,
    WeakBiasError,
)
from .estimation import (
    OutcomeDistribution,
    ParametricModel,
    default_search_interval,
    fisher_information,
    mle_oracle,
    systematic_error_first_order,
)
from .linalg import (
    DensityOperator,
    HermitianOperator,
    PureState,
    _partial_trace_matrix,
    IDENTITY_2,
    KET_0,
    PAULI_Y,
    PAULI_Z,
    expm_i_hermitian,
    ket_minus,
    ket_plus,
    pure_to_density,
)
from .tolerances import (
    FISHER_DEGENERACY_TOL,
    OVERLAP_TOL,
    PROB_FLOOR,
    RATIO_MIN_DENOMINATOR,
    THERMAL_TAIL,
)
from .weakmeas import WeakMeasurementSetup, measurement_distribution

__all__ = [
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
]

SWEEP_AXES = ("delta", "g", "eps_d", "beta", "theta")


@dataclass(frozen=True)
class DephasingParams:
    """Model parameters; defaults reproduce the reference working point."""

    beta: float = 1.0
    theta: float = math.pi / 8.0
    delta: float = 1e-3
    g: float = 1e-5
    eps_d: float = 1e-5
    t: float = 1.0
    n_max: Union[int, str] = "auto"

    def __post_init__(self) -> None:
        if self.beta <= 0.0:
            raise InvalidParameterError(f"beta must be > 0, got {self.beta!r}")
        if self.eps_d < 0.0:
            raise InvalidParameterError(f"eps_d must be >= 0, got {self.eps_d!r}")
        if self.t <= 0.0:
            raise InvalidParameterError(f"t must be > 0, got {self.t!r}")
        if isinstance(self.n_max, str):
            if self.n_max != "auto":
                raise InvalidParameterError(f'n_max must be a positive integer or "auto", got {self.n_max!r}')
        elif not isinstance(self.n_max, (int, np.integer)) or self.n_max < 1:
            raise InvalidParameterError(f'n_max must be a positive integer or "auto", got {self.n_max!r}')

    def resolved_n_max(self) -> int:
        if self.n_max == "auto":
            return auto_n_max(self.beta)
        return int(self.n_max)


@dataclass(frozen=True, eq=False)
class ThermalWeights:
    """Truncated Boltzmann weights ``w_n = e^(-beta n) (1 - e^(-beta))``."""

    weights: np.ndarray
    n_max: int

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if np.any(w < 0.0):
            raise ValidationError("thermal weights must be nonnegative")
        total = float(w.sum())
        if not (1.0 - THERMAL_TAIL <= total <= 1.0):
            raise ValidationError(
                f"truncated thermal weights sum to {total!r}; the tail above n_max={self.n_max} "
                f"exceeds {THERMAL_TAIL} (truncation too aggressive)"
            )
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class SweepRecord:
    """One row of bias results at a single parameter point."""

    param_name: str
    param_value: float
    dg_n: float
    dg_p: float
    ratio: float
    postselect_prob: float
    fisher_n: float
    fisher_p: float
    dg_n_oracle: Optional[float] = None
    dg_p_oracle: Optional[float] = None


def auto_n_max(beta: float) -> int:
    """Smallest Fock cutoff with thermal tail mass at most 1e-12."""
    if beta <= 0.0:
        raise InvalidParameterError(f"beta must be > 0, got {beta!r}")
    return int(math.ceil(-math.log(THERMAL_TAIL) / beta))


def thermal_weights(beta: float, n_max: Union[int, str] = "auto") -> ThermalWeights:
    """Boltzmann weights of the truncated thermal mode."""
    if beta <= 0.0:
        raise InvalidParameterError(f"beta must be > 0, got {beta!r}")
    n = auto_n_max(beta) if n_max == "auto" else int(n_max)
    if n < 1:
        raise InvalidParameterError(f"n_max must be a positive integer, got {n_max!r}")
    levels = np.arange(n + 1, dtype=np.float64)
    w = np.exp(-beta * levels) * (1.0 - math.exp(-beta))
    return ThermalWeights(weights=w, n_max=n)


def mean_occupation(weights: ThermalWeights) -> float:
    """Mean Fock occupation ``sum_n n w_n`` of the truncated thermal state."""
    levels = np.arange(weights.weights.size, dtype=np.float64)
    return float(np.dot(levels, weights.weights))


def probe_measurement_basis(theta: float) -> tuple[PureState, PureState]:
    """Rotated readout basis: the columns of ``exp(-i theta sigma_x)``."""
    c = math.cos(theta)
    s = math.sin(theta)
    k0 = PureState(np.array([c, -1j * s]))
    k1 = PureState(np.array([-1j * s, c]))
    return k0, k1


def postselection_state(delta: float) -> PureState:
    """``|psi_f> = cos(delta)|-> + sin(delta)|+>`` (equals ``exp(-i delta sigma_y)|->``)."""
    if abs(math.sin(delta)) <= OVERLAP_TOL:
        raise DegeneratePostselectionError(
            f"|sin(delta)| = {abs(math.sin(delta)):.3e} <= {OVERLAP_TOL}; "
            "postselection orthogonal to the initial state"
        )
    return PureState(math.cos(delta) * ket_minus() + math.sin(delta) * ket_plus())


_H_INT = np.kron(PAULI_Z, PAULI_Z)
_H_DEPHASE = np.kron(IDENTITY_2, PAULI_Y)


def _system_vector(system_initial: Optional[PureState]) -> np.ndarray:
    return ket_plus() if system_initial is None else system_initial.amplitudes


def evolve_joint_exact(params: DephasingParams, n: int, system_initial: Optional[PureState] = None) -> PureState:
    """Exact system+probe pure state in the Fock branch ``n``.

    The branch generator is ``g sigma_z (x) sigma_z + t n eps_d I (x) sigma_y``
    (the two terms do not commute, so they are exponentiated jointly).  The
    default initial state is ``|+>|+>``; the no-postselection pipeline passes
    the system ``|0>`` explicitly.
    """
    if n < 0:
        raise InvalidParameterError(f"Fock index must be >= 0, got {n!r}")
    generator = params.g * _H_INT + params.t * n * params.eps_d * _H_DEPHASE
    u = expm_i_hermitian(generator, 1.0)
    psi0 = np.kron(_system_vector(system_initial), ket_plus())
    return PureState(u @ psi0)


def joint_state_exact(params: DephasingParams, system_initial: Optional[PureState] = None) -> DensityOperator:
    """Thermal mixture of the exact Fock-branch evolutions (4-dim state)."""
    tw = thermal_weights(params.beta, params.n_max)
    acc = np.zeros((4, 4), dtype=np.complex128)
    for n, w in enumerate(tw.weights):
        v = evolve_joint_exact(params, n, system_initial).amplitudes
        acc += w * np.outer(v, v.conj())
    return DensityOperator(acc)


def _ideal_joint_vector(g: float, system_vector: np.ndarray) -> np.ndarray:
    u = expm_i_hermitian(_H_INT, g)
    return u @ np.kron(system_vector, ket_plus())


_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _conditioned_probe_vector(joint_vec: np.ndarray, cos_d: float, sin_d: float) -> np.ndarray:
    """Probe amplitudes ``<psi_f| psi>`` for ``psi_f = cos d |-> + sin d |+>``.

    Projecting in the system's ``|+/->`` basis keeps every term at the scale
    of its coefficient: the computational-basis quadratic form would cancel
    O(1) products down to the postselection probability (~sin^2 d) and lose
    ~|log10 sin d| digits, which the small-probability normalization would
    then amplify into the outcome probabilities.
    """
    r = joint_vec.reshape(2, 2)
    minus = (r[0] - r[1]) * _INV_SQRT2
    plus = (r[0] + r[1]) * _INV_SQRT2
    return cos_d * minus + sin_d * plus


def distributions_standard(params: DephasingParams) -> tuple[ParametricModel, OutcomeDistribution]:
    """No-postselection arm: ideal model family and experimental distribution.

    The system is prepared in the ``sigma_z`` eigenstate ``|0>`` (so the probe
    actually responds to g at first order in this basis family).  The ideal
    family evolves without decoherence at coupling g and is measured in the
    rotated basis; the experimental distribution runs the same measurement on
    the decohered state at the configured coupling.  Raises when the basis
    carries no first-order information (e.g. ``theta = 0``).
    """
    basis = probe_measurement_basis(params.theta)
    sys_vec = np.asarray(KET_0, dtype=np.complex128)

    def evaluate(g: float) -> OutcomeDistribution:
        psi = _ideal_joint_vector(g, sys_vec)
        joint = np.outer(psi, psi.conj())
        probe = _partial_trace_matrix(joint, (2, 2), keep=1)
        return measurement_distribution(DensityOperator(probe), basis)

    def derivative(g: float) -> np.ndarray:
        psi = _ideal_joint_vector(g, sys_vec)
        joint = np.outer(psi, psi.conj())
        k = _H_INT @ joint - joint @ _H_INT
        dprobe = -1j * _partial_trace_matrix(k, (2, 2), keep=1)
        rows = np.stack([b.amplitudes for b in basis])
        return np.real(np.einsum("ki,ij,kj->k", rows.conj(), dprobe, rows))

    model = ParametricModel(evaluate=evaluate, derivative=derivative)

    fisher = fisher_information(model, params.g)
    if fisher <= FISHER_DEGENERACY_TOL:
        raise UninformativeBasisError(
            f"measurement basis carries no first-order information at g = {params.g!r} "
            f"(Fisher information {fisher:.3e} <= {FISHER_DEGENERACY_TOL}); "
            "theta = 0 is the canonical degenerate choice"
        )

    if params.eps_d == 0.0:
        expt = evaluate(params.g)
    else:
        joint = joint_state_exact(params, PureState(sys_vec))
        probe = _partial_trace_matrix(joint.matrix, (2, 2), keep=1)
        expt = measurement_distribution(DensityOperator(probe), basis)
    return model, expt


def distributions_postselected(
    params: DephasingParams,
) -> tuple[ParametricModel, OutcomeDistribution, float]:
    """Postselected arm: ideal model family, experimental distribution, and
    the postselection success probability of the experimental state."""
    basis = probe_measurement_basis(params.theta)
    postselection_state(params.delta)  # reject degenerate delta up front
    cos_d = math.cos(params.delta)
    sin_d = math.sin(params.delta)
    sys_vec = ket_plus()
    rows = np.stack([b.amplitudes for b in basis])

    def conditional(g: float) -> tuple[np.ndarray, float]:
        psi = _ideal_joint_vector(g, sys_vec)
        c = _conditioned_probe_vector(psi, cos_d, sin_d)
        return np.outer(c, c.conj()), float(np.real(np.vdot(c, c)))

    def evaluate(g: float) -> OutcomeDistribution:
        block, trace = conditional(g)
        if trace <= PROB_FLOOR:
            raise DegeneratePostselectionError(
                f"postselection probability {trace:.3e} <= {PROB_FLOOR} at g = {g!r}"
            )
        return measurement_distribution(DensityOperator(block / trace), basis)

    def derivative(g: float) -> np.ndarray:
        psi = _ideal_joint_vector(g, sys_vec)
        c = _conditioned_probe_vector(psi, cos_d, sin_d)
        dc = _conditioned_probe_vector(-1j * (_H_INT @ psi), cos_d, sin_d)
        u = rows.conj() @ c
        du = rows.conj() @ dc
        b = np.abs(u) ** 2
        db = 2.0 * np.real(u.conj() * du)
        total = float(b.sum())
        return (db - (b / total) * float(db.sum())) / total

    model = ParametricModel(evaluate=evaluate, derivative=derivative)

    if params.eps_d == 0.0:
        expt = evaluate(params.g)
        _, prob = conditional(params.g)
    else:
        tw = thermal_weights(params.beta, params.n_max)
        block = np.zeros((2, 2), dtype=np.complex128)
        prob = 0.0
        for n, w in enumerate(tw.weights):
            branch = evolve_joint_exact(params, n, PureState(sys_vec)).amplitudes
            c = _conditioned_probe_vector(branch, cos_d, sin_d)
            block += w * np.outer(c, c.conj())
            prob += w * float(np.real(np.vdot(c, c)))
        if prob <= PROB_FLOOR:
            raise DegeneratePostselectionError(
                f"experimental postselection probability {prob:.3e} <= {PROB_FLOOR}"
            )
        expt = measurement_distribution(DensityOperator(block / prob), basis)
    return model, expt, prob


def _effective_decoherence_operator(params: DephasingParams) -> HermitianOperator:
    nbar = mean_occupation(thermal_weights(params.beta, params.n_max))
    return HermitianOperator(nbar * PAULI_Y)


def standard_setup(params: DephasingParams) -> WeakMeasurementSetup:
    """Weak-measurement view of the no-postselection arm.

    The thermal bath enters through the effective probe decoherence operator
    ``nbar sigma_y`` with ``nbar`` the truncated mean occupation.
    """
    return WeakMeasurementSetup(
        system_initial=PureState(KET_0),
        probe_initial=pure_to_density(ket_plus()),
        system_observable=HermitianOperator(PAULI_Z),
        probe_observable=HermitianOperator(PAULI_Z),
        probe_basis=probe_measurement_basis(params.theta),
        decoherence_operator=_effective_decoherence_operator(params),
        decoherence_strength=params.eps_d,
        interaction_time=params.t,
    )


def postselected_setup(params: DephasingParams) -> WeakMeasurementSetup:
    """Weak-measurement view of the postselected arm."""
    return WeakMeasurementSetup(
        system_initial=PureState(ket_plus()),
        probe_initial=pure_to_density(ket_plus()),
        system_observable=HermitianOperator(PAULI_Z),
        probe_observable=HermitianOperator(PAULI_Z),
        probe_basis=probe_measurement_basis(params.theta),
        decoherence_operator=_effective_decoherence_operator(params),
        decoherence_strength=params.eps_d,
        interaction_time=params.t,
        postselection=postselection_state(params.delta),
    )


def bias_point(params: DephasingParams, compute_oracle: bool = False) -> SweepRecord:
    """Bias report at one parameter point, for both arms.

    With ``eps_d = 0`` the experimental and ideal distributions are the same
    evaluation, so both biases are exactly 0 and the ratio is undefined (nan).
    Model degeneracies (uninformative basis, vanishing Fisher information,
    degenerate postselection) propagate as errors; `sweep` converts them to
    nan rows.
    """
    g0 = params.g
    model_n, expt_n = distributions_standard(params)
    model_p, expt_p, prob = distributions_postselected(params)

    if params.eps_d == 0.0:
        dg_n = 0.0
        dg_p = 0.0
        fisher_n = fisher_information(model_n, g0)
        fisher_p = fisher_information(model_p, g0)
    else:
        report_n = systematic_error_first_order(expt_n, model_n, g0)
        report_p = systematic_error_first_order(expt_p, model_p, g0)
        dg_n = report_n.bias_first_order
        dg_p = report_p.bias_first_order
        fisher_n = report_n.fisher
        fisher_p = report_p.fisher

    ratio = dg_p / dg_n if abs(dg_n) > RATIO_MIN_DENOMINATOR else math.nan

    oracle_n: Optional[float] = None
    oracle_p: Optional[float] = None
    if compute_oracle:
        oracle_n = mle_oracle(expt_n, model_n, default_search_interval(g0, dg_n)) - g0
        oracle_p = mle_oracle(expt_p, model_p, default_search_interval(g0, dg_p)) - g0

    return SweepRecord(
        param_name="g",
        param_value=g0,
        dg_n=dg_n,
        dg_p=dg_p,
        ratio=ratio,
        postselect_prob=prob,
        fisher_n=fisher_n,
        fisher_p=fisher_p,
        dg_n_oracle=oracle_n,
        dg_p_oracle=oracle_p,
    )


def _nan_record(axis: str, value: float) -> SweepRecord:
    return SweepRecord(
        param_name=axis,
        param_value=value,
        dg_n=math.nan,
        dg_p=math.nan,
        ratio=math.nan,
        postselect_prob=math.nan,
        fisher_n=math.nan,
        fisher_p=math.nan,
    )


def sweep_grid(lo: float, hi: float, points: int, spacing: str) -> np.ndarray:
    """Grid of parameter values, linear or logarithmic."""
    if points < 2:
        raise InvalidParameterError(f"points must be >= 2, got {points!r}")
    if spacing == "linear":
        return np.linspace(lo, hi, points)
    if spacing == "log":
        if lo <= 0.0 or hi <= 0.0:
            raise InvalidParameterError(
                f"log spacing requires positive endpoints, got ({lo!r}, {hi!r})"
            )
        return np.geomspace(lo, hi, points)
    raise InvalidParameterError(f'spacing must be "linear" or "log", got {spacing!r}')


def sweep(
    params: DephasingParams,
    sweep_axis: str,
    sweep_range: tuple[float, float],
    points: int,
    spacing: str = "linear",
    compute_oracle: bool = False,
) -> list[SweepRecord]:
    """Evaluate `bias_point` along one parameter axis.

    Grid points fail independently: a model error at one value produces a row
    of nan fields, never aborts the sweep.  Records preserve grid order.
    """
    if sweep_axis not in SWEEP_AXES:
        raise InvalidParameterError(
            f"sweep_axis must be one of {SWEEP_AXES}, got {sweep_axis!r}"
        )
    grid = sweep_grid(float(sweep_range[0]), float(sweep_range[1]), points, spacing)
    records: list[SweepRecord] = []
    for value in grid:
        try:
            point_params = replace(params, **{sweep_axis: float(value)})
            record = bias_point(point_params, compute_oracle=compute_oracle)
            record = replace(record, param_name=sweep_axis, param_value=float(value))
        except WeakBiasError:
            record = _nan_record(sweep_axis, float(value))
        records.append(record)
    return records
