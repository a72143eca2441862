"""Weak-measurement physics: weak values and first-order probe states.

A weak measurement couples a system observable A to a probe observable G
through an impulsive interaction of strength g.  This module computes the
system and probe weak values, the first-order probe states with and without
postselection, the first-order probe-dephasing term, and first-order pointer
shifts — each paired with an exact-evolution counterpart used to validate the
expansions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import (
    DegeneratePostselectionError,
    DegenerateProbeError,
    InvalidParameterError,
    InvalidStateError,
    NumericalFailureError,
    PerturbativeRegimeWarning,
    ValidationError,
)
from .estimation import OutcomeDistribution, ParametricModel
from .linalg import (
    DensityOperator,
    HermitianOperator,
    PureState,
    _partial_trace_matrix,
    as_matrix,
    as_vector,
    dagger,
    eig_hermitian,
    expm_i_hermitian,
    kron,
    projector,
    spectral_norm,
)
from .tolerances import (
    BASIS_TOL,
    IMAG_RESIDUE_TOL,
    OVERLAP_TOL,
    PERTURBATIVE_WARN,
    PROB_CLAMP_TOL,
    PROB_FLOOR,
    PROB_SUM_TOL,
    PSD_TOL,
    TRACE_TOL,
)

__all__ = [
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
]


def _basis_matrix(basis: Sequence[PureState], dim: int) -> np.ndarray:
    """Stack basis vectors as rows after checking orthonormal completeness."""
    rows = np.stack([as_vector(k) for k in basis])
    if rows.shape != (dim, dim):
        raise ValidationError(
            f"basis must contain {dim} vectors of dimension {dim}, got shape {rows.shape}"
        )
    gram = rows.conj() @ rows.T
    gram_defect = float(np.max(np.abs(gram - np.eye(dim))))
    if gram_defect > BASIS_TOL:
        raise ValidationError(f"basis not orthonormal: max|<k|j> - delta_kj| = {gram_defect:.3e}")
    completeness = rows.T @ rows.conj()
    comp_defect = float(np.max(np.abs(completeness - np.eye(dim))))
    if comp_defect > BASIS_TOL:
        raise ValidationError(f"basis not complete: max|sum_k |k><k| - I| = {comp_defect:.3e}")
    return rows


@dataclass(frozen=True, eq=False)
class WeakMeasurementSetup:
    """Immutable description of one weak-measurement configuration.

    The probe starts in ``probe_initial``, couples to the system through
    ``g * system_observable (x) probe_observable``, optionally suffers probe
    dephasing generated by ``decoherence_operator`` with dimensionless
    strength ``decoherence_strength`` over ``interaction_time``, and is read
    out in ``probe_basis``.  ``postselection``, when present, conditions the
    probe on a final projective system outcome.
    """

    system_initial: Union[PureState, DensityOperator]
    probe_initial: DensityOperator
    system_observable: HermitianOperator
    probe_observable: HermitianOperator
    probe_basis: tuple[PureState, ...]
    decoherence_operator: HermitianOperator
    decoherence_strength: float
    interaction_time: float
    postselection: Optional[PureState] = None

    def __post_init__(self) -> None:
        if self.decoherence_strength < 0.0:
            raise InvalidParameterError(
                f"decoherence_strength must be >= 0, got {self.decoherence_strength!r}"
            )
        if self.interaction_time <= 0.0:
            raise InvalidParameterError(
                f"interaction_time must be > 0, got {self.interaction_time!r}"
            )
        d_s = self.system_initial.dim
        d_p = self.probe_initial.dim
        if self.system_observable.dim != d_s:
            raise ValidationError("system_observable dimension does not match system state")
        for name in ("probe_observable", "decoherence_operator"):
            if getattr(self, name).dim != d_p:
                raise ValidationError(f"{name} dimension does not match probe state")
        _basis_matrix(self.probe_basis, d_p)
        if self.postselection is not None:
            if self.postselection.dim != d_s:
                raise ValidationError("postselection dimension does not match system state")
            self._check_postselection_overlap()

    def _check_postselection_overlap(self) -> None:
        psi_f = as_vector(self.postselection)
        if isinstance(self.system_initial, PureState):
            overlap = abs(complex(psi_f.conj() @ as_vector(self.system_initial)))
            if overlap <= OVERLAP_TOL:
                raise DegeneratePostselectionError(
                    f"|<psi_f|psi_i>| = {overlap:.3e} <= {OVERLAP_TOL}; weak value undefined"
                )
        else:
            prob = float(np.real(psi_f.conj() @ self.system_initial.matrix @ psi_f))
            if prob <= PROB_FLOOR:
                raise DegeneratePostselectionError(
                    f"<psi_f|rho_S|psi_f> = {prob:.3e} <= {PROB_FLOOR}; postselection degenerate"
                )


@dataclass(frozen=True, eq=False)
class ProbeWeakValues:
    """Per-outcome probe weak values over the retained measurement outcomes.

    ``g_w[k] = <k|G rho_D|k> / <k|rho_D|k>`` and likewise ``h_dw`` for the
    decoherence operator; ``baseline`` holds ``<k|rho_D|k>``.  Outcomes whose
    baseline is at or below 1e-15 are excluded, with their original positions
    kept in ``outcome_indices``.
    """

    g_w: np.ndarray
    h_dw: np.ndarray
    baseline: np.ndarray
    outcome_indices: np.ndarray

    def __post_init__(self) -> None:
        n = self.baseline.size
        if not (self.g_w.size == self.h_dw.size == self.outcome_indices.size == n):
            raise ValidationError("ProbeWeakValues field lengths disagree")


def _system_density_matrix(state: Union[PureState, DensityOperator]) -> np.ndarray:
    if isinstance(state, PureState):
        return projector(state)
    return state.matrix


def system_expectation(setup: WeakMeasurementSetup) -> float:
    """``<A>_i = Tr(A rho_S)`` for a pure or mixed initial system state."""
    rho_s = _system_density_matrix(setup.system_initial)
    return float(np.real(np.trace(setup.system_observable.matrix @ rho_s)))


def weak_value(a: HermitianOperator, psi_i: PureState, psi_f: PureState) -> complex:
    """``A_w = <psi_f|A|psi_i> / <psi_f|psi_i>``.

    Raises when the postselection overlap is at or below 1e-12, where the
    quotient ceases to be numerically meaningful.
    """
    vi = as_vector(psi_i)
    vf = as_vector(psi_f)
    overlap = complex(vf.conj() @ vi)
    if abs(overlap) <= OVERLAP_TOL:
        raise DegeneratePostselectionError(
            f"|<psi_f|psi_i>| = {abs(overlap):.3e} <= {OVERLAP_TOL}; weak value undefined"
        )
    return complex(vf.conj() @ as_matrix(a) @ vi) / overlap


def system_weak_value(setup: WeakMeasurementSetup) -> complex:
    """System weak value of ``setup``; mixed initial states use
    ``<psi_f|A rho_S|psi_f> / <psi_f|rho_S|psi_f>``."""
    if setup.postselection is None:
        raise DegeneratePostselectionError("setup has no postselection state")
    if isinstance(setup.system_initial, PureState):
        return weak_value(setup.system_observable, setup.system_initial, setup.postselection)
    vf = as_vector(setup.postselection)
    rho_s = setup.system_initial.matrix
    denom = complex(vf.conj() @ rho_s @ vf)
    if abs(denom) <= PROB_FLOOR:
        raise DegeneratePostselectionError(
            f"<psi_f|rho_S|psi_f> = {abs(denom):.3e} <= {PROB_FLOOR}; weak value undefined"
        )
    return complex(vf.conj() @ setup.system_observable.matrix @ rho_s @ vf) / denom


def probe_weak_values(setup: WeakMeasurementSetup) -> ProbeWeakValues:
    """Probe weak values ``G_w^(k)`` and ``H'_w^(k)`` in the measurement basis.

    Both invariants are checked on the full basis before exclusion: baselines
    resolve the trace of ``rho_D`` (sum 1 within 1e-10) and the decoherence
    weak values satisfy the trace identity
    ``sum_k Im <k|H' rho_D|k> = Im Tr(H' rho_D) = 0`` within 1e-10.
    """
    rho = setup.probe_initial.matrix
    rows = np.stack([as_vector(k) for k in setup.probe_basis])
    baseline = np.real(np.einsum("ki,ij,kj->k", rows.conj(), rho, rows))
    g_num = np.einsum("ki,ij,kj->k", rows.conj(), setup.probe_observable.matrix @ rho, rows)
    h_num = np.einsum("ki,ij,kj->k", rows.conj(), setup.decoherence_operator.matrix @ rho, rows)

    total = float(baseline.sum())
    if abs(total - 1.0) > TRACE_TOL:
        raise ValidationError(f"baseline probabilities sum to {total!r}; expected 1 within {TRACE_TOL}")
    identity_residue = abs(float(np.sum(h_num.imag)))
    if identity_residue > TRACE_TOL:
        raise NumericalFailureError(
            f"decoherence trace identity violated: |sum_k Im<k|H'rho|k>| = {identity_residue:.3e}"
        )

    retained = np.flatnonzero(baseline > PROB_FLOOR)
    if retained.size == 0:
        raise DegenerateProbeError("every outcome has baseline probability <= 1e-15")
    b = baseline[retained]
    return ProbeWeakValues(
        g_w=g_num[retained] / b,
        h_dw=h_num[retained] / b,
        baseline=b,
        outcome_indices=retained,
    )


def _warn_if_strong(scale: float, label: str) -> None:
    if scale > PERTURBATIVE_WARN:
        warnings.warn(
            f"{label} = {scale:.3e} exceeds the first-order validity scale {PERTURBATIVE_WARN}",
            PerturbativeRegimeWarning,
            stacklevel=3,
        )


def probe_state_standard_first_order(setup: WeakMeasurementSetup, g: float) -> DensityOperator:
    """Probe state to first order in g without postselection.

    ``rho_D(g) = rho_D - i g <A>_i [G, rho_D]``.  The commutator is traceless,
    so the trace stays 1; the permitted negativity is relaxed to the second
    order of the perturbation scale, which a first-order expansion may reach.
    """
    rho = setup.probe_initial.matrix
    scale = abs(g) * spectral_norm(setup.system_observable) * spectral_norm(setup.probe_observable)
    _warn_if_strong(scale, "g * ||A|| * ||G||")
    a_i = system_expectation(setup)
    c = setup.probe_observable.matrix @ rho
    out = rho - 1j * g * a_i * (c - dagger(c))
    return DensityOperator(out, psd_tol=max(PSD_TOL, 8.0 * scale * scale))


def probe_state_postselected_first_order(
    setup: WeakMeasurementSetup, g: float
) -> tuple[DensityOperator, float]:
    """Postselected probe state to first order in g and its success probability.

    The unnormalized conditional state is
    ``<psi_f|rho_S|psi_f> * (rho_D - i g Re A_w [G, rho_D] + g Im A_w {G, rho_D})``;
    the returned state is renormalized to unit trace and ``postselect_prob``
    is the trace of the unnormalized state.
    """
    if setup.postselection is None:
        raise DegeneratePostselectionError("setup has no postselection state")
    vf = as_vector(setup.postselection)
    rho_s = _system_density_matrix(setup.system_initial)
    ps = float(np.real(vf.conj() @ rho_s @ vf))
    if ps <= PROB_FLOOR:
        raise DegeneratePostselectionError(
            f"postselection probability {ps:.3e} <= {PROB_FLOOR}"
        )
    a_w = system_weak_value(setup)
    scale = abs(g) * abs(a_w) * spectral_norm(setup.probe_observable)
    _warn_if_strong(scale, "g * |A_w| * ||G||")

    rho = setup.probe_initial.matrix
    c = setup.probe_observable.matrix @ rho
    unnormalized = rho - 1j * g * a_w.real * (c - dagger(c)) + g * a_w.imag * (c + dagger(c))
    trace = float(np.real(np.trace(unnormalized)))
    prob = ps * trace
    if prob <= PROB_FLOOR:
        raise DegeneratePostselectionError(
            f"first-order postselection probability {prob:.3e} <= {PROB_FLOOR}"
        )
    state = DensityOperator(unnormalized / trace, psd_tol=max(PSD_TOL, 8.0 * scale * scale))
    return state, prob


def apply_probe_decoherence_first_order(
    state: DensityOperator, setup: WeakMeasurementSetup
) -> DensityOperator:
    """Add the first-order probe-dephasing term ``-i eps_D t [H'_D, rho]``."""
    eps_t = setup.decoherence_strength * setup.interaction_time
    scale = eps_t * spectral_norm(setup.decoherence_operator)
    _warn_if_strong(scale, "eps_D * t * ||H'_D||")
    rho = state.matrix
    c = setup.decoherence_operator.matrix @ rho
    out = rho - 1j * eps_t * (c - dagger(c))
    return DensityOperator(out, psd_tol=state.psd_tol + 8.0 * scale * scale)


def pointer_shift_first_order(
    setup: WeakMeasurementSetup, measured: HermitianOperator, g: float
) -> float:
    """First-order shift of ``<M>`` on the postselected probe.

    ``g Im A_w (<{G,M}> - 2<G><M>) + i g Re A_w <[G,M]>`` evaluated on the
    initial probe state; the commutator expectation of Hermitian operators is
    purely imaginary, so the total is real — the imaginary residue is checked
    against 1e-12 rather than silently discarded.
    """
    a_w = system_weak_value(setup)
    rho = setup.probe_initial.matrix
    g_m = setup.probe_observable.matrix
    m_m = as_matrix(measured)
    gm = g_m @ m_m
    mg = m_m @ g_m
    anti = complex(np.trace((gm + mg) @ rho))
    comm = complex(np.trace((gm - mg) @ rho))
    g_exp = complex(np.trace(g_m @ rho))
    m_exp = complex(np.trace(m_m @ rho))
    shift = g * a_w.imag * (anti - 2.0 * g_exp * m_exp) + 1j * g * a_w.real * comm
    if abs(shift.imag) > IMAG_RESIDUE_TOL:
        raise NumericalFailureError(
            f"pointer shift has imaginary residue {shift.imag:.3e} > {IMAG_RESIDUE_TOL}"
        )
    return float(shift.real)


def measurement_distribution(
    state: DensityOperator, basis: Sequence[PureState]
) -> OutcomeDistribution:
    """Outcome probabilities ``p_k = <k|rho|k>`` in an orthonormal basis.

    Small negative excursions (below 1e-10 in magnitude) from first-order
    states are clamped to zero and the distribution renormalized; anything
    larger means the state is not a usable density operator.
    """
    rows = _basis_matrix(basis, state.dim)
    p = np.real(np.einsum("ki,ij,kj->k", rows.conj(), state.matrix, rows))
    lowest = float(p.min())
    if lowest < -PROB_CLAMP_TOL:
        raise InvalidStateError(
            f"probability {lowest:.3e} is below -{PROB_CLAMP_TOL}; clamping would mask an invalid state"
        )
    p = np.clip(p, 0.0, None)
    total = float(p.sum())
    if abs(total - 1.0) >= PROB_SUM_TOL:
        raise InvalidStateError(
            f"probabilities sum to {total!r}; drift exceeds {PROB_SUM_TOL}"
        )
    return OutcomeDistribution(p / total)


def _linear_diagonal_model(
    setup: WeakMeasurementSetup,
    state_at: Callable[[float], DensityOperator],
    derivative_matrix: np.ndarray,
) -> ParametricModel:
    """Parametric family whose unnormalized outcome weights are linear in g.

    Both first-order probe states have basis diagonals ``n_k(g) = w_k + g d_k``
    with a g-independent vector ``d``; the analytic derivative of the
    normalized probabilities follows from the quotient rule.  Computing ``d``
    once keeps the derivative exact instead of finite-differenced.
    """
    rows = _basis_matrix(setup.probe_basis, setup.probe_initial.dim)
    w = np.real(np.einsum("ki,ij,kj->k", rows.conj(), setup.probe_initial.matrix, rows))
    dn = np.real(np.einsum("ki,ij,kj->k", rows.conj(), derivative_matrix, rows))
    dn_sum = float(dn.sum())

    def evaluate(g: float) -> OutcomeDistribution:
        return measurement_distribution(state_at(g), setup.probe_basis)

    def derivative(g: float) -> np.ndarray:
        n = w + g * dn
        total = float(n.sum())
        return (dn - (n / total) * dn_sum) / total

    return ParametricModel(evaluate=evaluate, derivative=derivative)


def first_order_model_standard(setup: WeakMeasurementSetup) -> ParametricModel:
    """Family ``g -> p(g)`` of first-order unpostselected outcome distributions.

    Excludes decoherence: fitting a decohered experimental distribution with
    this family is what produces the systematic bias under study.
    """
    rho = setup.probe_initial.matrix
    a_i = system_expectation(setup)
    c = setup.probe_observable.matrix @ rho
    d_matrix = -1j * a_i * (c - dagger(c))
    return _linear_diagonal_model(
        setup, lambda g: probe_state_standard_first_order(setup, g), d_matrix
    )


def first_order_model_postselected(setup: WeakMeasurementSetup) -> ParametricModel:
    """Family ``g -> p(g)`` of first-order postselected outcome distributions.

    The conditional state's normalization cancels from the probabilities, so
    the derivative uses the unnormalized diagonal directly.  Excludes
    decoherence, as in `first_order_model_standard`.
    """
    if setup.postselection is None:
        raise DegeneratePostselectionError("setup has no postselection state")
    a_w = system_weak_value(setup)
    rho = setup.probe_initial.matrix
    c = setup.probe_observable.matrix @ rho
    d_matrix = -1j * a_w.real * (c - dagger(c)) + a_w.imag * (c + dagger(c))
    return _linear_diagonal_model(
        setup, lambda g: probe_state_postselected_first_order(setup, g)[0], d_matrix
    )


# --- exact counterparts -----------------------------------------------------


def _joint_after_interaction(setup: WeakMeasurementSetup, g: float) -> np.ndarray:
    rho_s = _system_density_matrix(setup.system_initial)
    rho_d = setup.probe_initial.matrix
    h_int = kron(setup.system_observable, setup.probe_observable)
    u = expm_i_hermitian(h_int, g)
    return u @ np.kron(rho_s, rho_d) @ dagger(u)


def probe_state_standard_exact(setup: WeakMeasurementSetup, g: float) -> DensityOperator:
    """Exact probe state: evolve ``rho_S (x) rho_D`` by ``exp(-i g A (x) G)``
    and trace out the system."""
    joint = _joint_after_interaction(setup, g)
    d_s = setup.system_initial.dim
    d_p = setup.probe_initial.dim
    return DensityOperator(_partial_trace_matrix(joint, (d_s, d_p), keep=1))


def probe_state_postselected_exact(
    setup: WeakMeasurementSetup, g: float
) -> tuple[DensityOperator, float]:
    """Exact postselected probe state and postselection probability.

    The conditional block is assembled from postselected purification
    columns, ``sum_ab <psi_f|U|a,b> <a,b|U^dag|psi_f>``, so the projection
    happens at amplitude level: a quadratic form on the joint density matrix
    would cancel O(1) products down to the postselection probability and the
    renormalization would amplify that rounding noise beyond the state
    validators for near-orthogonal postselection.
    """
    if setup.postselection is None:
        raise DegeneratePostselectionError("setup has no postselection state")
    rho_s = _system_density_matrix(setup.system_initial)
    rho_d = setup.probe_initial.matrix
    d_s = rho_s.shape[0]
    d_p = rho_d.shape[0]
    vals_s, vecs_s = eig_hermitian(rho_s)
    vals_d, vecs_d = eig_hermitian(rho_d)
    root_s = vecs_s * np.sqrt(np.clip(vals_s, 0.0, None))
    root_d = vecs_d * np.sqrt(np.clip(vals_d, 0.0, None))
    u = expm_i_hermitian(kron(setup.system_observable, setup.probe_observable), g)
    columns = u @ np.kron(root_s, root_d)
    vf = as_vector(setup.postselection)
    conditioned = np.einsum("i,ijc->cj", vf.conj(), columns.reshape(d_s, d_p, d_s * d_p))
    block = conditioned.T @ conditioned.conj()
    prob = float(np.real(np.trace(block)))
    if prob <= PROB_FLOOR:
        raise DegeneratePostselectionError(f"exact postselection probability {prob:.3e} <= {PROB_FLOOR}")
    return DensityOperator(block / prob), prob


def apply_probe_decoherence_exact(
    state: DensityOperator, setup: WeakMeasurementSetup
) -> DensityOperator:
    """Exact unitary counterpart of the first-order dephasing term:
    conjugation by ``exp(-i eps_D t H'_D)``."""
    u = expm_i_hermitian(
        setup.decoherence_operator, setup.decoherence_strength * setup.interaction_time
    )
    return DensityOperator(u @ state.matrix @ dagger(u), psd_tol=state.psd_tol)


def pointer_shift_exact(
    setup: WeakMeasurementSetup, measured: HermitianOperator, g: float
) -> float:
    """Exact pointer shift ``Tr(M rho_post) - Tr(M rho_D)``."""
    post, _ = probe_state_postselected_exact(setup, g)
    m = as_matrix(measured)
    before = float(np.real(np.trace(m @ setup.probe_initial.matrix)))
    after = float(np.real(np.trace(m @ post.matrix)))
    return after - before
