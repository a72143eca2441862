"""Tests for the weak-measurement layer.

Expected values come from scalar closed forms worked out by hand for small
configurations (rotated qubit bases, Pauli observables) and from the exact
unitary counterparts; the first-order routes are checked for second-order
convergence against those exact routes.
"""

import cmath
import dataclasses
import math
import warnings

import numpy as np
import pytest

from weakbias import (
    DegeneratePostselectionError,
    DensityOperator,
    HermitianOperator,
    InvalidParameterError,
    InvalidStateError,
    PerturbativeRegimeWarning,
    PureState,
    ValidationError,
    WeakMeasurementSetup,
    apply_probe_decoherence_exact,
    apply_probe_decoherence_first_order,
    first_order_model_postselected,
    first_order_model_standard,
    ket_minus,
    ket_plus,
    measurement_distribution,
    pointer_shift_exact,
    pointer_shift_first_order,
    probe_state_postselected_exact,
    probe_state_postselected_first_order,
    probe_state_standard_exact,
    probe_state_standard_first_order,
    probe_weak_values,
    pure_to_density,
    system_expectation,
    system_weak_value,
    weak_value,
)
from weakbias import KET_0, KET_1, PAULI_Y, PAULI_Z, as_vector, trace_distance
from weakbias.validation import random_guarded_setup

THETA = math.pi / 8.0
N_BAR = 0.7


def rotated_probe_basis(theta: float) -> tuple[PureState, PureState]:
    """Computational basis rotated by exp(-i theta sigma_x)."""
    c, s = math.cos(theta), math.sin(theta)
    return (
        PureState(np.array([c, -1j * s])),
        PureState(np.array([-1j * s, c])),
    )


def tilted_postselection(delta: float) -> PureState:
    vec = math.cos(delta) * as_vector(ket_minus()) + math.sin(delta) * as_vector(ket_plus())
    return PureState(vec)


def qubit_pair_setup(
    delta: float = 1e-3,
    eps_d: float = 1e-5,
    postselected: bool = True,
    theta: float = THETA,
) -> WeakMeasurementSetup:
    """Two-qubit configuration with closed-form probe weak values."""
    return WeakMeasurementSetup(
        system_initial=PureState(ket_plus()),
        probe_initial=pure_to_density(ket_plus()),
        system_observable=HermitianOperator(PAULI_Z),
        probe_observable=HermitianOperator(PAULI_Z),
        probe_basis=rotated_probe_basis(theta),
        decoherence_operator=HermitianOperator(N_BAR * PAULI_Y),
        decoherence_strength=eps_d,
        interaction_time=1.0,
        postselection=tilted_postselection(delta) if postselected else None,
    )


# --- weak values -------------------------------------------------------------


@pytest.mark.parametrize("delta", [1e-4, 1e-3, 1e-2, 0.1, 1.0])
def test_weak_value_of_tilted_postselection_is_cot_delta(delta):
    a_w = weak_value(HermitianOperator(PAULI_Z), PureState(ket_plus()), tilted_postselection(delta))
    expected = 1.0 / math.tan(delta)
    np.testing.assert_allclose(a_w.real, expected, rtol=1e-12)
    assert abs(a_w.imag) <= 1e-12 * abs(expected)


def test_weak_value_without_postselection_bias_reduces_to_expectation():
    rng = np.random.default_rng(3)
    for _ in range(5):
        raw = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        a = HermitianOperator(0.5 * (raw + raw.conj().T))
        vec = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = PureState(vec / np.linalg.norm(vec))
        a_w = weak_value(a, psi, psi)
        expected = np.real(as_vector(psi).conj() @ a.matrix @ as_vector(psi))
        np.testing.assert_allclose(a_w.real, expected, rtol=1e-12)
        assert abs(a_w.imag) < 1e-14


def test_weak_value_of_eigenstate_is_eigenvalue_for_any_postselection():
    rng = np.random.default_rng(4)
    z = HermitianOperator(PAULI_Z)
    for _ in range(5):
        vec = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi_f = PureState(vec / np.linalg.norm(vec))
        np.testing.assert_allclose(weak_value(z, PureState(KET_0), psi_f), 1.0 + 0.0j, atol=1e-14)
        np.testing.assert_allclose(weak_value(z, PureState(KET_1), psi_f), -1.0 + 0.0j, atol=1e-14)


def test_weak_value_orthogonal_postselection_raises():
    with pytest.raises(DegeneratePostselectionError):
        weak_value(HermitianOperator(PAULI_Z), PureState(KET_0), PureState(KET_1))


def test_system_weak_value_mixed_state_matches_pure_projector():
    setup = qubit_pair_setup()
    pure = system_weak_value(setup)
    mixed_setup = dataclasses.replace(setup, system_initial=pure_to_density(ket_plus()))
    mixed = system_weak_value(mixed_setup)
    # For a projector onto psi_i the quotient <f|A rho|f>/<f|rho|f> equals
    # A_w times |<f|i>|^2 / |<f|i>|^2.
    np.testing.assert_allclose(mixed, pure, rtol=1e-12)


def test_system_weak_value_requires_postselection():
    setup = qubit_pair_setup(postselected=False)
    with pytest.raises(DegeneratePostselectionError):
        system_weak_value(setup)


def test_system_expectation_pure_and_mixed():
    setup = qubit_pair_setup()
    np.testing.assert_allclose(system_expectation(setup), 0.0, atol=1e-15)
    z_up = dataclasses.replace(setup, system_initial=PureState(KET_0), postselection=None)
    np.testing.assert_allclose(system_expectation(z_up), 1.0, rtol=1e-15)
    mixed = dataclasses.replace(
        setup,
        system_initial=DensityOperator(np.diag([0.75, 0.25])),
        postselection=None,
    )
    np.testing.assert_allclose(system_expectation(mixed), 0.5, rtol=1e-14)


# --- probe weak values -------------------------------------------------------


def test_probe_weak_values_scalar_oracle_rotated_basis():
    """For rho_D = |+><+|, G = sigma_z, H' = n sigma_y and a basis rotated by
    exp(-i theta sigma_x), hand evaluation gives baselines 1/2 and
    G_w = +/- e^{-2i theta}, H'_w = -/+ i n e^{-2i theta}."""
    setup = qubit_pair_setup()
    pwv = probe_weak_values(setup)
    phase = cmath.exp(-2j * THETA)
    np.testing.assert_allclose(pwv.baseline, [0.5, 0.5], rtol=1e-14)
    np.testing.assert_allclose(pwv.g_w, [phase, -phase], rtol=1e-13)
    np.testing.assert_allclose(pwv.h_dw, [-1j * N_BAR * phase, 1j * N_BAR * phase], rtol=1e-13)
    np.testing.assert_array_equal(pwv.outcome_indices, [0, 1])


def test_probe_weak_values_trace_identities_random():
    rng = np.random.default_rng(10)
    for _ in range(100):
        setup = random_guarded_setup(rng)
        pwv = probe_weak_values(setup)
        np.testing.assert_allclose(pwv.baseline.sum(), 1.0, atol=1e-12)
        # sum_k <k|M rho|k> = Tr(M rho) for any complete basis
        g_trace = np.trace(setup.probe_observable.matrix @ setup.probe_initial.matrix)
        h_trace = np.trace(setup.decoherence_operator.matrix @ setup.probe_initial.matrix)
        np.testing.assert_allclose(np.sum(pwv.baseline * pwv.g_w), g_trace, atol=1e-12)
        np.testing.assert_allclose(np.sum(pwv.baseline * pwv.h_dw), h_trace, atol=1e-12)
        assert abs(np.sum(pwv.baseline * pwv.h_dw.imag)) <= 1e-10


# --- first-order states vs exact unitary counterparts ------------------------


def second_order_gap(first_order_fn, exact_fn, g: float) -> float:
    return trace_distance(first_order_fn(g), exact_fn(g))


@pytest.mark.filterwarnings("ignore::weakbias.PerturbativeRegimeWarning")
def test_standard_state_first_order_converges_at_second_order():
    rng = np.random.default_rng(21)
    setup = random_guarded_setup(rng)
    gaps = {}
    for g in (1e-2, 1e-3, 1e-4):
        first = probe_state_standard_first_order(setup, g)
        exact = probe_state_standard_exact(setup, g)
        gaps[g] = trace_distance(first, exact)
    assert gaps[1e-3] <= 0.02 * gaps[1e-2]
    assert gaps[1e-4] <= 0.02 * gaps[1e-3]
    assert gaps[1e-4] < 1e-6


@pytest.mark.filterwarnings("ignore::weakbias.PerturbativeRegimeWarning")
def test_postselected_state_first_order_converges_at_second_order():
    rng = np.random.default_rng(22)
    setup = random_guarded_setup(rng)
    gaps = {}
    prob_gaps = {}
    for g in (1e-2, 1e-3, 1e-4):
        first, prob_first = probe_state_postselected_first_order(setup, g)
        exact, prob_exact = probe_state_postselected_exact(setup, g)
        gaps[g] = trace_distance(first, exact)
        prob_gaps[g] = abs(prob_first - prob_exact)
    assert gaps[1e-3] <= 0.02 * gaps[1e-2]
    assert gaps[1e-4] <= 0.02 * gaps[1e-3]
    assert prob_gaps[1e-3] <= 0.02 * prob_gaps[1e-2]
    assert prob_gaps[1e-4] <= 0.02 * prob_gaps[1e-3]


@pytest.mark.filterwarnings("ignore::weakbias.PerturbativeRegimeWarning")
def test_decoherence_first_order_converges_at_second_order():
    rng = np.random.default_rng(23)
    base = random_guarded_setup(rng)
    gaps = {}
    for eps in (1e-2, 1e-3, 1e-4):
        setup = dataclasses.replace(base, decoherence_strength=eps)
        first = apply_probe_decoherence_first_order(base.probe_initial, setup)
        exact = apply_probe_decoherence_exact(base.probe_initial, setup)
        gaps[eps] = trace_distance(first, exact)
    assert gaps[1e-3] <= 0.02 * gaps[1e-2]
    assert gaps[1e-4] <= 0.02 * gaps[1e-3]


def test_exact_states_at_zero_coupling_return_initial_probe():
    rng = np.random.default_rng(24)
    setup = random_guarded_setup(rng)
    rho = setup.probe_initial.matrix
    np.testing.assert_allclose(probe_state_standard_exact(setup, 0.0).matrix, rho, atol=1e-14)
    state, _prob = probe_state_postselected_exact(setup, 0.0)
    np.testing.assert_allclose(state.matrix, rho, atol=1e-13)


def test_exact_postselection_probability_at_zero_coupling_is_overlap_squared():
    for delta in (1e-3, 1e-2, 0.3):
        setup = qubit_pair_setup(delta=delta)
        _state, prob = probe_state_postselected_exact(setup, 0.0)
        np.testing.assert_allclose(prob, math.sin(delta) ** 2, rtol=1e-10)


def test_exact_postselection_without_state_raises():
    setup = qubit_pair_setup(postselected=False)
    with pytest.raises(DegeneratePostselectionError):
        probe_state_postselected_exact(setup, 1e-3)
    with pytest.raises(DegeneratePostselectionError):
        probe_state_postselected_first_order(setup, 1e-3)


def test_exact_postselected_state_is_valid_at_tiny_overlap():
    # Near-orthogonal postselection: O(1) amplitudes cancel down to the
    # conditional probability, which must not poison Hermiticity or positivity.
    setup = qubit_pair_setup(delta=1e-4)
    state, prob = probe_state_postselected_exact(setup, 1e-5)
    assert prob < 1e-6
    defect = np.max(np.abs(state.matrix - state.matrix.conj().T))
    assert defect < 1e-14
    assert np.linalg.eigvalsh(state.matrix).min() > -1e-14


# --- pointer shift ------------------------------------------------------------


def test_pointer_shift_first_order_matches_exact_derivative():
    rng = np.random.default_rng(30)
    for _ in range(5):
        setup = random_guarded_setup(rng)
        raw = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        measured = HermitianOperator(0.5 * (raw + raw.conj().T))
        g = 1e-3
        first = pointer_shift_first_order(setup, measured, g)
        h = 1e-4
        slope = (pointer_shift_exact(setup, measured, h) - pointer_shift_exact(setup, measured, -h)) / (2.0 * h)
        np.testing.assert_allclose(first, slope * g, rtol=1e-5, atol=1e-12)


def test_pointer_shift_is_linear_in_g():
    rng = np.random.default_rng(31)
    setup = random_guarded_setup(rng)
    raw = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    measured = HermitianOperator(0.5 * (raw + raw.conj().T))
    s1 = pointer_shift_first_order(setup, measured, 1e-3)
    s2 = pointer_shift_first_order(setup, measured, 2e-3)
    np.testing.assert_allclose(s2, 2.0 * s1, rtol=1e-12)


# --- measurement distributions ------------------------------------------------


def test_measurement_distribution_clamps_tiny_negative_probability():
    state = DensityOperator(np.diag([1.0 + 5e-11, -5e-11]))
    basis = (PureState(KET_0), PureState(KET_1))
    dist = measurement_distribution(state, basis)
    assert dist.probabilities[1] == 0.0
    np.testing.assert_allclose(dist.probabilities.sum(), 1.0, rtol=0.0, atol=0.0)


def test_measurement_distribution_rejects_large_negative_probability():
    state = DensityOperator(np.diag([1.0 + 2e-8, -2e-8]), psd_tol=1e-7)
    basis = (PureState(KET_0), PureState(KET_1))
    with pytest.raises(InvalidStateError):
        measurement_distribution(state, basis)


def test_measurement_distribution_commutes_with_basis_rotation():
    rng = np.random.default_rng(33)
    setup = random_guarded_setup(rng)
    dist = measurement_distribution(setup.probe_initial, setup.probe_basis)
    expected = [
        float(np.real(as_vector(k).conj() @ setup.probe_initial.matrix @ as_vector(k)))
        for k in setup.probe_basis
    ]
    np.testing.assert_allclose(dist.probabilities, expected, atol=1e-14)


def test_decoherence_shifts_diagonal_by_imaginary_weak_value():
    """First-order dephasing moves each outcome to w_k (1 + 2 eps t Im H'_w),
    which for the rotated qubit basis is (1 -/+ 2 eps t n cos 2 theta)/2."""
    eps = 1e-4
    setup = qubit_pair_setup(eps_d=eps)
    state = apply_probe_decoherence_first_order(setup.probe_initial, setup)
    dist = measurement_distribution(state, setup.probe_basis)
    shift = 2.0 * eps * N_BAR * math.cos(2.0 * THETA)
    expected = [0.5 * (1.0 - shift), 0.5 * (1.0 + shift)]
    np.testing.assert_allclose(dist.probabilities, expected, rtol=1e-12)


# --- first-order parametric models ---------------------------------------------


def test_first_order_models_match_distribution_at_zero():
    rng = np.random.default_rng(40)
    setup = random_guarded_setup(rng)
    baseline = measurement_distribution(setup.probe_initial, setup.probe_basis)
    for model in (first_order_model_standard(setup), first_order_model_postselected(setup)):
        np.testing.assert_allclose(
            model.evaluate(0.0).probabilities, baseline.probabilities, atol=1e-14
        )


@pytest.mark.filterwarnings("ignore::weakbias.PerturbativeRegimeWarning")
def test_first_order_model_derivatives_match_finite_differences():
    rng = np.random.default_rng(41)
    h = 1e-6
    for _ in range(10):
        setup = random_guarded_setup(rng)
        for model in (first_order_model_standard(setup), first_order_model_postselected(setup)):
            for g in (0.0, 1e-3, -2e-3):
                fd = (model.evaluate(g + h).probabilities - model.evaluate(g - h).probabilities) / (2.0 * h)
                analytic = model.derivative(g)
                np.testing.assert_allclose(analytic, fd, atol=1e-7)
                np.testing.assert_allclose(analytic.sum(), 0.0, atol=1e-12)


def test_first_order_model_postselected_requires_postselection():
    setup = qubit_pair_setup(postselected=False)
    with pytest.raises(DegeneratePostselectionError):
        first_order_model_postselected(setup)


# --- setup validation and regime warnings --------------------------------------


def test_setup_rejects_non_orthonormal_basis():
    bad_basis = (PureState(KET_0), PureState(np.array([1.0, 1.0]) / math.sqrt(2.0)))
    with pytest.raises(ValidationError):
        dataclasses.replace(qubit_pair_setup(), probe_basis=bad_basis)


def test_setup_rejects_incomplete_basis():
    with pytest.raises(ValidationError):
        dataclasses.replace(qubit_pair_setup(), probe_basis=(PureState(KET_0),))


def test_setup_rejects_dimension_mismatches():
    setup = qubit_pair_setup()
    qutrit = HermitianOperator(np.diag([1.0, 0.0, -1.0]))
    with pytest.raises(ValidationError):
        dataclasses.replace(setup, system_observable=qutrit)
    with pytest.raises(ValidationError):
        dataclasses.replace(setup, probe_observable=qutrit)
    with pytest.raises(ValidationError):
        dataclasses.replace(setup, decoherence_operator=qutrit)
    with pytest.raises(ValidationError):
        dataclasses.replace(setup, postselection=PureState(np.array([1.0, 0.0, 0.0])))


def test_setup_rejects_invalid_scalars():
    setup = qubit_pair_setup()
    with pytest.raises(InvalidParameterError):
        dataclasses.replace(setup, decoherence_strength=-1e-6)
    with pytest.raises(InvalidParameterError):
        dataclasses.replace(setup, interaction_time=0.0)


def test_setup_rejects_orthogonal_postselection():
    setup = qubit_pair_setup()
    with pytest.raises(DegeneratePostselectionError):
        dataclasses.replace(setup, postselection=PureState(ket_minus()))


def test_strong_coupling_warns_but_still_returns_state():
    setup = qubit_pair_setup()
    with pytest.warns(PerturbativeRegimeWarning):
        probe_state_standard_first_order(setup, 0.05)
    strong = dataclasses.replace(setup, decoherence_strength=0.05)
    with pytest.warns(PerturbativeRegimeWarning):
        apply_probe_decoherence_first_order(setup.probe_initial, strong)


def test_weak_coupling_does_not_warn():
    setup = qubit_pair_setup()
    with warnings.catch_warnings():
        warnings.simplefilter("error", PerturbativeRegimeWarning)
        probe_state_standard_first_order(setup, 1e-5)
        probe_state_postselected_first_order(setup, 1e-5)
        apply_probe_decoherence_first_order(setup.probe_initial, setup)
