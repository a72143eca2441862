"""Asymptotic estimation theory for one-parameter outcome distributions.

Implements Fisher information, relative entropy and its derivative along the
model family, the first-order systematic error (bias) of the asymptotic
maximum-likelihood estimate, closed-form biases for weak-measurement setups
with and without postselection, and a brute-force maximum-likelihood oracle
used to validate the first-order formulas.

Conventions: natural logarithms throughout; outcomes whose model probability
is at or below 1e-15 are excluded from every sum (they contribute nothing at
first order but would produce 0/0 quotients).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegeneratePostselectionError,
    InvalidParameterError,
    NumericalFailureError,
    SearchIntervalError,
    SupportMismatchError,
    UninformativeModelError,
    ValidationError,
)
from .tolerances import (
    DERIVATIVE_SUM_TOL,
    FD_STEP_FLOOR,
    FD_STEP_REL,
    FISHER_MIN,
    GOLDEN_MAX_STEPS,
    GOLDEN_REL_TOL,
    GRID_POINTS_DEFAULT,
    GRID_POINTS_MIN,
    GRID_TIE_TOL,
    OVERLAP_TOL,
    PROB_FLOOR,
    PROB_SUM_TOL,
    ROUTE_AGREEMENT_TOL,
)

__all__ = [
    "OutcomeDistribution",
    "ParametricModel",
    "BiasReport",
    "fisher_information",
    "relative_entropy",
    "d_relative_entropy_dg",
    "systematic_error_first_order",
    "mle_oracle",
    "default_search_interval",
    "systematic_error_standard",
    "systematic_error_postselected",
]


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """A finite probability distribution over labeled outcomes."""

    probabilities: np.ndarray
    outcome_labels: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=np.float64).reshape(-1)
        if p.size == 0:
            raise ValidationError("distribution must have at least one outcome")
        if np.any(p < 0.0):
            raise ValidationError(f"negative probability: min p = {float(p.min()):.3e}")
        total = float(p.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, off 1 by more than {PROB_SUM_TOL}")
        labels = self.outcome_labels
        labels = np.arange(p.size) if labels is None else np.asarray(labels, dtype=np.int64).reshape(-1)
        if labels.size != p.size:
            raise ValidationError("outcome_labels length does not match probabilities")
        p.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "outcome_labels", labels)

    @property
    def size(self) -> int:
        return self.probabilities.size


@dataclass(frozen=True, eq=False)
class ParametricModel:
    """One-parameter family ``g -> OutcomeDistribution``.

    ``derivative`` maps g to the vector of probability derivatives dp_k/dg;
    when absent a central finite difference with step
    ``max(1e-9, 1e-4 * |g|)`` (or the declared ``fd_step``) is used, projected
    onto zero sum since normalized families satisfy sum_k dp_k/dg = 0 exactly.
    """

    evaluate: Callable[[float], OutcomeDistribution]
    derivative: Optional[Callable[[float], np.ndarray]] = None
    fd_step: Optional[float] = None

    def derivative_at(self, g0: float) -> np.ndarray:
        if self.derivative is not None:
            dp = np.asarray(self.derivative(g0), dtype=np.float64).reshape(-1)
        else:
            h = self.fd_step if self.fd_step is not None else max(FD_STEP_FLOOR, FD_STEP_REL * abs(g0))
            hi = self.evaluate(g0 + h).probabilities
            lo = self.evaluate(g0 - h).probabilities
            dp = (hi - lo) / (2.0 * h)
            dp = dp - dp.mean()  # restore sum_k dp_k = 0 lost to per-component rounding
        total = float(np.sum(dp))
        if abs(total) > DERIVATIVE_SUM_TOL:
            raise NumericalFailureError(
                f"model derivative sums to {total:.3e}; a normalized family requires < {DERIVATIVE_SUM_TOL}"
            )
        return dp


@dataclass(frozen=True, eq=False)
class BiasReport:
    """First-order bias of the asymptotic MLE at a fixed true value g0."""

    g0: float
    bias_first_order: float
    fisher: float
    d_relative_entropy: float
    bias_oracle: Optional[float] = None


def _retained(p0: np.ndarray) -> np.ndarray:
    return p0 > PROB_FLOOR


def fisher_information(model: ParametricModel, g0: float) -> float:
    """``F = sum_k (dp_k/dg)^2 / p_k`` at g0 over retained outcomes.

    Returns the value even when it is zero; quotient-forming callers decide
    whether a vanishing F is an error.
    """
    p0 = model.evaluate(g0).probabilities
    mask = _retained(p0)
    dp = model.derivative_at(g0)
    return float(np.sum(dp[mask] ** 2 / p0[mask]))


def relative_entropy(p: OutcomeDistribution, q: OutcomeDistribution) -> float:
    """``D(p || q) = sum_k p_k ln(p_k / q_k)``; terms with p_k = 0 contribute 0."""
    pv = p.probabilities
    qv = q.probabilities
    if pv.size != qv.size:
        raise SupportMismatchError(f"distribution sizes differ: {pv.size} vs {qv.size}")
    mask = pv > 0.0
    if np.any(qv[mask] <= 0.0):
        raise SupportMismatchError("q has zero mass on an outcome where p is positive")
    d = float(np.sum(pv[mask] * np.log(pv[mask] / qv[mask])))
    return d if d > 0.0 else 0.0


def _support_checked(p_expt: OutcomeDistribution, p0: np.ndarray) -> np.ndarray:
    pe = p_expt.probabilities
    if pe.size != p0.size:
        raise SupportMismatchError(f"distribution sizes differ: {pe.size} vs {p0.size}")
    mask = _retained(p0)
    if np.any(pe[~mask] > PROB_FLOOR):
        raise SupportMismatchError("observed distribution has mass on an outcome the model excludes")
    return mask


def d_relative_entropy_dg(p_expt: OutcomeDistribution, model: ParametricModel, g0: float) -> float:
    """Derivative of ``D(P_expt || P_g)`` with respect to g at g0.

    Equals ``-sum_k p_expt_k * (dp_k/dg) / p_k(g0)`` over retained outcomes.
    """
    p0 = model.evaluate(g0).probabilities
    mask = _support_checked(p_expt, p0)
    dp = model.derivative_at(g0)
    pe = p_expt.probabilities
    return -float(np.sum(pe[mask] * dp[mask] / p0[mask]))


def systematic_error_first_order(
    p_expt: OutcomeDistribution, model: ParametricModel, g0: float
) -> BiasReport:
    """First-order bias ``dg = -d_g D(P_expt || P_g) / F`` at g0.

    The same quantity is recomputed through the cross-term route
    ``d_g sum_k q_k ln p_k(g)`` with ``q = p_expt - p(g0)``; the two routes are
    asserted to agree within 1e-10 before the quotient is formed.
    """
    p0 = model.evaluate(g0).probabilities
    mask = _support_checked(p_expt, p0)
    dp = model.derivative_at(g0)
    pe = p_expt.probabilities

    ratio = dp[mask] / p0[mask]
    d_rel = -float(np.sum(pe[mask] * ratio))
    cross = float(np.sum((pe[mask] - p0[mask]) * ratio))
    if abs(cross + d_rel) > ROUTE_AGREEMENT_TOL:
        raise NumericalFailureError(
            f"bias routes disagree: |cross + dD| = {abs(cross + d_rel):.3e} > {ROUTE_AGREEMENT_TOL}"
        )

    fisher = float(np.sum(dp[mask] ** 2 / p0[mask]))
    if fisher < FISHER_MIN:
        raise UninformativeModelError(
            f"Fisher information {fisher!r} too small; bias quotient undefined"
        )
    return BiasReport(
        g0=float(g0),
        bias_first_order=-d_rel / fisher,
        fisher=fisher,
        d_relative_entropy=d_rel,
    )


def _scan_objective(pe: np.ndarray, mask: np.ndarray, p: np.ndarray) -> float:
    """Stable MLE objective: ``sum_k pe_k * (log1p(x_k) - x_k)``, x = (p - pe)/pe.

    Identical to ``-D(pe || p)`` for normalized families (the subtracted
    linear term sums to zero), but every term is O(x^2) near the maximum, so
    the curvature survives double-precision summation.  Returns -inf when the
    model leaves the positive simplex on the support of pe.
    """
    x = (p[mask] - pe[mask]) / pe[mask]
    with np.errstate(divide="ignore", invalid="ignore"):
        val = float(np.sum(pe[mask] * (np.log1p(x) - x)))
    return val if np.isfinite(val) else -np.inf


def mle_oracle(
    p_expt: OutcomeDistribution,
    model: ParametricModel,
    search: tuple[float, float],
    grid_points: int = GRID_POINTS_DEFAULT,
) -> float:
    """Argmax over g of the average log-likelihood ``sum_k p_expt_k ln p_k(g)``.

    A coarse scan over ``grid_points`` locates the global maximum (grid ties
    within 1e-12 are broken toward the interval midpoint, the caller's best
    prior for the true value); golden-section refinement then tightens the
    bracket to ``|dg| <= 1e-14 * max(1, |g|)`` or 200 steps.  A maximum on the
    interval boundary raises, since the bracket cannot be trusted.
    """
    lo, hi = float(search[0]), float(search[1])
    if not lo < hi:
        raise InvalidParameterError(f"search interval must satisfy lo < hi, got ({lo!r}, {hi!r})")
    if grid_points < GRID_POINTS_MIN:
        raise InvalidParameterError(f"grid_points must be >= {GRID_POINTS_MIN}, got {grid_points}")

    pe = p_expt.probabilities
    mask = pe > 0.0

    def objective(g: float) -> float:
        return _scan_objective(pe, mask, model.evaluate(g).probabilities)

    grid = np.linspace(lo, hi, int(grid_points))
    vals = np.array([objective(g) for g in grid])
    vmax = float(vals.max())
    if not np.isfinite(vmax):
        raise NumericalFailureError("likelihood objective is not finite anywhere on the search grid")

    midpoint = 0.5 * (lo + hi)
    tied = np.flatnonzero(vals >= vmax - GRID_TIE_TOL)
    best = int(tied[np.argmin(np.abs(grid[tied] - midpoint))])
    if best == 0 or best == grid.size - 1:
        raise SearchIntervalError(
            f"likelihood maximum at search boundary g = {grid[best]!r}; widen the interval"
        )

    a, b = float(grid[best - 1]), float(grid[best + 1])
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(GOLDEN_MAX_STEPS):
        if (b - a) <= GOLDEN_REL_TOL * max(1.0, abs(0.5 * (a + b))):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    return 0.5 * (a + b)


def default_search_interval(g0: float, predicted_bias: float) -> tuple[float, float]:
    """Default oracle bracket ``g0 +- max(100 * |predicted bias|, 1e-3)``."""
    half = max(100.0 * abs(predicted_bias), 1e-3)
    return (g0 - half, g0 + half)


def systematic_error_standard(setup, g0: float) -> float:
    """Closed-form first-order bias without postselection.

    ``dg_n = eps_D * t * sum_k w_k Im H'_w^(k) Im G_w^(k)
    / (<A>_i * sum_k w_k Im^2 G_w^(k))`` with w_k the baseline probe
    probabilities.  ``g0`` marks the expansion point; the weak-coupling closed
    form itself carries no g dependence.
    """
    from .weakmeas import probe_weak_values, system_expectation

    del g0
    pwv = probe_weak_values(setup)
    a_i = system_expectation(setup)
    if abs(a_i) <= 1e-12:
        raise UninformativeModelError(
            f"<A>_i = {a_i!r} is indistinguishable from 0; standard-arm bias undefined"
        )
    w = pwv.baseline
    im_g = pwv.g_w.imag
    im_h = pwv.h_dw.imag
    denominator = a_i * float(np.sum(w * im_g**2))
    if abs(denominator) < FISHER_MIN:
        raise UninformativeModelError("all Im G_w vanish; standard-arm bias undefined")
    numerator = float(np.sum(w * im_h * im_g))
    return setup.decoherence_strength * setup.interaction_time * numerator / denominator


def systematic_error_postselected(setup, g0: float) -> float:
    """Closed-form first-order bias with postselection.

    ``dg_p = eps_D * t * sum_k w_k Im H'_w^(k) Im(A_w G_w^(k))
    / sum_k w_k Im^2(A_w G_w^(k))``.
    """
    from .weakmeas import probe_weak_values, system_weak_value

    del g0
    if setup.postselection is None:
        raise DegeneratePostselectionError("setup has no postselection state")
    pwv = probe_weak_values(setup)
    a_w = system_weak_value(setup)
    if abs(a_w) <= OVERLAP_TOL:
        # e.g. postselecting onto the initial state of a traceless observable:
        # numerator and denominator are both ~A_w-squared, an undefined 0/0
        raise UninformativeModelError(
            f"weak value {a_w!r} is numerically zero; postselected bias undefined"
        )
    w = pwv.baseline
    im_ag = (a_w * pwv.g_w).imag
    im_h = pwv.h_dw.imag
    denominator = float(np.sum(w * im_ag**2))
    if denominator < FISHER_MIN:
        raise UninformativeModelError(
            "sum_k w_k Im^2(A_w G_w) vanishes; postselected bias undefined"
        )
    numerator = float(np.sum(w * im_h * im_ag))
    return setup.decoherence_strength * setup.interaction_time * numerator / denominator
