"""Dense linear algebra for small Hilbert spaces.

Validated wrappers (Hermitian operators, pure states, density operators) plus
the handful of operations everything else is built from: Kronecker products,
Hermitian eigendecomposition, Hermitian matrix exponentials, and partial
traces.  All matrices are dense complex128 and tiny (dim <= 8), so the
exponential goes through the eigendecomposition route rather than any series
or Pade scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailureError, ValidationError
from .tolerances import HERMITICITY_TOL, NORM_TOL, PSD_TOL, TRACE_TOL

__all__ = [
    "HermitianOperator",
    "PureState",
    "DensityOperator",
    "kron",
    "eig_hermitian",
    "expm_i_hermitian",
    "partial_trace",
    "trace_distance",
    "pure_to_density",
    "projector",
    "dagger",
    "spectral_norm",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "IDENTITY_2",
    "KET_0",
    "KET_1",
    "ket_plus",
    "ket_minus",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.complex128, order="C")
    out.flags.writeable = False
    return out


def as_matrix(m) -> np.ndarray:
    """Return the underlying matrix of a wrapper, or the array itself."""
    return m.matrix if hasattr(m, "matrix") else np.asarray(m, dtype=np.complex128)


def as_vector(v) -> np.ndarray:
    """Return the underlying amplitudes of a wrapper, or the array itself."""
    return v.amplitudes if hasattr(v, "amplitudes") else np.asarray(v, dtype=np.complex128)


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m).conj().T


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A square matrix with ``max|M - M^dag| <= 1e-12``."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"operator must be square, got shape {m.shape}")
        defect = float(np.max(np.abs(m - dagger(m))))
        if defect > HERMITICITY_TOL:
            raise ValidationError(
                f"matrix is not Hermitian: max|M - M^dag| = {defect:.3e} > {HERMITICITY_TOL}"
            )
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class PureState:
    """A complex vector normalized to 1 within 1e-12."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {norm!r} deviates from 1 by more than {NORM_TOL}")
        object.__setattr__(self, "amplitudes", _freeze(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace, positive-semidefinite matrix.

    ``psd_tol`` is the permitted negativity of the smallest eigenvalue.  The
    default is the package-wide 1e-10; constructors of first-order expansions
    pass a relaxed value because a truncated expansion is negative only at
    second order in its own perturbation.
    """

    matrix: np.ndarray
    psd_tol: float = field(default=PSD_TOL)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density operator must be square, got shape {m.shape}")
        defect = float(np.max(np.abs(m - dagger(m))))
        if defect > HERMITICITY_TOL:
            raise ValidationError(
                f"density operator is not Hermitian: defect {defect:.3e} > {HERMITICITY_TOL}"
            )
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"density operator trace {tr!r} deviates from 1 by more than {TRACE_TOL}")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -self.psd_tol:
            raise ValidationError(
                f"density operator has eigenvalue {lo:.3e} below -{self.psd_tol:.3e}"
            )
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result equals ``a[i, j] * b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def eig_hermitian(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with real eigenvalues in ascending
    order and eigenvectors as the columns of a unitary matrix.
    """
    m = as_matrix(h)
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails at dim <= 8
        raise NumericalFailureError(f"Hermitian eigendecomposition failed: {exc}") from exc
    return vals, vecs


def expm_i_hermitian(h, scale: float) -> np.ndarray:
    """Unitary ``exp(-i * scale * H)`` for Hermitian ``H`` via eigendecomposition."""
    vals, vecs = eig_hermitian(h)
    phases = np.exp(-1j * float(scale) * vals)
    return (vecs * phases) @ dagger(vecs)


def _partial_trace_matrix(m: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    d_a, d_b = dims
    r = m.reshape(d_a, d_b, d_a, d_b)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    return np.einsum("ijil->jl", r)


def partial_trace(rho, dims: tuple[int, int], keep: int, psd_tol: float | None = None) -> DensityOperator:
    """Trace out one tensor factor of a bipartite density operator.

    ``dims = (dA, dB)`` are the factor dimensions and ``keep`` selects the
    surviving factor (0 for the first, 1 for the second).
    """
    if keep not in (0, 1):
        raise ValidationError(f"keep must be 0 or 1, got {keep!r}")
    m = as_matrix(rho)
    d_a, d_b = dims
    if m.shape[0] != d_a * d_b:
        raise ValidationError(
            f"dimension mismatch: matrix is {m.shape[0]}-dim but dims {dims} imply {d_a * d_b}"
        )
    reduced = _partial_trace_matrix(m, (d_a, d_b), keep)
    tol = psd_tol if psd_tol is not None else getattr(rho, "psd_tol", PSD_TOL)
    return DensityOperator(reduced, psd_tol=tol)


def trace_distance(rho, sigma) -> float:
    """Trace distance ``0.5 * sum_i |lambda_i(rho - sigma)|``."""
    diff = as_matrix(rho) - as_matrix(sigma)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def projector(psi) -> np.ndarray:
    """Rank-1 projector ``|psi><psi|`` as a plain matrix."""
    v = as_vector(psi)
    return np.outer(v, v.conj())


def pure_to_density(psi, psd_tol: float = PSD_TOL) -> DensityOperator:
    """Rank-1 density operator of a pure state."""
    return DensityOperator(projector(psi), psd_tol=psd_tol)


def spectral_norm(h) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    vals = np.linalg.eigvalsh(as_matrix(h))
    return float(np.max(np.abs(vals)))


PAULI_X = _freeze(np.array([[0.0, 1.0], [1.0, 0.0]]))
PAULI_Y = _freeze(np.array([[0.0, -1.0j], [1.0j, 0.0]]))
PAULI_Z = _freeze(np.array([[1.0, 0.0], [0.0, -1.0]]))
IDENTITY_2 = _freeze(np.eye(2))
KET_0 = _freeze(np.array([1.0, 0.0]))
KET_1 = _freeze(np.array([0.0, 1.0]))


def ket_plus() -> np.ndarray:
    """(|0> + |1>) / sqrt(2)."""
    return np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2.0)


def ket_minus() -> np.ndarray:
    """(|0> - |1>) / sqrt(2)."""
    return np.array([1.0, -1.0], dtype=np.complex128) / np.sqrt(2.0)
