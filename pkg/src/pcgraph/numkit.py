"""Dense linear algebra kernels: matrix polynomials, exponentials, Gramians.

All routines are pure functions on numpy arrays.  Matrices are never
mutated in place; returned arrays are fresh.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import NotCausalError, NumericalError, SingularMatrixError

#: Eigenvalue real parts must be below ``-EPS_STAB`` for a matrix to count as stable.
EPS_STAB = 1e-9
#: Condition-number cap for :func:`hermitian_inverse`.
COND_CAP = 1e12


def _square(M, name="matrix") -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


@dataclass(frozen=True)
class MatrixPolynomial:
    """Polynomial ``sum_j C_j z**j`` with real k x k coefficients.

    ``coefficients[j]`` is the coefficient of ``z**j``; the degree is
    ``len(coefficients) - 1``.
    """

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(np.array(c, dtype=float) for c in self.coefficients)
        if not coeffs:
            raise ValueError("a matrix polynomial needs at least one coefficient")
        k = coeffs[0].shape
        for c in coeffs:
            if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape != k:
                raise ValueError("coefficients must be square matrices of equal size")
            c.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def dim(self) -> int:
        return self.coefficients[0].shape[0]

    def __call__(self, z):
        return eval_poly(self, z)


def eval_poly(P: MatrixPolynomial, z) -> np.ndarray:
    """Evaluate ``P(z)`` by Horner's rule.

    ``z`` may be a scalar or a 1-d array; for an array the result has shape
    ``(len(z), k, k)``.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)[:, None, None]
    out = np.broadcast_to(P.coefficients[-1], (z.shape[0], P.dim, P.dim)).astype(complex)
    for c in reversed(P.coefficients[:-1]):
        out = out * z + c
    return out[0] if scalar else out


def matrix_exponential(M) -> np.ndarray:
    """``exp(M)`` via scaling-and-squaring with a Pade approximant."""
    M = _square(M)
    return scipy.linalg.expm(M)


def eigenvalues(M, cluster_tol: float = 1e-5) -> np.ndarray:
    """Eigenvalues of a real square matrix.

    Defective eigenvalues are returned by LAPACK as a tight cluster split by
    roughly ``eps**(1/m)``; clusters closer than ``cluster_tol * max(1, ||M||)``
    are replaced by their arithmetic mean, which is accurate to roundoff.
    Pass ``cluster_tol=0`` to get the raw LAPACK output.
    """
    M = _square(M)
    if M.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    try:
        ev = np.linalg.eigvals(M).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration failed: {exc}") from exc
    if cluster_tol <= 0 or ev.size < 2:
        return ev
    tol = cluster_tol * max(1.0, np.linalg.norm(M, np.inf))
    # single-linkage clustering
    labels = np.arange(ev.size)
    for i in range(ev.size):
        for j in range(i + 1, ev.size):
            if abs(ev[i] - ev[j]) <= tol:
                labels[labels == labels[j]] = labels[i]
    out = ev.copy()
    for lab in np.unique(labels):
        idx = labels == lab
        if idx.sum() > 1:
            out[idx] = ev[idx].mean()
    return out


def spectral_abscissa(M) -> float:
    return float(np.max(eigenvalues(M).real))


def is_stable(M, eps: float = EPS_STAB) -> bool:
    return spectral_abscissa(M) < -eps


def lyapunov_stationary(A, Q) -> np.ndarray:
    """Solve ``A G + G A^T + Q = 0`` for stable ``A``.

    For stable ``A`` the solution equals ``int_0^inf e^{Au} Q e^{A^T u} du``.
    """
    A = _square(np.asarray(A, dtype=float), "A")
    Q = _square(np.asarray(Q, dtype=float), "Q")
    if A.shape != Q.shape:
        raise ValueError("A and Q must have the same shape")
    if not is_stable(A):
        raise NotCausalError(
            f"A is not stable (spectral abscissa {spectral_abscissa(A):.3g})"
        )
    G = scipy.linalg.solve_continuous_lyapunov(A, -Q)
    return 0.5 * (G + G.T)


def _van_loan(A: np.ndarray, Q: np.ndarray, delta: float) -> np.ndarray:
    k = A.shape[0]
    M = np.zeros((2 * k, 2 * k))
    M[:k, :k] = -A
    M[:k, k:] = Q
    M[k:, k:] = A.T
    E = matrix_exponential(M * delta)
    # E12 = e^{-A d} S(d), E22 = e^{A^T d}
    return E[k:, k:].T @ E[:k, k:]


def gramian_finite(A, Q, delta: float) -> np.ndarray:
    """``int_0^delta e^{Au} Q e^{A^T u} du`` by the Van Loan block exponential.

    The block construction loses accuracy once ``||A|| delta`` is large
    (it forms ``e^{-A delta}``), so the integral is evaluated on
    ``delta / 2**s`` with ``||A|| delta / 2**s <= 1/2`` and extended by the
    doubling identity ``S(2h) = S(h) + e^{Ah} S(h) e^{A^T h}``.
    """
    A = _square(np.asarray(A, dtype=float), "A")
    Q = _square(np.asarray(Q, dtype=float), "Q")
    if A.shape != Q.shape:
        raise ValueError("A and Q must have the same shape")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    nrm = np.linalg.norm(A, 1) * delta
    s = max(0, int(np.ceil(np.log2(nrm / 0.5)))) if nrm > 0.5 else 0
    h = delta / 2**s
    S = _van_loan(A, Q, h)
    F = matrix_exponential(A * h)
    for _ in range(s):
        S = S + F @ S @ F.T
        F = F @ F
    return 0.5 * (S + S.T)


def hermitian_inverse(M, cond_cap: float = COND_CAP) -> np.ndarray:
    """Inverse of a Hermitian matrix via its eigendecomposition.

    Works on a single matrix or a stack ``(..., k, k)``.

    Raises
    ------
    SingularMatrixError
        If the 2-norm condition number exceeds ``cond_cap``.
    """
    M = np.asarray(M)
    if M.shape[-1] != M.shape[-2]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    H = 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))
    w, V = np.linalg.eigh(H)
    aw = np.abs(w)
    big = aw.max(axis=-1)
    small = aw.min(axis=-1)
    if np.any(small <= big / cond_cap) or np.any(big == 0):
        raise SingularMatrixError(
            f"matrix is singular to working precision (condition number > {cond_cap:g})"
        )
    inv = (V / w[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))
    if not np.iscomplexobj(M):
        inv = inv.real
    return inv


def is_positive_definite(M) -> bool:
    M = np.asarray(M)
    H = 0.5 * (M + M.conj().T)
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return False
    return True


def block(M: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Submatrix (works on stacks) for 0-based index lists."""
    return M[..., list(rows), :][..., :, list(cols)]
