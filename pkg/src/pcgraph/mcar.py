"""MCAR(p) models and their exact second-order structure.

The process is the output ``Y = C X`` of the state equation
``dX = A_comp X dt + B dL`` where ``A_comp`` is the block companion matrix
of the AR polynomial ``P(z) = I z^p + A_1 z^{p-1} + ... + A_p``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import numkit
from .errors import InvalidModelError, NotCausalError, SingularMatrixError
from .numkit import EPS_STAB, MatrixPolynomial

#: Entries of user matrices with magnitude <= SNAP_TOL are treated as exact zeros.
SNAP_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MCARModel:
    """Causal-candidate MCAR(p) model.

    Parameters
    ----------
    A : sequence of p arrays, each k x k
        AR coefficient matrices ``A_1 .. A_p``.
    Sigma_L : array, k x k
        Covariance of ``L(1)``; must be symmetric positive definite.
    snap_zeros : bool
        Replace entries with ``|x| <= SNAP_TOL`` by exact zeros.

    Structural validity (shapes, symmetry, positive definiteness) is checked
    here.  Causality is *not* required at construction; operations that need
    it call :func:`require_causal`.
    """

    A: tuple
    Sigma_L: np.ndarray
    snap_zeros: bool = True

    def __post_init__(self):
        try:
            mats = [np.array(a, dtype=float) for a in self.A]
            S = np.array(self.Sigma_L, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidModelError(f"model matrices are not numeric: {exc}") from exc
        if not mats:
            raise InvalidModelError("an MCAR model needs p >= 1 AR matrices")
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] == 0:
            raise InvalidModelError(f"Sigma_L must be square, got shape {S.shape}")
        k = S.shape[0]
        for j, a in enumerate(mats, 1):
            if a.shape != (k, k):
                raise InvalidModelError(f"A_{j} has shape {a.shape}, expected {(k, k)}")
        for m in mats + [S]:
            if not np.all(np.isfinite(m)):
                raise InvalidModelError("model matrices must be finite")
        if self.snap_zeros:
            for m in mats + [S]:
                m[np.abs(m) <= SNAP_TOL] = 0.0
        scale = max(1.0, np.abs(S).max())
        if np.abs(S - S.T).max() > 1e-10 * scale:
            raise InvalidModelError("Sigma_L must be symmetric")
        S = 0.5 * (S + S.T)
        if not numkit.is_positive_definite(S):
            raise InvalidModelError("Sigma_L must be positive definite")
        object.__setattr__(self, "A", tuple(_readonly(a) for a in mats))
        object.__setattr__(self, "Sigma_L", _readonly(S))

    @classmethod
    def ornstein_uhlenbeck(cls, state_matrix, Sigma_L=None, **kw) -> "MCARModel":
        """OU process ``dY = state_matrix Y dt + dL``, i.e. ``A_1 = -state_matrix``."""
        state_matrix = np.asarray(state_matrix, dtype=float)
        if Sigma_L is None:
            Sigma_L = np.eye(state_matrix.shape[0])
        return cls((-state_matrix,), Sigma_L, **kw)

    @property
    def k(self) -> int:
        return self.Sigma_L.shape[0]

    @property
    def p(self) -> int:
        return len(self.A)

    @cached_property
    def Sigma_L_inv(self) -> np.ndarray:
        return _readonly(np.linalg.inv(self.Sigma_L))

    def ar_coefficient(self, j: int) -> np.ndarray:
        """``A_j`` with the convention ``A_0 = I``."""
        if j == 0:
            return np.eye(self.k)
        return self.A[j - 1]

    def ar_polynomial(self) -> MatrixPolynomial:
        # coefficient of z^j is A_{p-j}
        return MatrixPolynomial(tuple(self.ar_coefficient(self.p - j) for j in range(self.p + 1)))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "p": self.p,
            "A": [a.tolist() for a in self.A],
            "Sigma_L": self.Sigma_L.tolist(),
            "snap_zeros": self.snap_zeros,
        }

    def __repr__(self):
        return f"MCARModel(k={self.k}, p={self.p})"


@dataclass(frozen=True)
class StateSpace:
    A_comp: np.ndarray
    B_sel: np.ndarray
    C_sel: np.ndarray


class CausalityCheck(NamedTuple):
    is_causal: bool
    eigenvalues: np.ndarray


def companion(model: MCARModel) -> StateSpace:
    k, p = model.k, model.p
    Ac = np.zeros((k * p, k * p))
    for i in range(p - 1):
        Ac[i * k:(i + 1) * k, (i + 1) * k:(i + 2) * k] = np.eye(k)
    # bottom block row: (-A_p, ..., -A_1)
    for j in range(p):
        Ac[(p - 1) * k:, j * k:(j + 1) * k] = -model.A[p - 1 - j]
    B = np.zeros((k * p, k))
    B[(p - 1) * k:, :] = np.eye(k)
    C = np.zeros((k, k * p))
    C[:, :k] = np.eye(k)
    return StateSpace(Ac, B, C)


def check_causal(model: MCARModel, eps: float = EPS_STAB) -> CausalityCheck:
    ev = numkit.eigenvalues(companion(model).A_comp)
    return CausalityCheck(bool(ev.real.max() < -eps), ev)


def require_causal(model: MCARModel) -> None:
    res = check_causal(model)
    if not res.is_causal:
        raise NotCausalError(
            f"model is not causal: max Re(eigenvalue) = {res.eigenvalues.real.max():.6g}"
        )


def _transfer(model: MCARModel, lam) -> np.ndarray:
    """``P(i lam)^{-1}``, stacked over ``lam``."""
    P = numkit.eval_poly(model.ar_polynomial(), 1j * np.asarray(lam, dtype=float))
    try:
        return np.linalg.inv(P)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("P(i lambda) is singular") from exc


def spectral_density(model: MCARModel, lam) -> np.ndarray:
    """``f(lam) = (2 pi)^{-1} P(i lam)^{-1} Sigma_L P(i lam)^{-H}``.

    ``lam`` may be scalar (returns k x k) or 1-d (returns ``(len(lam), k, k)``).
    """
    require_causal(model)
    H = _transfer(model, lam)
    f = H @ model.Sigma_L @ np.conj(np.swapaxes(H, -1, -2)) / (2 * np.pi)
    return 0.5 * (f + np.conj(np.swapaxes(f, -1, -2)))


def inverse_spectral_density(model: MCARModel, lam) -> np.ndarray:
    """Closed form ``g(lam) = 2 pi P(-i lam)^T Sigma_L^{-1} P(i lam)``."""
    P = numkit.eval_poly(model.ar_polynomial(), 1j * np.asarray(lam, dtype=float))
    PH = np.conj(np.swapaxes(P, -1, -2))  # P(-i lam)^T for real coefficients
    return 2 * np.pi * (PH @ model.Sigma_L_inv @ P)


def g_coefficients(model: MCARModel) -> MatrixPolynomial:
    """Real coefficients ``G_0 .. G_{2p}`` with ``g(lam) = sum_n G_n (i lam)^n``.

    ``G_n = 2 pi sum_{m = max(0, n-p)}^{min(n, p)} (-1)^m A_{p-m}^T Sigma_L^{-1} A_{p-n+m}``
    with ``A_0 = I``.
    """
    p = model.p
    Si = model.Sigma_L_inv
    G = []
    for n in range(2 * p + 1):
        acc = np.zeros((model.k, model.k))
        for m in range(max(0, n - p), min(n, p) + 1):
            acc += (-1) ** m * model.ar_coefficient(p - m).T @ Si @ model.ar_coefficient(p - n + m)
        G.append(2 * np.pi * acc)
    return MatrixPolynomial(tuple(G))


def eval_g_coefficients(G: MatrixPolynomial, lam) -> np.ndarray:
    """Evaluate a coefficient polynomial in the variable ``i lam``."""
    return numkit.eval_poly(G, 1j * np.asarray(lam, dtype=float))


def stationary_state_covariance(model: MCARModel) -> np.ndarray:
    """``Gamma(0)``, the stationary covariance of the state vector."""
    ss = companion(model)
    return numkit.lyapunov_stationary(ss.A_comp, ss.B_sel @ model.Sigma_L @ ss.B_sel.T)


def autocovariance(model: MCARModel, t: float) -> np.ndarray:
    """``c(t) = C e^{A t} Gamma(0) C^T`` for ``t >= 0`` and ``c(|t|)^T`` for ``t < 0``."""
    require_causal(model)
    ss = companion(model)
    Gamma = stationary_state_covariance(model)
    c = ss.C_sel @ numkit.matrix_exponential(ss.A_comp * abs(t)) @ Gamma @ ss.C_sel.T
    return c.T if t < 0 else c


def abscissa_magnitude(model: MCARModel) -> float:
    """``|max Re sigma(A_comp)|``, the decay rate of the slowest mode."""
    return float(abs(check_causal(model).eigenvalues.real.max()))
