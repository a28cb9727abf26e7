"""Exact-in-distribution sampling of Gaussian MCAR processes on a regular grid.

The state recursion ``X_{j+1} = e^{A delta} X_j + eta_j`` with
``eta_j ~ N(0, Q_delta)`` and ``X_0 ~ N(0, Gamma(0))`` reproduces the law of
the continuous-time process at the grid times.  Random numbers come from
numpy's ``default_rng`` (PCG64 bit generator) seeded with ``seed``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import mcar, numkit
from .errors import SingularMatrixError
from .mcar import MCARModel


@dataclass(frozen=True, eq=False)
class SampledSeries:
    """Observations ``data[:, j] = Y(j * delta)``."""

    delta: float
    data: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError("data must be a k x n matrix")
        if data.shape[1] < 2:
            raise ValueError(f"a sampled series needs n >= 2 observations, got {data.shape[1]}")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not np.all(np.isfinite(data)):
            raise ValueError("data must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def k(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.delta * np.arange(self.n)


def _factor(S: np.ndarray, what: str) -> np.ndarray:
    """Factor ``L`` with ``L @ L.T == S`` for a PSD matrix ``S``."""
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        pass
    # Q_delta for p > 1 is PD but can be too ill-conditioned for Cholesky
    w, V = np.linalg.eigh(S)
    if w.min() < -1e-12 * max(w.max(), 1e-300):
        raise SingularMatrixError(f"{what} is not positive semidefinite (min eigenvalue {w.min():.3g})")
    return V * np.sqrt(np.clip(w, 0.0, None))


def simulate(model: MCARModel, delta: float, n: int, seed: int | None = None) -> SampledSeries:
    """Draw ``Y(0), Y(delta), ..., Y((n-1) delta)`` from the stationary Gaussian MCAR law."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    n = int(n)
    mcar.require_causal(model)
    ss = mcar.companion(model)
    F = numkit.matrix_exponential(ss.A_comp * delta)
    Q = numkit.gramian_finite(ss.A_comp, ss.B_sel @ model.Sigma_L @ ss.B_sel.T, delta)
    Gamma = mcar.stationary_state_covariance(model)
    Lq = _factor(Q, "innovation covariance")
    Lg = _factor(Gamma, "stationary covariance")

    rng = np.random.default_rng(seed)
    d = F.shape[0]
    x = Lg @ rng.standard_normal(d)
    eta = rng.standard_normal((n - 1, d)) @ Lq.T
    X = np.empty((n, d))
    X[0] = x
    for j in range(n - 1):
        x = F @ x + eta[j]
        X[j + 1] = x
    return SampledSeries(delta, X[:, :model.k].T.copy(), seed)


def sample_autocovariance(series: SampledSeries, lag: int) -> np.ndarray:
    """``(1/n) sum_j Y(j + lag) Y(j)^T`` (biased normalisation, no demeaning)."""
    n = series.n
    if abs(lag) >= n:
        raise ValueError(f"|lag| must be < n = {n}")
    Y = series.data
    if lag < 0:
        return sample_autocovariance(series, -lag).T
    return Y[:, lag:] @ Y[:, :n - lag].T / n


def write_csv(series: SampledSeries, path) -> None:
    """Write ``t,y1,...,yk`` with one row per grid point to a path or text stream."""
    if hasattr(path, "write"):
        _write_rows(series, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(series, fh)


def _write_rows(series: SampledSeries, fh) -> None:
    w = csv.writer(fh)
    w.writerow(["t"] + [f"y{i + 1}" for i in range(series.k)])
    for t, row in zip(series.times, series.data.T):
        w.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def read_csv(path, delta: float | None = None) -> SampledSeries:
    """Read a series written by :func:`write_csv`.

    ``delta`` defaults to the spacing of the time column, which must be uniform.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "t" or any(h != f"y{i}" for i, h in enumerate(header[1:], 1)):
        raise ValueError(f"{path}: header must be 't,y1,...,yk'")
    try:
        M = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from exc
    if M.ndim != 2 or M.shape[0] < 2 or M.shape[1] != len(header):
        raise ValueError(f"{path}: need at least two rows of {len(header)} columns")
    if delta is None:
        dt = np.diff(M[:, 0])
        delta = float(dt.mean())
        if not delta > 0 or np.abs(dt - delta).max() > 1e-6 * delta:
            raise ValueError(f"{path}: time column is not equidistant")
    return SampledSeries(delta, M[:, 1:].T)
