"""Nonparametric spectral estimation and partial correlation graph recovery.

Discrete frequencies ``omega`` live in ``[-pi, pi]``; the continuous-time
frequency is ``lam = omega / delta``, and ``delta * f_delta(lam * delta)``
approximates ``f(lam)`` for small ``delta``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from . import mcar, numkit
from .errors import EstimationError, NumericalError, SingularMatrixError
from .graphs import UndirectedGraph
from .mcar import MCARModel
from .simulate import SampledSeries

DEFAULT_TAU = 0.1
DEFAULT_LAMBDA_MAX = 5.0
DEFAULT_GRID_POINTS = 11
FOLD_TAIL_TOL = 1e-10
FOLD_MAX_TERMS = 1 << 24


def default_bandwidth(n: int) -> int:
    """Daniell half-width ``m = ceil(n**0.6 / 2)``."""
    return int(math.ceil(n ** 0.6 / 2))


def default_truncation(n: int) -> int:
    """Lag-window truncation matching the default Daniell bandwidth, ``ceil(n / (2m + 1))``."""
    return int(math.ceil(n / (2 * default_bandwidth(n) + 1)))


def _check_omega(omega: float) -> float:
    omega = float(omega)
    if abs(omega) > np.pi * (1 + 1e-12):
        raise ValueError(f"discrete frequency {omega} outside [-pi, pi]")
    return omega


# --------------------------------------------------------------- periodogram

def periodogram(series: SampledSeries, omega: float) -> np.ndarray:
    """``I(omega) = (2 pi n)^{-1} d(omega) d(omega)^H``, ``d(omega) = sum_j Y_j e^{-i omega j}``."""
    omega = _check_omega(omega)
    n = series.n
    d = series.data @ np.exp(-1j * omega * np.arange(n))
    return np.outer(d, d.conj()) / (2 * np.pi * n)


class _Fourier:
    """DFT of a series at all Fourier frequencies ``2 pi j / n``."""

    def __init__(self, series: SampledSeries):
        self.n = series.n
        self.d = np.fft.fft(series.data, axis=1).T  # (n, k)

    def index(self, omega: float) -> int:
        return int(round(omega * self.n / (2 * np.pi)))

    def smoothed(self, omega: float, m: int) -> np.ndarray:
        j0 = self.index(omega)
        D = self.d[(j0 + np.arange(-m, m + 1)) % self.n]
        return D.T @ D.conj() / (2 * np.pi * self.n * (2 * m + 1))


def smoothed_periodogram(series: SampledSeries, omega: float, m: int) -> np.ndarray:
    """Daniell estimate: mean of the periodogram over the ``2m + 1`` Fourier frequencies nearest ``omega``."""
    omega = _check_omega(omega)
    if m < 0 or 2 * m + 1 > series.n:
        raise ValueError(f"bandwidth m={m} requires 2m+1 <= n={series.n}")
    return _Fourier(series).smoothed(omega, m)


# ---------------------------------------------------------------- lag window

def bartlett(u):
    u = np.abs(np.asarray(u, dtype=float))
    return np.where(u <= 1, 1 - u, 0.0)


def parzen(u):
    u = np.abs(np.asarray(u, dtype=float))
    return np.where(u <= 0.5, 1 - 6 * u**2 + 6 * u**3, np.where(u <= 1, 2 * (1 - u) ** 3, 0.0))


WINDOWS = {"bartlett": bartlett, "parzen": parzen}


def sample_autocovariances(series: SampledSeries, max_lag: int) -> np.ndarray:
    """``c_hat(h)`` for ``h = 0..max_lag`` as an array ``(max_lag + 1, k, k)``, via FFT."""
    n, k = series.n, series.k
    if not 0 <= max_lag < n:
        raise ValueError(f"max_lag must be in [0, n) with n={n}")
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    d = np.fft.rfft(series.data, nfft, axis=1)
    r = np.fft.irfft(d[:, None, :] * d[None, :, :].conj(), nfft, axis=2)[:, :, :max_lag + 1]
    return np.moveaxis(r, 2, 0) / n


def lag_window_estimate(series: SampledSeries, omega: float, window: str = "bartlett",
                        truncation: int | None = None) -> np.ndarray:
    """``(2 pi)^{-1} sum_{|h| <= B} w(h / B) c_hat(h) e^{-i omega h}``."""
    omega = _check_omega(omega)
    if window not in WINDOWS:
        raise ValueError(f"unknown window {window!r}; expected one of {sorted(WINDOWS)}")
    B = default_truncation(series.n) if truncation is None else int(truncation)
    if not 0 <= B < series.n:
        raise ValueError(f"truncation B={B} must satisfy 0 <= B < n={series.n}")
    c = sample_autocovariances(series, B)
    return _lag_window_from_acov(c, omega, WINDOWS[window], B)


def _lag_window_from_acov(c: np.ndarray, omega: float, w, B: int) -> np.ndarray:
    if B == 0:
        return c[0].astype(complex) / (2 * np.pi)
    h = np.arange(B + 1)
    wt = w(h / B) * np.exp(-1j * omega * h)
    pos = np.tensordot(wt[1:], c[1:], axes=1)
    # c(-h) = c(h)^T and the weight at -h is conj(weight at h)
    neg = np.tensordot(wt[1:].conj(), np.swapaxes(c[1:], 1, 2), axes=1)
    return (c[0] + pos + neg) / (2 * np.pi)


# ------------------------------------------------------------ sampled process

def rescale_highfreq(value, delta: float, lam: float) -> np.ndarray:
    """``delta * value`` where ``value`` estimates ``f_delta(lam * delta)``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if abs(lam * delta) > np.pi * (1 + 1e-12):
        raise ValueError(f"lambda={lam} lies outside the Nyquist band |lambda| <= pi/delta")
    return delta * np.asarray(value)


def _fold_K(model: MCARModel, delta: float, tol: float, corrected: bool = True) -> int:
    """Number of alias terms per side so the neglected tail is below ``tol``.

    Write ``P(i lam) = (i lam)^p (I + E)`` with ``||E|| <= eta(|lam|)``, where
    ``eta(x) = sum_j ||A_j|| x^{-j}``. When ``eta(x) <= 1/2`` and ``|lam| >= x``,

    * ``||f(lam)|| <= ||Sigma_L|| / (2 pi (1 - eta)^2 lam^{2p})``;
    * ``||f(lam) - Sigma_L / (2 pi lam^{2p})|| <= 8 eta(x) x ||Sigma_L|| / (2 pi |lam|^{2p+1})``.

    The second bound is used when the leading-order tail is added back
    (``corrected``). The alias points with ``|k| > K`` satisfy
    ``|lam_k| >= (2|k| - 1) pi / delta``. The sums over them are bounded by
    midpoint integrals, since the summands are convex in ``k``.
    """
    p = model.p
    norms = [np.linalg.norm(A, 2) for A in model.A]
    s = np.linalg.norm(model.Sigma_L, 2)

    def bound(K: int) -> float:
        x = (2 * K + 1) * np.pi / delta
        eta = sum(nj * x ** (-(j + 1)) for j, nj in enumerate(norms))
        if eta >= 0.5:
            return np.inf
        if corrected:
            tail_sum = (2 * K) ** (-2 * p) / (4 * p)
            return 2 / delta * s * 8 * eta * x / (2 * np.pi) * (delta / np.pi) ** (2 * p + 1) * tail_sum
        tail_sum = (2 * K) ** (1 - 2 * p) / (2 * (2 * p - 1))
        return 2 / delta * s / (2 * np.pi * (1 - eta) ** 2) * (delta / np.pi) ** (2 * p) * tail_sum

    hi = 8
    while not bound(hi) < tol:
        hi *= 2
        if hi > FOLD_MAX_TERMS:
            raise NumericalError(
                f"alias sum needs more than {FOLD_MAX_TERMS} terms per side at delta={delta}; "
                "use sampled_spectral_density instead")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (lo, mid) if bound(mid) < tol else (mid, hi)
    return hi


def folded_density(model: MCARModel, delta: float, omega: float, K: int | None = None,
                   tail_tol: float = FOLD_TAIL_TOL, chunk: int = 1 << 15,
                   tail_correction: bool = True) -> np.ndarray:
    """Spectral density of the sampled process, ``(1/delta) sum_k f((omega + 2 k pi) / delta)``.

    With ``tail_correction`` (the default) the terms ``|k| > K`` are added in
    their leading-order form ``f(lam) ~ Sigma_L / (2 pi lam^{2p})`` through
    the Hurwitz zeta function, leaving a remainder of order ``K^{-2p}``.
    Without it the tail decays like ``K^{1-2p}``, so for ``p = 1`` the number
    of terms grows like ``delta / tail_tol``; sums needing more than
    ``FOLD_MAX_TERMS`` terms per side raise :class:`NumericalError`.
    ``K`` is chosen from a rigorous bound on whichever remainder applies.
    """
    omega = _check_omega(omega)
    if not delta > 0:
        raise ValueError("delta must be positive")
    mcar.require_causal(model)
    if K is None:
        K = _fold_K(model, delta, tail_tol, tail_correction)
    ks = np.arange(-K, K + 1)
    total = np.zeros((model.k, model.k), dtype=complex)
    # sum small terms first for accuracy
    order = np.argsort(-np.abs(ks))
    ks = ks[order]
    for i in range(0, ks.size, chunk):
        lam = (omega + 2 * np.pi * ks[i:i + chunk]) / delta
        total += mcar.spectral_density(model, lam).sum(axis=0)
    if tail_correction:
        p, x = model.p, omega / (2 * np.pi)
        tail = zeta(2 * p, K + 1 + x) + zeta(2 * p, K + 1 - x)
        total += model.Sigma_L * (tail * (delta / (2 * np.pi)) ** (2 * p) / (2 * np.pi))
    total /= delta
    return 0.5 * (total + total.conj().T)


def sampled_spectral_density(model: MCARModel, delta: float, omega: float) -> np.ndarray:
    """Closed form of the sampled density from the autocovariances ``c(h delta)``.

    ``(2 pi)^{-1} C [R Gamma + Gamma R^H - Gamma] C^T`` with
    ``R = (I - e^{A delta} e^{-i omega})^{-1}``.
    """
    omega = _check_omega(omega)
    ss = mcar.companion(model)
    Gamma = mcar.stationary_state_covariance(model)
    F = numkit.matrix_exponential(ss.A_comp * delta)
    R = np.linalg.inv(np.eye(F.shape[0]) - F * np.exp(-1j * omega))
    S = R @ Gamma + Gamma @ R.conj().T - Gamma
    out = ss.C_sel @ S @ ss.C_sel.T / (2 * np.pi)
    return 0.5 * (out + out.conj().T)


# ------------------------------------------------------------ graph recovery

@dataclass
class GraphEstimate:
    graph: UndirectedGraph
    scores: np.ndarray
    tau: float
    frequencies: np.ndarray
    bandwidth: int | None = None
    delta: float | None = None
    n: int | None = None
    estimator: str = "daniell"
    extra: dict = field(default_factory=dict)

    def score(self, a: int, b: int) -> float:
        return float(self.scores[a - 1, b - 1])

    def to_json(self) -> dict:
        k = self.graph.n
        return {
            "edges": [list(e) for e in self.graph.sorted_edges()],
            "scores": {f"{a}-{b}": self.score(a, b) for a, b in itertools.combinations(range(1, k + 1), 2)},
            "tau": self.tau,
            "bandwidth": self.bandwidth,
            "delta": self.delta,
            "n": self.n,
            "estimator": self.estimator,
            "frequencies": [float(x) for x in self.frequencies],
            **self.extra,
        }


def partial_coherence_scores(f_values: np.ndarray) -> np.ndarray:
    """``max_lam |R_ab(lam)|`` with ``R_ab = -g_ab / sqrt(g_aa g_bb)``, ``g = f^{-1}``."""
    try:
        g = numkit.hermitian_inverse(f_values)
    except SingularMatrixError as exc:
        raise EstimationError(
            "estimated spectral density is singular on the grid; increase the bandwidth"
        ) from exc
    diag = np.real(np.diagonal(g, axis1=-2, axis2=-1))
    if np.any(diag <= 0):
        raise EstimationError("estimated inverse density has non-positive diagonal; increase the bandwidth")
    R = np.abs(g) / np.sqrt(diag[..., :, None] * diag[..., None, :])
    S = R.max(axis=0)
    np.fill_diagonal(S, 1.0)
    return S


def graph_from_scores(scores: np.ndarray, tau: float) -> UndirectedGraph:
    k = scores.shape[0]
    return UndirectedGraph(k, frozenset(
        (a + 1, b + 1) for a, b in itertools.combinations(range(k), 2) if scores[a, b] > tau))


def default_frequencies(delta: float, lambda_max: float = DEFAULT_LAMBDA_MAX,
                        n_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, min(lambda_max, np.pi / delta), n_points)


def estimate_pc_graph(series: SampledSeries, frequencies=None, bandwidth: int | None = None,
                      tau: float = DEFAULT_TAU, estimator: str = "daniell",
                      truncation: int | None = None) -> GraphEstimate:
    """Threshold the maximal estimated partial coherence over a grid of continuous frequencies.

    ``frequencies`` are continuous-time ``lam`` values (rad per unit time)
    and must satisfy ``|lam| * delta <= pi``.
    """
    delta, n = series.delta, series.n
    fr = default_frequencies(delta) if frequencies is None else np.atleast_1d(np.asarray(frequencies, float))
    if estimator == "daniell":
        m = default_bandwidth(n) if bandwidth is None else int(bandwidth)
        if m < 0 or 2 * m + 1 > n:
            raise ValueError(f"bandwidth m={m} requires 2m+1 <= n={n}")
        four = _Fourier(series)
        vals = np.stack([rescale_highfreq(four.smoothed(lam * delta, m), delta, lam) for lam in fr])
        extra = {}
    elif estimator in WINDOWS:
        m = None
        B = default_truncation(n) if truncation is None else int(truncation)
        if not 0 <= B < n:
            raise ValueError(f"truncation B={B} must satisfy 0 <= B < n={n}")
        c = sample_autocovariances(series, B)
        vals = np.stack([rescale_highfreq(_lag_window_from_acov(c, lam * delta, WINDOWS[estimator], B),
                                          delta, lam) for lam in fr])
        extra = {"truncation": B}
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    scores = partial_coherence_scores(vals)
    return GraphEstimate(graph_from_scores(scores, tau), scores, tau, fr, m, delta, n, estimator, extra)


def oracle_pc_graph(model: MCARModel, delta: float, frequencies=None,
                    tau: float = DEFAULT_TAU) -> GraphEstimate:
    """Plug-in variant of :func:`estimate_pc_graph` using the exact folded density."""
    fr = default_frequencies(delta) if frequencies is None else np.atleast_1d(np.asarray(frequencies, float))
    vals = np.stack([rescale_highfreq(folded_density(model, delta, lam * delta), delta, lam) for lam in fr])
    scores = partial_coherence_scores(vals)
    return GraphEstimate(graph_from_scores(scores, tau), scores, tau, fr, None, delta, None, "folded")
