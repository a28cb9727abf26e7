"""Graph construction from MCAR parameters.

Edge tests compare entries against ``zero_tol * max(1, scale)`` where
``scale`` is the infinity norm of the matrix family being tested.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import mcar, numkit
from .errors import NotCausalError
from .graphs import MixedGraph, UndirectedGraph, augment
from .mcar import MCARModel
from .partialcorr import DEFAULT_ZERO_TOL, SpectralGrid, concentration_edges, default_grid


def _norm(M) -> float:
    M = np.asarray(M)
    return float(np.abs(M).sum(axis=-1).max()) if M.size else 0.0


def _nonzero_pairs(mats, k: int, zero_tol: float, symmetric: bool = True):
    """Unordered pairs (1-based) with a non-negligible entry in any matrix of ``mats``."""
    scale = max([1.0] + [_norm(M) for M in mats])
    tol = zero_tol * scale
    out = set()
    for a, b in itertools.combinations(range(k), 2):
        if any(abs(M[a, b]) > tol or (symmetric and abs(M[b, a]) > tol) for M in mats):
            out.add((a + 1, b + 1))
    return frozenset(out)


def pc_graph(model: MCARModel, method: str = "coeff", zero_tol: float = DEFAULT_ZERO_TOL,
             grid: SpectralGrid | None = None) -> UndirectedGraph:
    """Partial correlation graph of a causal MCAR model.

    ``method="coeff"`` tests the real coefficients of ``g`` as a polynomial in
    ``i lam``; ``method="grid"`` tests ``g(lam)`` on a frequency grid, each
    point relative to ``max(1, ||g(lam)||_inf)``.
    """
    mcar.require_causal(model)
    k = model.k
    if method == "coeff":
        G = mcar.g_coefficients(model).coefficients
        return UndirectedGraph(k, _nonzero_pairs(G, k, zero_tol))
    if method == "grid":
        if grid is None:
            grid = default_grid(model, zero_tol=zero_tol)
        g = mcar.inverse_spectral_density(model, grid.frequencies)
        rel = np.abs(g) / np.maximum(1.0, np.abs(g).sum(axis=-1).max(axis=-1))[:, None, None]
        worst = rel.max(axis=0)
        edges = frozenset((a + 1, b + 1) for a, b in itertools.combinations(range(k), 2)
                          if max(worst[a, b], worst[b, a]) > grid.zero_tol)
        return UndirectedGraph(k, edges)
    raise ValueError(f"unknown method {method!r}; expected 'coeff' or 'grid'")


def ou_edge_matrices(A1, Sigma_L) -> tuple:
    """``(Sigma^{-1}, A^T Sigma^{-1} - Sigma^{-1} A, A^T Sigma^{-1} A)`` for ``A = -A1``."""
    Acomp = -np.asarray(A1, dtype=float)
    Si = np.linalg.inv(np.asarray(Sigma_L, dtype=float))
    return Si, Acomp.T @ Si - Si @ Acomp, Acomp.T @ Si @ Acomp


def ou_edge_test(A1, Sigma_L, a: int, b: int, zero_tol: float = DEFAULT_ZERO_TOL) -> bool:
    """True iff the edge ``a -- b`` is *absent* from the OU partial correlation graph."""
    mats = ou_edge_matrices(A1, Sigma_L)
    tol = zero_tol * max([1.0] + [_norm(M) for M in mats])
    i, j = a - 1, b - 1
    return all(abs(M[i, j]) <= tol for M in mats)


def local_causality_graph(model: MCARModel, zero_tol: float = DEFAULT_ZERO_TOL) -> MixedGraph:
    """``a -> b`` iff some ``[A_j]_{ba} != 0``; ``a -- b`` (dashed) iff ``[Sigma_L]_{ab} != 0``."""
    k = model.k
    tol_A = zero_tol * max([1.0] + [_norm(A) for A in model.A])
    directed = frozenset(
        (a + 1, b + 1) for a in range(k) for b in range(k)
        if a != b and any(abs(A[b, a]) > tol_A for A in model.A)
    )
    dashed = _nonzero_pairs([model.Sigma_L], k, zero_tol, symmetric=False)
    return MixedGraph(k, directed, dashed)


def ou_causality_graph(A1, zero_tol: float = DEFAULT_ZERO_TOL) -> MixedGraph:
    """Causality graph of an OU process with ``Sigma_L = I``.

    ``a -> b`` iff ``[A^alpha]_{ba} != 0`` for some ``alpha = 1..k-1``;
    ``a -- b`` iff ``[A^alpha (A^T)^beta]_{ab} != 0`` for some ``alpha, beta = 0..k-1``.
    """
    Acomp = -np.asarray(A1, dtype=float)
    k = Acomp.shape[0]
    powers = [np.eye(k)]
    for _ in range(1, k):
        powers.append(powers[-1] @ Acomp)
    dir_mats = powers[1:]
    tol_d = zero_tol * max([1.0] + [_norm(M) for M in dir_mats])
    directed = frozenset(
        (a + 1, b + 1) for a in range(k) for b in range(k)
        if a != b and any(abs(M[b, a]) > tol_d for M in dir_mats)
    )
    dash_mats = [Pa @ Pb.T for Pa in powers for Pb in powers]
    dashed = _nonzero_pairs(dash_mats, k, zero_tol, symmetric=False)
    return MixedGraph(k, directed, dashed)


def synthesize_model(G: UndirectedGraph, p: int) -> MCARModel:
    """MCAR(p) model whose partial correlation graph is ``G``.

    ``Sigma_L^{-1}`` has ``k`` on the diagonal and 1 on the edges of ``G``;
    ``A_m = binom(p, m) I``, so every companion eigenvalue equals -1.
    """
    if p < 1:
        raise ValueError("order p must be >= 1")
    k = G.n
    K = k * np.eye(k)
    for a, b in G.edges:
        K[a - 1, b - 1] = K[b - 1, a - 1] = 1.0
    S = np.linalg.inv(K)
    S = 0.5 * (S + S.T)
    A = tuple(comb(p, m) * np.eye(k) for m in range(1, p + 1))
    return MCARModel(A, S)


@dataclass
class SubsetReport:
    E_CO: UndirectedGraph
    E_PC: UndirectedGraph
    E_GC0a: UndirectedGraph
    E_GCa: UndirectedGraph | None = None
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        def edges(G):
            return None if G is None else [list(e) for e in G.sorted_edges()]
        return {
            "ok": self.ok,
            "E_CO": edges(self.E_CO),
            "E_PC": edges(self.E_PC),
            "E_GC0_augmented": edges(self.E_GC0a),
            "E_GC_augmented": edges(self.E_GCa),
            "violations": [{"relation": r, "edge": list(e)} for r, e in self.violations],
        }


def _is_identity(M) -> bool:
    return np.array_equal(np.asarray(M), np.eye(np.asarray(M).shape[0]))


def subset_checks(model: MCARModel, zero_tol: float = DEFAULT_ZERO_TOL) -> SubsetReport:
    """Check ``E_CO <= E_PC <= E_GC^{0,a}`` and, for OU with identity noise, ``E_PC <= E_GC^a``."""
    E_CO = concentration_edges(model.Sigma_L, zero_tol)
    E_PC = pc_graph(model, "coeff", zero_tol)
    E_GC0a = augment(local_causality_graph(model, zero_tol))
    E_GCa = None
    if model.p == 1 and _is_identity(model.Sigma_L):
        E_GCa = augment(ou_causality_graph(model.A[0], zero_tol))
    rep = SubsetReport(E_CO, E_PC, E_GC0a, E_GCa)
    for e in sorted(E_CO.edges - E_PC.edges):
        rep.violations.append(("E_CO<=E_PC", e))
    for e in sorted(E_PC.edges - E_GC0a.edges):
        rep.violations.append(("E_PC<=E_GC0a", e))
    if E_GCa is not None:
        for e in sorted(E_PC.edges - E_GCa.edges):
            rep.violations.append(("E_PC<=E_GCa", e))
    return rep


def sampled_var1_matrices(A1, Sigma_L, delta: float) -> tuple:
    """The three matrices whose ``(a, b)`` entries define edges of the sampled VAR(1) graph.

    Returns ``(S^{-1} + F^T S^{-1} F, S^{-1} F, F^T S^{-1})`` with
    ``F = e^{A delta}``, ``S = int_0^delta e^{Au} Sigma_L e^{A^T u} du``, ``A = -A1``.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    Acomp = -np.asarray(A1, dtype=float)
    if not numkit.is_stable(Acomp):
        raise NotCausalError("OU state matrix is not stable")
    S = numkit.gramian_finite(Acomp, np.asarray(Sigma_L, dtype=float), delta)
    Si = np.linalg.inv(S)
    F = numkit.matrix_exponential(Acomp * delta)
    return Si + F.T @ Si @ F, Si @ F, F.T @ Si


def sampled_var1_pc_graph(A1, Sigma_L, delta: float,
                          zero_tol: float = DEFAULT_ZERO_TOL) -> UndirectedGraph:
    mats = sampled_var1_matrices(A1, Sigma_L, delta)
    return UndirectedGraph(np.asarray(A1).shape[0],
                           _nonzero_pairs(mats, np.asarray(A1).shape[0], zero_tol))
