"""Frequency-domain oracle for the partial correlation relation.

``A _||_ B | C`` holds iff ``[f_{SS}(lam)^{-1}]_{AB} = 0`` for almost all
``lam``, with ``S = A u B u C``.  "Almost all" is decided on a finite
:class:`SpectralGrid` with a relative zero tolerance.

Vertex labels are 1-based throughout.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import mcar, numkit
from .errors import SingularMatrixError
from .graphs import UndirectedGraph
from .mcar import MCARModel

DEFAULT_ZERO_TOL = 1e-8
DEFAULT_GRID_POINTS = 129


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    frequencies: np.ndarray
    zero_tol: float = DEFAULT_ZERO_TOL

    def __post_init__(self):
        fr = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        if fr.ndim != 1 or fr.size == 0:
            raise ValueError("grid needs at least one frequency")
        if fr.size > 1 and np.any(np.diff(fr) <= 0):
            raise ValueError("grid frequencies must be strictly increasing")
        if not self.zero_tol > 0:
            raise ValueError("zero_tol must be positive")
        fr.setflags(write=False)
        object.__setattr__(self, "frequencies", fr)

    def __len__(self):
        return self.frequencies.size


def chebyshev_grid(lambda_max: float, n_points: int = DEFAULT_GRID_POINTS,
                   zero_tol: float = DEFAULT_ZERO_TOL) -> SpectralGrid:
    """Chebyshev-Lobatto points on ``[0, lambda_max]`` (both endpoints included)."""
    if n_points < 2:
        return SpectralGrid(np.array([0.0]), zero_tol)
    x = np.cos(np.pi * np.arange(n_points)[::-1] / (n_points - 1))
    return SpectralGrid(0.5 * lambda_max * (x + 1.0), zero_tol)


def default_grid(model: MCARModel, n_points: int = DEFAULT_GRID_POINTS,
                 zero_tol: float = DEFAULT_ZERO_TOL, lambda_max: float | None = None) -> SpectralGrid:
    """Grid on ``[0, 10 (1 + |spectral abscissa|)]``; ``f(-lam) = conj f(lam)`` covers negatives."""
    if lambda_max is None:
        lambda_max = 10.0 * (1.0 + mcar.abscissa_magnitude(model))
    return chebyshev_grid(lambda_max, n_points, zero_tol)


@dataclass(frozen=True)
class IndexSets:
    A: frozenset
    B: frozenset
    C: frozenset = frozenset()

    def __post_init__(self):
        A, B, C = (frozenset(int(v) for v in s) for s in (self.A, self.B, self.C))
        if not A or not B:
            raise ValueError("A and B must be non-empty")
        if A & B or A & C or B & C:
            raise ValueError("A, B, C must be pairwise disjoint")
        if min(A | B | C) < 1:
            raise ValueError("vertices are 1-based")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)


def _idx(S: Iterable[int]) -> list[int]:
    return [v - 1 for v in sorted(S)]


def _value(f, lam) -> np.ndarray:
    return np.asarray(f(lam) if callable(f) else f)


def density_values(model_or_f, frequencies) -> np.ndarray:
    """Stack ``(len(frequencies), k, k)`` of spectral density values.

    Accepts an :class:`MCARModel`, a callable ``lam -> k x k`` matrix, or an
    already evaluated stack.
    """
    fr = np.asarray(frequencies, dtype=float)
    if isinstance(model_or_f, MCARModel):
        return mcar.spectral_density(model_or_f, fr)
    if callable(model_or_f):
        return np.stack([np.asarray(model_or_f(l)) for l in fr])
    vals = np.asarray(model_or_f)
    if vals.ndim != 3 or vals.shape[0] != fr.size:
        raise ValueError("precomputed density must have shape (len(grid), k, k)")
    return vals


# ----------------------------------------------------------------- pointwise

def residual_cross_density(f, sets: IndexSets, lam=None) -> np.ndarray:
    """Cross-density of the residuals of ``Y_A`` and ``Y_B`` after projecting on ``Y_C``."""
    F = _value(f, lam)
    A, B, C = _idx(sets.A), _idx(sets.B), _idx(sets.C)
    fAB = numkit.block(F, A, B)
    if not C:
        return fAB
    gCC = numkit.hermitian_inverse(numkit.block(F, C, C))
    return fAB - numkit.block(F, A, C) @ gCC @ numkit.block(F, C, B)


def _inv_sqrt(M: np.ndarray) -> np.ndarray | None:
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    if w.min() <= max(w.max(), 0.0) * 1e-14 or w.max() <= 0:
        return None
    return (V / np.sqrt(w)) @ V.conj().T


def spectral_coherence(f, A, B, lam=None) -> np.ndarray:
    """``f_AA^{-1/2} f_AB f_BB^{-1/2}``; zero when a diagonal block is singular."""
    F = _value(f, lam)
    A, B = _idx(A), _idx(B)
    ra = _inv_sqrt(numkit.block(F, A, A))
    rb = _inv_sqrt(numkit.block(F, B, B))
    if ra is None or rb is None:
        return np.zeros((len(A), len(B)), dtype=complex)
    return ra @ numkit.block(F, A, B) @ rb


def partial_coherence_pair(g, a: int, b: int) -> complex:
    """``-g_ab / sqrt(g_aa g_bb)`` from an inverse spectral density value."""
    g = np.asarray(g)
    gaa, gbb = g[a - 1, a - 1].real, g[b - 1, b - 1].real
    if gaa <= 0 or gbb <= 0:
        raise ValueError("inverse spectral density must have positive diagonal")
    return complex(-g[a - 1, b - 1] / np.sqrt(gaa * gbb))


def remove_confounder(g_V, C, lam=None) -> np.ndarray:
    """Inverse density of ``Y_{V \\ C}`` from the inverse density of ``Y_V``.

    Rows and columns of the result follow the original order of ``V \\ C``.
    """
    G = _value(g_V, lam)
    k = G.shape[-1]
    Ci = _idx(C)
    keep = [i for i in range(k) if i not in set(Ci)]
    gKK = numkit.block(G, keep, keep)
    if not Ci:
        return gKK
    gCC_inv = numkit.hermitian_inverse(numkit.block(G, Ci, Ci))
    return gKK - numkit.block(G, keep, Ci) @ gCC_inv @ numkit.block(G, Ci, keep)


# -------------------------------------------------------------- grid oracle

class PartialCorrelationOracle:
    """Memoised decision procedure for ``A _||_ B | C`` on a grid.

    The spectral density is evaluated once on the grid; each query inverts
    the ``(A u B u C)`` principal blocks for all grid points at once.
    """

    def __init__(self, model_or_f, grid: SpectralGrid):
        self.grid = grid
        self.f = density_values(model_or_f, grid.frequencies)
        self.k = self.f.shape[-1]
        self._cache: dict = {}

    def measure(self, A, B, C=()) -> float:
        """``max_lam ||[f_SS^{-1}]_AB||_max / max(1, ||f_SS^{-1}||_inf)``."""
        sets = IndexSets(frozenset(A), frozenset(B), frozenset(C))
        key = (sets.A, sets.B, sets.C)
        if key in self._cache:
            return self._cache[key]
        if max(sets.A | sets.B | sets.C) > self.k:
            raise ValueError("vertex out of range")
        S = sorted(sets.A | sets.B | sets.C)
        pos = {v: i for i, v in enumerate(S)}
        gS = numkit.hermitian_inverse(numkit.block(self.f, _idx(S), _idx(S)))
        ia = [pos[v] for v in sorted(sets.A)]
        ib = [pos[v] for v in sorted(sets.B)]
        blockAB = np.abs(numkit.block(gS, ia, ib)).max(axis=(-2, -1))
        scale = np.maximum(1.0, np.abs(gS).sum(axis=-1).max(axis=-1))
        val = float((blockAB / scale).max())
        self._cache[key] = val
        # symmetric relation: the measure of (B, A, C) is identical
        self._cache[(sets.B, sets.A, sets.C)] = val
        return val

    def __call__(self, A, B, C=()) -> bool:
        return self.measure(A, B, C) <= self.grid.zero_tol


def is_partially_uncorrelated(model_or_f, sets: IndexSets, grid: SpectralGrid) -> bool:
    return PartialCorrelationOracle(model_or_f, grid)(sets.A, sets.B, sets.C)


def concentration_edges(Sigma, zero_tol: float = DEFAULT_ZERO_TOL) -> UndirectedGraph:
    """Concentration graph: ``a -- b`` iff ``|[Sigma^{-1}]_ab| > zero_tol * max(1, ||Sigma^{-1}||_inf)``."""
    Sigma = np.asarray(Sigma, dtype=float)
    if not numkit.is_positive_definite(Sigma):
        raise SingularMatrixError("Sigma must be positive definite")
    K = np.linalg.inv(Sigma)
    tol = zero_tol * max(1.0, np.abs(K).sum(axis=1).max())
    k = K.shape[0]
    edges = frozenset((a + 1, b + 1) for a, b in itertools.combinations(range(k), 2)
                      if abs(K[a, b]) > tol)
    return UndirectedGraph(k, edges)


# ----------------------------------------------------------------- graphoid

GRAPHOID_PROPERTIES = ("P1", "P2", "P3", "P4", "P5")


@dataclass
class GraphoidReport:
    checks: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        return [c for c in self.checks if c["antecedent"] and not c["consequent"]]

    @property
    def ok(self) -> bool:
        return not self.violations

    def merge(self, other: "GraphoidReport") -> "GraphoidReport":
        self.checks.extend(other.checks)
        return self

    def summary(self) -> dict:
        out = {}
        for prop in GRAPHOID_PROPERTIES:
            rows = [c for c in self.checks if c["property"] == prop]
            out[prop] = {
                "checked": len(rows),
                "antecedent_true": sum(c["antecedent"] for c in rows),
                "violations": sum(c["antecedent"] and not c["consequent"] for c in rows),
            }
        return out

    def to_json(self) -> dict:
        return {"ok": self.ok, "summary": self.summary(),
                "violations": [{**c, "sets": {k: sorted(v) for k, v in c["sets"].items()}}
                               for c in self.violations]}


def graphoid_report(model_or_oracle, A, B, C, D=(), grid: SpectralGrid | None = None) -> GraphoidReport:
    """Evaluate the implications (P1)-(P5) for one disjoint partition.

    (P1) I(A,B|D) => I(B,A|D)
    (P2) I(A,BuC|D) => I(A,B|D)
    (P3) I(A,BuC|D) => I(A,B|CuD)
    (P4) I(A,B|D) and I(A,C|BuD) => I(A,BuC|D)
    (P5) I(A,B|CuD) and I(A,C|BuD) => I(A,BuC|D)
    """
    if isinstance(model_or_oracle, PartialCorrelationOracle):
        I = model_or_oracle
    else:
        if grid is None:
            grid = default_grid(model_or_oracle)
        I = PartialCorrelationOracle(model_or_oracle, grid)
    A, B, C, D = (frozenset(s) for s in (A, B, C, D))
    if not A or not B or not C:
        raise ValueError("A, B, C must be non-empty")
    if len(A | B | C | D) != len(A) + len(B) + len(C) + len(D):
        raise ValueError("A, B, C, D must be pairwise disjoint")
    sets = {"A": A, "B": B, "C": C, "D": D}
    BC, CD, BD = B | C, C | D, B | D
    rows = [
        ("P1", I(A, B, D), I(B, A, D)),
        ("P2", I(A, BC, D), I(A, B, D)),
        ("P3", I(A, BC, D), I(A, B, CD)),
        ("P4", I(A, B, D) and I(A, C, BD), I(A, BC, D)),
        ("P5", I(A, B, CD) and I(A, C, BD), I(A, BC, D)),
    ]
    return GraphoidReport([{"property": p, "sets": sets, "antecedent": bool(ante),
                            "consequent": bool(cons)} for p, ante, cons in rows])


def disjoint_partitions(k: int):
    """All (A, B, C, D) of disjoint subsets of {1..k} with A, B, C non-empty."""
    verts = range(1, k + 1)
    for labels in itertools.product(range(5), repeat=k):
        parts = [frozenset(v for v, l in zip(verts, labels) if l == j) for j in range(1, 5)]
        if parts[0] and parts[1] and parts[2]:
            yield tuple(parts)


def graphoid_sweep(model_or_f, grid: SpectralGrid, max_partitions: int | None = None,
                   rng: np.random.Generator | None = None) -> GraphoidReport:
    """Graphoid checks over all disjoint partitions, or a random subset of them."""
    I = PartialCorrelationOracle(model_or_f, grid)
    parts = list(disjoint_partitions(I.k))
    if max_partitions is not None and len(parts) > max_partitions:
        rng = np.random.default_rng() if rng is None else rng
        sel = rng.choice(len(parts), size=max_partitions, replace=False)
        parts = [parts[i] for i in sorted(sel)]
    rep = GraphoidReport()
    for A, B, C, D in parts:
        rep.merge(graphoid_report(I, A, B, C, D))
    return rep

