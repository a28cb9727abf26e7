"""Shared fixtures: paper examples and random model / graph generators."""
from __future__ import annotations

import itertools
from math import comb

import numpy as np

from pcgraph import MCARModel, MixedGraph, UndirectedGraph, check_causal

#: one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


# state matrices (A = -A_1) of the worked examples, all with Sigma_L = I
EX58 = np.array([[-2, 0, 1, 1],
                 [0, -2, -1, -1],
                 [-1, -1, -2, -1],
                 [1, -1, -1, -2]], dtype=float)
EX59A = np.array([[-3, 1, 1],
                  [1, -3, 1],
                  [6, 1, -8]], dtype=float)
EX59B = np.array([[-1, 0, 0],
                  [0, -1, 0],
                  [1, 1, -2]], dtype=float)
FIG1 = frozenset({(1, 3), (1, 4), (2, 3), (2, 4), (3, 4)})
G58_AT_0 = np.array([[6, 0, -1, -3],
                     [0, 6, 5, 5],
                     [-1, 5, 7, 6],
                     [-3, 5, 6, 7]], dtype=float)


def ex58() -> MCARModel:
    return MCARModel.ornstein_uhlenbeck(EX58)


def ex59a() -> MCARModel:
    return MCARModel.ornstein_uhlenbeck(EX59A)


def ex59b() -> MCARModel:
    return MCARModel.ornstein_uhlenbeck(EX59B)


def g58(lam: float) -> np.ndarray:
    """Inverse spectral density of Example 5.8 written out by hand."""
    l2 = lam * lam
    return 2 * np.pi * np.array([
        [l2 + 6, 0, 2j * lam - 1, -3],
        [0, l2 + 6, 5, 5],
        [-2j * lam - 1, 5, l2 + 7, 6],
        [-3, 5, 6, l2 + 7],
    ])


def random_sigma(rng, k: int) -> np.ndarray:
    """Identity, diagonal, sparse covariance or sparse precision; always PD."""
    kind = rng.integers(4)
    if kind == 0:
        return np.eye(k)
    if kind == 1:
        return np.diag(rng.uniform(0.5, 2.0, k))
    M = np.zeros((k, k))
    for a, b in itertools.combinations(range(k), 2):
        if rng.random() < 0.4:
            M[a, b] = M[b, a] = rng.uniform(-1, 1)
    M += np.diag(np.abs(M).sum(axis=1) + rng.uniform(0.5, 1.5, k))
    return M if kind == 2 else np.linalg.inv(M)


def random_causal_model(rng, k: int | None = None, p: int | None = None,
                        density: float = 0.4, sigma: np.ndarray | None = None) -> MCARModel:
    """Sparse random causal MCAR model.

    Starts from the polynomial ``(z + c)^p I`` (all roots at ``-c``) and adds
    sparse perturbations, rejecting non-causal draws.
    """
    k = int(rng.integers(1, 5)) if k is None else k
    p = int(rng.integers(1, 4)) if p is None else p
    while True:
        c = rng.uniform(0.7, 2.0)
        A = []
        for j in range(1, p + 1):
            mask = rng.random((k, k)) < density
            pert = rng.normal(scale=0.6 * c ** j, size=(k, k)) * mask
            A.append(comb(p, j) * c ** j * np.eye(k) + pert)
        S = random_sigma(rng, k) if sigma is None else sigma
        model = MCARModel(tuple(A), S)
        if check_causal(model).is_causal and check_causal(model).eigenvalues.real.max() < -0.05:
            return model


def random_ou_state(rng, k: int, density: float = 0.4) -> np.ndarray:
    """Sparse stable state matrix for an OU model."""
    while True:
        mask = rng.random((k, k)) < density
        A = rng.normal(size=(k, k)) * mask - np.diag(rng.uniform(1.0, 3.0, k))
        if np.linalg.eigvals(A).real.max() < -0.05:
            return A


def random_graph(rng, k: int, density: float | None = None) -> UndirectedGraph:
    d = rng.random() if density is None else density
    return UndirectedGraph(k, frozenset(e for e in itertools.combinations(range(1, k + 1), 2)
                                        if rng.random() < d))


def all_graphs(k: int):
    pairs = list(itertools.combinations(range(1, k + 1), 2))
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        yield UndirectedGraph(k, frozenset(e for e, b in zip(pairs, bits) if b))


def random_mixed_graph(rng, k: int, pd: float | None = None, pu: float | None = None) -> MixedGraph:
    pd = rng.uniform(0, 0.5) if pd is None else pd
    pu = rng.uniform(0, 0.4) if pu is None else pu
    directed = frozenset((a, b) for a in range(1, k + 1) for b in range(1, k + 1)
                         if a != b and rng.random() < pd)
    dashed = frozenset(e for e in itertools.combinations(range(1, k + 1), 2) if rng.random() < pu)
    return MixedGraph(k, directed, dashed)


def rel_err(X, Y) -> float:
    X, Y = np.asarray(X), np.asarray(Y)
    return float(np.abs(X - Y).max() / max(1.0, np.abs(Y).max()))
