"""Dense brute-force reference computations for small networks.

Everything here materializes the full ``N x N`` Google matrix and uses
direct linear algebra, so it shares no code path with the matrix-free
solvers beyond the graph structure itself.
"""
from __future__ import annotations

import numpy as np

from .graph import DirectedGraph

GUARD = 2000


class GuardError(ValueError):
    """Dense computation requested for a network above the size guard."""


def _guard(n: int, guard: int | None) -> None:
    limit = GUARD if guard is None else guard
    if n > limit:
        raise GuardError(f"dense oracle limited to N <= {limit}, got N = {n}")


def dense_google(g: DirectedGraph, alpha: float = 0.85, guard: int | None = None) -> np.ndarray:
    """Explicit ``G[i, j] = alpha * S[i, j] + (1 - alpha) / N``."""
    n = g.n_nodes
    _guard(n, guard)
    A = np.zeros((n, n))
    src, dst = g.edges()
    A[dst, src] = 1.0
    kout = A.sum(axis=0)
    S = np.empty((n, n))
    linked = kout > 0
    S[:, linked] = A[:, linked] / kout[linked]
    S[:, ~linked] = 1.0 / n
    return alpha * S + (1.0 - alpha) / n


def _replaced_row_solve(M: np.ndarray, rhs: np.ndarray, row_value: float) -> np.ndarray:
    M = M.copy()
    rhs = np.array(rhs, dtype=np.float64)
    M[0, :] = 1.0
    rhs[0] = row_value
    return np.linalg.solve(M, rhs)


def dense_pagerank(G: np.ndarray) -> np.ndarray:
    """Solve ``(G - 1) P = 0`` with the first equation replaced by ``sum(P) = 1``."""
    G = np.asarray(G, dtype=np.float64)
    n = G.shape[0]
    return _replaced_row_solve(G - np.eye(n), np.zeros(n), 1.0)


def dense_linear_response(G: np.ndarray, p0, v0) -> np.ndarray:
    """Solve ``(1 - G) P1 = V0`` with the first equation replaced by ``sum(P1) = 0``.

    ``p0`` is accepted for interface symmetry with the iterative solver; the
    replaced-row system does not need it.
    """
    G = np.asarray(G, dtype=np.float64)
    n = G.shape[0]
    return _replaced_row_solve(np.eye(n) - G, v0, 0.0)


def _split(n: int, subset) -> tuple[np.ndarray, np.ndarray]:
    r = np.asarray(subset, dtype=np.int64)
    mask = np.ones(n, dtype=bool)
    mask[r] = False
    return r, np.flatnonzero(mask)


def dense_reduced(G: np.ndarray, subset) -> np.ndarray:
    """Schur complement ``Grr + Grs (1 - Gss)^-1 Gsr`` by direct solve."""
    G = np.asarray(G, dtype=np.float64)
    _guard(G.shape[0], None)
    r, s = _split(G.shape[0], subset)
    if s.size == 0:
        return G[np.ix_(r, r)].copy()
    Gss = G[np.ix_(s, s)]
    X = np.linalg.solve(np.eye(s.size) - Gss, G[np.ix_(s, r)])
    return G[np.ix_(r, r)] + G[np.ix_(r, s)] @ X


def dense_complement_resolvent(G: np.ndarray, subset) -> np.ndarray:
    """``(1 - Gss)^-1 Gsr`` as an ``(N - Nr) x Nr`` array (rows in complement order)."""
    G = np.asarray(G, dtype=np.float64)
    r, s = _split(G.shape[0], subset)
    return np.linalg.solve(np.eye(s.size) - G[np.ix_(s, s)], G[np.ix_(s, r)])


def dense_reduced_components(G: np.ndarray, subset) -> dict[str, np.ndarray | float]:
    """Components from a full eigendecomposition of ``Gss``.

    ``Gpr`` uses the leading eigenpair from ``numpy.linalg.eig``; ``Gqr`` is
    the remainder of the block-inversion ``GR``.
    """
    G = np.asarray(G, dtype=np.float64)
    r, s = _split(G.shape[0], subset)
    Gss = G[np.ix_(s, s)]
    vals, right = np.linalg.eig(Gss)
    k = int(np.argmax(vals.real))
    lam = float(vals[k].real)
    psi_r = np.real(right[:, k])
    lvals, left = np.linalg.eig(Gss.T)
    psi_l = np.real(left[:, int(np.argmax(lvals.real))])
    Pc = np.outer(psi_r, psi_l) / (psi_l @ psi_r)
    GR = dense_reduced(G, subset)
    Grr = G[np.ix_(r, r)]
    Gpr = G[np.ix_(r, s)] @ Pc @ G[np.ix_(s, r)] / (1.0 - lam)
    return {"GR": GR, "Grr": Grr, "Gpr": Gpr, "Gqr": GR - Grr - Gpr, "lambda_c": lam}


def dense_perturbed_google(G: np.ndarray, i: int, j: int, eps: float) -> np.ndarray:
    """Multiply ``G[i, j]`` by ``1 + eps`` and renormalize column ``j``."""
    G = np.array(G, dtype=np.float64)
    _guard(G.shape[0], None)
    g_ij = G[i, j]
    G[i, j] *= 1.0 + eps
    G[:, j] /= 1.0 + eps * g_ij
    return G


def dense_sensitivity_g1(G: np.ndarray, i: int, j: int) -> np.ndarray:
    """First-order term of the element perturbation (nonzero only in column ``j``)."""
    G = np.asarray(G, dtype=np.float64)
    G1 = np.zeros_like(G)
    G1[:, j] = -G[i, j] * G[:, j]
    G1[i, j] += G[i, j]
    return G1
