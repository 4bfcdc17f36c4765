"""Matrix-free Google matrix, PageRank/CheiRank power iteration and rank orderings.

The Google matrix ``G = alpha*S + (1-alpha)/N`` is dense because of the
teleportation term, so it is only ever applied to vectors. One product
costs one sparse matvec over the link structure plus two scalar
reductions (dangling mass and total mass).
"""
from __future__ import annotations

import logging
import math
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .graph import DirectedGraph, transpose

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.85
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 1000


class ConvergenceError(RuntimeError):
    """An iterative solver hit ``max_iter`` before reaching ``tol``."""

    def __init__(self, what: str, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"{what} did not converge after {iterations} iterations "
                         f"(last residual {residual:.3e})")


def _sum(x: np.ndarray, deterministic: bool) -> float:
    # fsum is exactly rounded, hence independent of summation order
    return math.fsum(x) if deterministic else float(x.sum())


class GoogleOperator:
    """Action of the Google matrix of ``graph`` on vectors.

    Parameters
    ----------
    graph : DirectedGraph
    alpha : float
        Damping factor in (0, 1).
    direction : {"forward", "transposed"}
        ``"transposed"`` builds the operator of the link-reversed network
        (the CheiRank matrix ``G*``).
    deterministic : bool
        Compute the scalar reductions with an exactly rounded sum.
    """

    def __init__(self, graph: DirectedGraph, alpha: float = DEFAULT_ALPHA,
                 direction: str = "forward", deterministic: bool = True):
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        if direction not in ("forward", "transposed"):
            raise ValueError(f"unknown direction {direction!r}")
        self.source_graph = graph
        self.graph = graph if direction == "forward" else transpose(graph)
        self.alpha = float(alpha)
        self.direction = direction
        self.deterministic = deterministic
        self.n = self.graph.n_nodes

    @cached_property
    def _inv_out_degree(self) -> np.ndarray:
        deg = self.graph.out_degree
        inv = np.zeros(self.n)
        np.divide(1.0, deg, out=inv, where=deg > 0)
        return inv

    @cached_property
    def _dangling_idx(self) -> np.ndarray:
        return np.flatnonzero(self.graph.dangling_mask)

    @cached_property
    def _in_links(self) -> "PatternMatvec":
        return PatternMatvec(self.graph.t_indptr, self.graph.t_indices, self.n)

    @cached_property
    def _out_links(self) -> "PatternMatvec":
        return PatternMatvec(self.graph.indptr, self.graph.indices, self.n)

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError(f"expected vector of length {self.n}, got shape {x.shape}")
        return x

    def apply(self, x) -> np.ndarray:
        """``G @ x``."""
        x = self._check(x)
        y = self._in_links(x * self._inv_out_degree)
        y *= self.alpha
        dangling = _sum(x[self._dangling_idx], self.deterministic)
        total = _sum(x, self.deterministic)
        y += (self.alpha * dangling + (1.0 - self.alpha) * total) / self.n
        return y

    __matmul__ = apply

    def apply_transpose(self, y) -> np.ndarray:
        """``G.T @ y``, used to extract rows of ``G``."""
        y = self._check(y)
        x = self._out_links(y)
        x *= self._inv_out_degree
        x *= self.alpha
        total = _sum(y, self.deterministic)
        x[self._dangling_idx] = self.alpha * total / self.n
        x += (1.0 - self.alpha) * total / self.n
        return x

    def column(self, j: int) -> np.ndarray:
        """Column ``j`` of ``G``, i.e. the transition probabilities out of node ``j``."""
        e = np.zeros(self.n)
        e[self._node(j)] = 1.0
        return self.apply(e)

    def row(self, i: int) -> np.ndarray:
        e = np.zeros(self.n)
        e[self._node(i)] = 1.0
        return self.apply_transpose(e)

    def _node(self, i) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range [0, {self.n})")
        return i

    def element(self, i: int, j: int) -> float:
        """Single matrix element ``G[i, j]``."""
        i, j = self._node(i), self._node(j)
        g = self.graph
        base = (1.0 - self.alpha) / self.n
        if g.dangling_mask[j]:
            return base + self.alpha / self.n
        linked = i in g.out_neighbors(j)
        return base + (self.alpha / g.out_degree[j] if linked else 0.0)


class PatternMatvec:
    """``A @ z`` for a binary CSR pattern without storing edge weights.

    Rows are processed in blocks of about ``chunk`` edges that share one
    preallocated buffer of ones, so resident memory is the index arrays
    alone.
    """

    def __init__(self, indptr: np.ndarray, indices: np.ndarray, n_cols: int,
                 chunk: int = 1 << 20):
        self.indptr = indptr
        self.indices = indices
        self.n_rows = indptr.size - 1
        self.n_cols = n_cols
        nnz = int(indptr[-1])
        cuts = np.searchsorted(indptr, np.arange(chunk, nnz, chunk), side="right") - 1
        self.bounds = np.unique(np.concatenate([[0], cuts, [self.n_rows]])).tolist()
        widest = max((int(indptr[b] - indptr[a]) for a, b in zip(self.bounds, self.bounds[1:])),
                     default=0)
        self._ones = np.ones(widest)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        y = np.empty(self.n_rows)
        ptr = self.indptr
        for a, b in zip(self.bounds, self.bounds[1:]):
            e0, e1 = int(ptr[a]), int(ptr[b])
            block = sp.csr_matrix((self._ones[:e1 - e0], self.indices[e0:e1], ptr[a:b + 1] - e0),
                                  shape=(b - a, self.n_cols), copy=False)
            y[a:b] = block @ z
        return y


def power_iteration(op: GoogleOperator, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER, start=None,
                    history: list | None = None) -> np.ndarray:
    """Leading right eigenvector of ``op`` normalized to unit sum.

    Stops once the L1 residual ``||G p - p||_1`` is at most ``tol`` and
    returns the last product ``G p``. Residuals are appended to
    ``history`` when given.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = op.n
    p = np.full(n, 1.0 / n) if start is None else np.array(start, dtype=np.float64)
    residual = math.inf
    for it in range(1, max_iter + 1):
        q = op.apply(p)
        q /= _sum(q, op.deterministic)
        residual = float(np.abs(q - p).sum())
        if history is not None:
            history.append(residual)
        p = q
        if residual <= tol:
            logger.info("power iteration converged in %d steps (residual %.2e)", it, residual)
            return p
    raise ConvergenceError("PageRank", max_iter, residual)


def pagerank(op: GoogleOperator, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> np.ndarray:
    """PageRank vector ``P`` with ``G P = P``, ``sum(P) = 1``, from a uniform start."""
    return power_iteration(op, tol=tol, max_iter=max_iter)


def cheirank(g: DirectedGraph, alpha: float = DEFAULT_ALPHA, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER, deterministic: bool = True) -> np.ndarray:
    """PageRank of the network with all links inverted."""
    op = GoogleOperator(g, alpha, direction="transposed", deterministic=deterministic)
    return power_iteration(op, tol=tol, max_iter=max_iter)


def rank_order(v, by_magnitude: bool = False) -> np.ndarray:
    """Node ids sorted by decreasing ``v`` (or ``|v|``); ties by ascending id."""
    v = np.asarray(v, dtype=np.float64)
    key = np.abs(v) if by_magnitude else v
    return np.argsort(-key, kind="stable")


def rank_positions(order: np.ndarray) -> np.ndarray:
    """Inverse permutation: 1-based rank of every node given an ordering."""
    pos = np.empty(order.size, dtype=np.int64)
    pos[order] = np.arange(1, order.size + 1)
    return pos
