"""Reduced Google matrix of a node subset and its three-term decomposition.

For a subset ``r`` with complement ``s``::

    GR  = Grr + Grs (1 - Gss)^-1 Gsr
    (1 - Gss)^-1 = Pc / (1 - lambda_c) + sum_k (Qc Gss Qc)^k Qc

where ``lambda_c`` is the leading eigenvalue of ``Gss`` with right/left
eigenvectors ``psi_R``/``psi_L``, ``Pc = psi_R psi_L^T / (psi_L^T psi_R)``
and ``Qc = 1 - Pc``. The first term yields the rank-one ``Gpr``, the
series yields ``Gqr``. ``1 - lambda_c`` is small for small subsets, so the
plain Neumann series for ``(1 - Gss)^-1`` converges far too slowly and the
leading mode is removed analytically instead.

Every product with ``Gss`` is a full Google-operator product with the
subset components zeroed before and after.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .gmatrix import DEFAULT_MAX_ITER, DEFAULT_TOL, ConvergenceError, GoogleOperator, _sum

logger = logging.getLogger(__name__)

DENSE_GUARD = 2000
SERIES_MAX_ITER = 10_000


class SubsetWarning(UserWarning):
    pass


def check_subset(subset, n: int) -> np.ndarray:
    subset = np.asarray(subset, dtype=np.int64).ravel()
    if subset.size == 0:
        raise ValueError("subset is empty")
    if subset.min() < 0 or subset.max() >= n:
        raise IndexError(f"subset contains node ids outside [0, {n})")
    if np.unique(subset).size != subset.size:
        raise ValueError("subset contains duplicate node ids")
    if subset.size > n / 2:
        warnings.warn(f"subset of {subset.size} nodes is more than half of the network",
                      SubsetWarning, stacklevel=3)
    return subset


@dataclass
class ReducedMatrices:
    """Dense ``Nr x Nr`` reduced matrices, axes in subset order."""

    subset: np.ndarray
    GR: np.ndarray
    Grr: np.ndarray
    Gpr: np.ndarray
    Gqr: np.ndarray
    lambda_c: float
    eigen_iterations: int = 0
    series_order: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_r(self) -> int:
        return int(self.subset.size)

    @property
    def weights(self) -> tuple[float, float, float, float]:
        return component_weights(self)


class _Complement:
    """Products with the complement block ``Gss`` embedded in full-length vectors."""

    def __init__(self, op: GoogleOperator, subset: np.ndarray):
        self.op = op
        self.subset = subset
        self.mask = np.ones(op.n, dtype=bool)
        self.mask[subset] = False

    def restrict(self, x: np.ndarray) -> np.ndarray:
        x = x.copy()
        x[self.subset] = 0.0
        return x

    def gss(self, x: np.ndarray) -> np.ndarray:
        return self.restrict(self.op.apply(self.restrict(x)))

    def gss_t(self, y: np.ndarray) -> np.ndarray:
        return self.restrict(self.op.apply_transpose(self.restrict(y)))


def _leading_eigvec(matvec, start: np.ndarray, tol: float, max_iter: int, what: str):
    """Power iteration for a positive leading eigenvector, normalized to unit sum."""
    v = start / start.sum()
    residual = math.inf
    for it in range(1, max_iter + 1):
        w = matvec(v)
        lam = w.sum()
        w /= lam
        residual = float(np.abs(w - v).sum())
        v = w
        if residual <= tol:
            return float(lam), v, it
    raise ConvergenceError(what, max_iter, residual)


def complement_eigenpair(op: GoogleOperator, subset, tol: float = DEFAULT_TOL,
                         max_iter: int = DEFAULT_MAX_ITER):
    """Leading eigenvalue and right/left eigenvectors of ``Gss``.

    Returns ``(lambda_c, psi_r, psi_l, iterations)`` with both vectors of
    full length ``N`` (zero on the subset) and unit sum.
    """
    return _eigenpair(op, check_subset(subset, op.n), tol, max_iter)


def _eigenpair(op: GoogleOperator, subset: np.ndarray, tol: float, max_iter: int):
    comp = _Complement(op, subset)
    start = comp.mask.astype(np.float64)
    lam_r, psi_r, it_r = _leading_eigvec(comp.gss, start, tol, max_iter,
                                         "complement right eigenvector")
    lam_l, psi_l, it_l = _leading_eigvec(comp.gss_t, start, tol, max_iter,
                                         "complement left eigenvector")
    # Rayleigh quotient with both vectors is second-order accurate
    lam = float(psi_l @ comp.gss(psi_r) / (psi_l @ psi_r))
    logger.info("complement eigenvalue %.15f (right %.3e, left %.3e off)",
                lam, lam_r - lam, lam_l - lam)
    return lam, psi_r, psi_l, max(it_r, it_l)


def _deflated_series(comp: _Complement, x0: np.ndarray, project, tol: float,
                     max_iter: int) -> tuple[np.ndarray, int]:
    """``sum_k (Qc Gss Qc)^k x0`` for ``x0`` already in the range of ``Qc``."""
    total = x0.copy()
    term = x0
    prev = float(np.abs(term).sum())
    if prev == 0.0:
        return total, 0
    for k in range(1, max_iter + 1):
        term = project(comp.gss(term))
        size = float(np.abs(term).sum())
        total += term
        ratio = min(size / prev, 0.999) if prev > 0 else 0.0
        # remaining tail is about size * ratio / (1 - ratio)
        if size <= tol * (1.0 - ratio):
            return total, k
        prev = size
    raise ConvergenceError("Gqr series", max_iter, size)


def compute_reduced(op: GoogleOperator, subset, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER, series_max_iter: int = SERIES_MAX_ITER,
                    dense_guard: int = DENSE_GUARD) -> ReducedMatrices:
    """Reduced Google matrix over ``subset`` and its components.

    ``Grr`` is the direct-link block of ``G``, ``Gpr`` the rank-one part
    carried by the leading complement mode and ``Gqr`` everything else
    (indirect pathways; may contain negative entries).
    """
    subset = check_subset(subset, op.n)
    n_r = subset.size
    if n_r == op.n:
        return _full_subset(op, subset, dense_guard)

    comp = _Complement(op, subset)
    lam, psi_r, psi_l, eig_iter = _eigenpair(op, subset, tol, max_iter)
    if not 0.0 < lam < 1.0:
        raise ArithmeticError(f"complement eigenvalue {lam} outside (0, 1)")
    overlap = float(psi_l @ psi_r)

    def project(x):
        return x - (psi_l @ x / overlap) * psi_r

    # rank-one part: Grs psi_R psi_L^T Gsr / ((1 - lambda_c) psi_L^T psi_R)
    u = op.apply(psi_r)[subset]
    w = op.apply_transpose(psi_l)[subset]
    Gpr = np.outer(u, w) / ((1.0 - lam) * overlap)

    Grr = np.empty((n_r, n_r))
    Gqr = np.empty((n_r, n_r))
    order = 0
    for c, node in enumerate(subset):
        col = op.column(node)
        Grr[:, c] = col[subset]
        gsr = comp.restrict(col)
        x, k = _deflated_series(comp, project(gsr), project, tol, series_max_iter)
        order = max(order, k)
        Gqr[:, c] = op.apply(x)[subset]
        logger.debug("subset column %d/%d: series order %d", c + 1, n_r, k)

    GR = Grr + Gpr + Gqr
    meta = {"psi_overlap": overlap}
    return ReducedMatrices(subset, GR, Grr, Gpr, Gqr, lam, eig_iter, order, meta)


def _full_subset(op: GoogleOperator, subset: np.ndarray, dense_guard: int) -> ReducedMatrices:
    if op.n > dense_guard:
        raise ValueError(f"subset covers all {op.n} nodes; dense result exceeds guard {dense_guard}")
    G = np.column_stack([op.column(node) for node in subset])[subset]
    zero = np.zeros_like(G)
    return ReducedMatrices(subset, G.copy(), G, zero, zero.copy(), float("nan"))


def component_weights(R: ReducedMatrices) -> tuple[float, float, float, float]:
    """``(WR, Wrr, Wpr, Wqr)``: sum of all elements divided by ``Nr``."""
    n = R.n_r
    return tuple(math.fsum(M.ravel()) / n for M in (R.GR, R.Grr, R.Gpr, R.Gqr))


def qr_nondiagonal(R: ReducedMatrices) -> tuple[np.ndarray, np.ndarray, float]:
    """``Gqr`` with zeroed diagonal, ``Grr + Gqr_nd`` and the weight of the latter."""
    nd = R.Gqr.copy()
    np.fill_diagonal(nd, 0.0)
    combined = R.Grr + nd
    return nd, combined, math.fsum(combined.ravel()) / R.n_r


def reduced_pagerank(R: ReducedMatrices | np.ndarray, tol: float = DEFAULT_TOL,
                     max_iter: int = 100_000) -> np.ndarray:
    """Leading eigenvector of the dense reduced matrix by power iteration."""
    GR = R.GR if isinstance(R, ReducedMatrices) else np.asarray(R, dtype=np.float64)
    n = GR.shape[0]
    p = np.full(n, 1.0 / n)
    residual = math.inf
    for _ in range(max_iter):
        q = GR @ p
        q /= math.fsum(q)
        residual = float(np.abs(q - p).sum())
        p = q
        if residual <= tol:
            return p
    raise ConvergenceError("reduced PageRank", max_iter, residual)
