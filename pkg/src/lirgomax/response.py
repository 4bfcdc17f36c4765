"""Linear response of PageRank to weak perturbations of the Google matrix.

Two perturbation models are supported:

* pump model: probability is injected at nodes with ``D_k > 0`` and
  absorbed at nodes with ``D_k < 0`` before each application of ``G0``;
* sensitivity model: the element ``G0[i, j]`` is multiplied by
  ``1 + eps`` and column ``j`` renormalized.

In both cases the first-order correction ``P1`` of the PageRank solves
``P1 = G0 P1 + V0`` on the sum-zero subspace and is obtained by the same
power iteration as PageRank itself, started from zero and projected after
every step.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, TextIO

import numpy as np

from .gmatrix import (DEFAULT_MAX_ITER, DEFAULT_TOL, ConvergenceError, GoogleOperator,
                      _sum, rank_order, rank_positions)

logger = logging.getLogger(__name__)

SUM_ZERO_TOL = 1e-12


class PumpSpecWarning(UserWarning):
    pass


class ShortBlockWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PumpSpec:
    """Sparse diagonal ``D`` of the pump model.

    ``entries`` maps node id to ``D_k``; zero values are rejected.
    """

    entries: Mapping[int, float]
    epsilon: float | None = None

    def __post_init__(self):
        entries = {int(k): float(v) for k, v in dict(self.entries).items()}
        if not entries:
            raise ValueError("pump spec is empty")
        if any(v == 0.0 or not math.isfinite(v) for v in entries.values()):
            raise ValueError("pump spec values must be finite and nonzero")
        object.__setattr__(self, "entries", entries)
        values = entries.values()
        if not (any(v > 0 for v in values) and any(v < 0 for v in values)):
            warnings.warn("pump spec has entries of a single sign only", PumpSpecWarning,
                          stacklevel=2)

    @classmethod
    def balanced_pair(cls, p0: np.ndarray, inject: int, absorb: int) -> "PumpSpec":
        """``D_i = 1/P0(i)``, ``D_j = -1/P0(j)`` so that ``e(P0) = 0``."""
        return cls({int(inject): 1.0 / p0[inject], int(absorb): -1.0 / p0[absorb]})

    def nodes(self) -> np.ndarray:
        return np.fromiter(self.entries.keys(), dtype=np.int64, count=len(self.entries))

    def values(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=np.float64, count=len(self.entries))

    def scaled(self, c: float) -> "PumpSpec":
        return PumpSpec({k: c * v for k, v in self.entries.items()}, self.epsilon)

    def diag_times(self, p: np.ndarray) -> np.ndarray:
        """``D @ p`` as a dense vector."""
        out = np.zeros_like(p, dtype=np.float64)
        nodes = self.nodes()
        out[nodes] = self.values() * p[nodes]
        return out


def load_pump_spec(stream: TextIO | Iterable[str]) -> PumpSpec:
    """Read ``node_id<TAB>D_value`` lines (``#`` comments allowed)."""
    entries: dict[int, float] = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'node_id<TAB>D_value', got {line!r}")
        try:
            entries[int(parts[0])] = float(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {line!r}") from None
    return PumpSpec(entries)


def _check_node(op: GoogleOperator, *nodes: int) -> None:
    for k in nodes:
        if not 0 <= int(k) < op.n:
            raise IndexError(f"node {k} out of range [0, {op.n})")


def project(x, p0: np.ndarray, deterministic: bool = True) -> np.ndarray:
    """Remove the PageRank direction: ``Q(x) = x - sum(x) * P0``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != p0.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {p0.shape}")
    return x - _sum(x, deterministic) * p0


def pump_pair_v0(op: GoogleOperator, p0: np.ndarray, inject: int, absorb: int) -> np.ndarray:
    """Source term for injection at ``inject`` and absorption at ``absorb``.

    With ``D_i = 1/P0(i)`` and ``D_j = -1/P0(j)`` one has ``D P0 = e_i - e_j``
    and therefore ``V0 = G0[:, i] - G0[:, j]``.
    """
    _check_node(op, inject, absorb)
    w0 = np.zeros(op.n)
    w0[inject] += 1.0
    w0[absorb] -= 1.0
    return project(op.apply(w0), p0, op.deterministic)


def pump_general_v0(op: GoogleOperator, p0: np.ndarray, spec: PumpSpec) -> np.ndarray:
    """``V0 = Q(G0 D P0)`` for an arbitrary diagonal pump."""
    _check_node(op, *spec.entries)
    return project(op.apply(spec.diag_times(p0)), p0, op.deterministic)


def sensitivity_v0(op: GoogleOperator, p0: np.ndarray, target: int, source: int) -> np.ndarray:
    """Source term for amplifying the transition ``source -> target``.

    Only column ``source`` of the first-order matrix is nonzero:
    ``G1[k, j] = G0[k, j] * (delta_ki - G0[i, j])``, so that
    ``V0 = G1 P0`` has zero sum.
    """
    _check_node(op, target, source)
    col = op.column(source)
    v0 = -col[target] * col
    v0[target] += col[target]
    v0 *= p0[source]
    return project(v0, p0, op.deterministic)


def solve_linear_response(op: GoogleOperator, p0: np.ndarray, v0: np.ndarray,
                          tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                          projected: bool = True, history: list | None = None) -> np.ndarray:
    """Solve ``P1 = G0 P1 + V0`` by iteration from ``P1 = 0``.

    The iterate is projected back onto the sum-zero subspace after every
    step unless ``projected`` is false. Converged when the L1 residual
    ``||G0 P1 + V0 - P1||_1 <= tol``.
    """
    v0 = np.asarray(v0, dtype=np.float64)
    if v0.shape != (op.n,):
        raise ValueError(f"V0 must have length {op.n}")
    s = _sum(v0, op.deterministic)
    if abs(s) > SUM_ZERO_TOL:
        raise ValueError(f"V0 must have zero sum, got {s:.3e}")
    p1 = np.zeros(op.n)
    if not np.any(v0):
        return p1
    residual = math.inf
    for it in range(1, max_iter + 1):
        nxt = op.apply(p1)
        nxt += v0
        if projected:
            nxt = project(nxt, p0, op.deterministic)
        residual = float(np.abs(nxt - p1).sum())
        if history is not None:
            history.append(residual)
        p1 = nxt
        if residual <= tol:
            logger.info("linear response converged in %d steps (residual %.2e)", it, residual)
            return p1
    raise ConvergenceError("linear response", max_iter, residual)


def solve_perturbed_pump(op: GoogleOperator, spec: PumpSpec, epsilon: float,
                         tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                         start=None) -> np.ndarray:
    """Fixed point of ``P = G0 (1 + eps D) P / (1 + eps e(P))`` at finite ``eps``.

    Iterates from the uniform vector (or ``start``) until successive
    iterates differ by at most ``tol`` in L1. With ``epsilon == 0`` this is
    exactly the PageRank iteration.
    """
    _check_node(op, *spec.entries)
    n = op.n
    nodes, d = spec.nodes(), spec.values()
    p = np.full(n, 1.0 / n) if start is None else np.array(start, dtype=np.float64)
    residual = math.inf
    for it in range(1, max_iter + 1):
        f = p.copy()
        if epsilon != 0.0:
            f[nodes] *= 1.0 + epsilon * d
            denom = 1.0 + epsilon * math.fsum(d * p[nodes])
            if denom <= 0.0:
                raise ValueError(f"normalization 1 + eps*e(P) = {denom:.3e} <= 0 "
                                 f"at epsilon={epsilon!r}")
            f /= denom
        q = op.apply(f)
        q /= _sum(q, op.deterministic)
        residual = float(np.abs(q - p).sum())
        p = q
        if residual <= tol:
            logger.info("perturbed pump converged in %d steps (eps=%g)", it, epsilon)
            return p
    raise ConvergenceError(f"perturbed pump (epsilon={epsilon!r})", max_iter, residual)


def sensitivity_values(p1, p0) -> np.ndarray:
    """Relative response ``P1(k) / P0(k)``."""
    return np.asarray(p1, dtype=np.float64) / np.asarray(p0, dtype=np.float64)


@dataclass
class PathwaySubset:
    """Nodes with the strongest negative and positive response.

    Position ``i`` (0-based here, 1-based in exports) runs first over the
    negative block by ascending ``P1`` and then over the positive block by
    descending ``P1``.
    """

    nodes: np.ndarray
    kl: np.ndarray
    k: np.ndarray
    values: np.ndarray
    n_negative: int
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.nodes.size)

    @property
    def negative(self) -> np.ndarray:
        return self.nodes[:self.n_negative]

    @property
    def positive(self) -> np.ndarray:
        return self.nodes[self.n_negative:]

    def block_of(self) -> list[str]:
        return ["negative"] * self.n_negative + ["positive"] * (len(self) - self.n_negative)


def select_pathway_subset(p1, m: int = 20, p0=None) -> PathwaySubset:
    """Pick the ``m`` most negative and ``m`` most positive entries of ``P1``.

    Each node is annotated with its 1-based ``K_L`` (rank of ``|P1|`` over
    all nodes) and, when ``p0`` is given, its 1-based PageRank index ``K``.
    """
    p1 = np.asarray(p1, dtype=np.float64)
    if m < 0:
        raise ValueError("m must be nonnegative")
    neg = np.flatnonzero(p1 < 0)
    neg = neg[np.argsort(p1[neg], kind="stable")][:m]
    pos = np.flatnonzero(p1 > 0)
    pos = pos[np.argsort(-p1[pos], kind="stable")][:m]
    msgs = []
    for name, block in (("negative", neg), ("positive", pos)):
        if block.size < m:
            msgs.append(f"only {block.size} of {m} requested {name} entries available")
    for msg in msgs:
        warnings.warn(msg, ShortBlockWarning, stacklevel=2)
    nodes = np.concatenate([neg, pos]).astype(np.int64)
    kl = rank_positions(rank_order(p1, by_magnitude=True))[nodes]
    if p0 is None:
        k = np.zeros(nodes.size, dtype=np.int64)
    else:
        k = rank_positions(rank_order(p0))[nodes]
    return PathwaySubset(nodes, kl, k, p1[nodes], int(neg.size), msgs)
