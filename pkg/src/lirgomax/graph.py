"""Directed graphs stored as immutable CSR adjacency in both directions."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

logger = logging.getLogger(__name__)

_NODES_HEADER = re.compile(r"^#\s*nodes\s*:\s*(\d+)\s*$", re.IGNORECASE)
_INDEX_MAX = np.iinfo(np.int32).max


class EdgeListError(ValueError):
    """Malformed edge-list or label input; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def _index_dtype(n: int):
    return np.int32 if n <= _INDEX_MAX else np.int64


def _csr(n_nodes: int, rows: np.ndarray, cols: np.ndarray):
    """CSR (indptr, indices) for edges already sorted by (rows, cols).

    Both arrays are int32 whenever node and edge counts allow it.
    """
    dtype = _index_dtype(max(n_nodes, rows.size))
    counts = np.bincount(rows, minlength=n_nodes)
    indptr = np.zeros(n_nodes + 1, dtype=dtype)
    np.cumsum(counts, out=indptr[1:])
    return indptr, cols.astype(dtype)


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Binary adjacency of a directed network.

    ``indptr/indices`` list the out-neighbours of each node (edge j -> i is
    stored in row j), ``t_indptr/t_indices`` the in-neighbours. Build with
    :meth:`from_edges` or :func:`load_edge_list`.
    """

    n_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    t_indptr: np.ndarray
    t_indices: np.ndarray
    out_degree: np.ndarray = field(repr=False)
    dangling_mask: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, src, dst, n_nodes: int | None = None,
                   drop_self_loops: bool = True) -> "DirectedGraph":
        """Build from parallel arrays of edge sources and targets.

        Duplicate pairs collapse to a single edge. ``n_nodes`` defaults to
        ``max id + 1``.
        """
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("src and dst must have the same length")
        max_id = int(max(src.max(initial=-1), dst.max(initial=-1)))
        if n_nodes is None:
            n_nodes = max_id + 1
        if n_nodes < 0:
            raise ValueError("n_nodes must be nonnegative")
        if src.size and (min(src.min(), dst.min()) < 0):
            raise ValueError("node ids must be nonnegative")
        if max_id >= n_nodes:
            raise ValueError(f"node id {max_id} out of range for {n_nodes} nodes")
        if n_nodes and n_nodes > np.iinfo(np.int64).max // n_nodes:
            raise OverflowError(f"{n_nodes} nodes exceeds the supported index range")

        if drop_self_loops:
            keep = src != dst
            src, dst = src[keep], dst[keep]

        key = np.unique(src * n_nodes + dst)
        del src, dst
        fwd_rows, fwd_cols = np.divmod(key, n_nodes)
        indptr, indices = _csr(n_nodes, fwd_rows, fwd_cols)
        del fwd_rows, fwd_cols

        # transposed order: sort by (target, source)
        t_key = np.sort((key % n_nodes) * n_nodes + key // n_nodes)
        del key
        t_rows, t_cols = np.divmod(t_key, n_nodes)
        del t_key
        t_indptr, t_indices = _csr(n_nodes, t_rows, t_cols)
        return cls._assemble(n_nodes, indptr, indices, t_indptr, t_indices)

    @classmethod
    def _assemble(cls, n_nodes, indptr, indices, t_indptr, t_indices):
        out_degree = np.diff(indptr)
        for arr in (indptr, indices, t_indptr, t_indices, out_degree):
            arr.flags.writeable = False
        dangling = out_degree == 0
        dangling.flags.writeable = False
        return cls(n_nodes, indptr, indices, t_indptr, t_indices, out_degree, dangling)

    @property
    def n_edges(self) -> int:
        return int(self.indices.size)

    @property
    def in_degree(self) -> np.ndarray:
        return np.diff(self.t_indptr)

    def out_neighbors(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    def in_neighbors(self, node: int) -> np.ndarray:
        return self.t_indices[self.t_indptr[node]:self.t_indptr[node + 1]]

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge arrays ``(src, dst)`` in CSR order."""
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int64), self.out_degree)
        return src, self.indices.astype(np.int64)

    def nbytes(self) -> int:
        return sum(a.nbytes for a in (self.indptr, self.indices, self.t_indptr,
                                      self.t_indices, self.out_degree, self.dangling_mask))

    def same_structure(self, other: "DirectedGraph") -> bool:
        return (self.n_nodes == other.n_nodes
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.t_indptr, other.t_indptr)
                and np.array_equal(self.t_indices, other.t_indices))


def transpose(g: DirectedGraph) -> DirectedGraph:
    """Reverse every edge. Shares the underlying arrays with ``g``."""
    return DirectedGraph._assemble(g.n_nodes, g.t_indptr, g.t_indices, g.indptr, g.indices)


def load_edge_list(stream: TextIO | Iterable[str], drop_self_loops: bool = True) -> DirectedGraph:
    """Parse a whitespace-separated ``src dst`` edge list.

    Lines starting with ``#`` are comments, except a leading
    ``# nodes: N`` line which fixes the node count (so trailing isolated
    nodes can be represented). Blank lines are skipped.
    """
    n_nodes = None
    src: list[int] = []
    dst: list[int] = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _NODES_HEADER.match(line)
            if m and not src and n_nodes is None:
                n_nodes = int(m.group(1))
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"expected 'src dst', got {line!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"non-integer node id in {line!r}", lineno) from None
        if a < 0 or b < 0:
            raise EdgeListError(f"negative node id in {line!r}", lineno)
        if a > _INDEX_MAX or b > _INDEX_MAX:
            raise EdgeListError(f"node id overflow in {line!r}", lineno)
        if n_nodes is not None and max(a, b) >= n_nodes:
            raise EdgeListError(f"node id {max(a, b)} exceeds declared node count {n_nodes}", lineno)
        src.append(a)
        dst.append(b)
    g = DirectedGraph.from_edges(np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                                 n_nodes=n_nodes, drop_self_loops=drop_self_loops)
    logger.info("loaded graph: %d nodes, %d edges", g.n_nodes, g.n_edges)
    return g


def write_edge_list(g: DirectedGraph, stream: TextIO) -> None:
    stream.write(f"# nodes: {g.n_nodes}\n")
    src, dst = g.edges()
    for a, b in zip(src.tolist(), dst.tolist()):
        stream.write(f"{a} {b}\n")


class LabelMap(dict):
    """Node id -> display string; unknown ids fall back to their decimal form."""

    duplicates: int = 0

    def lookup(self, node: int) -> str:
        return self.get(int(node), str(int(node)))


def load_labels(stream: TextIO | Iterable[str]) -> LabelMap:
    labels = LabelMap()
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        node, sep, title = line.partition("\t")
        if not sep:
            raise EdgeListError(f"expected 'id<TAB>title', got {line!r}", lineno)
        try:
            node_id = int(node)
        except ValueError:
            raise EdgeListError(f"non-integer id {node!r}", lineno) from None
        if node_id < 0:
            raise EdgeListError(f"negative id {node_id}", lineno)
        if node_id in labels:
            labels.duplicates += 1
        labels[node_id] = title
    if labels.duplicates:
        logger.warning("%d duplicate label ids; later entries kept", labels.duplicates)
    return labels
