"""Plain-text exports: rankings, response profiles, subsets, matrices, plot data.

All floats are written with ``repr`` (shortest round-trip form), so files
are byte-deterministic and re-reading them recovers the exact values.
"""
from __future__ import annotations

import math
from typing import Iterable, Mapping, TextIO

import numpy as np

from .gmatrix import rank_order, rank_positions
from .graph import LabelMap
from .response import PathwaySubset


def _fmt(x: float) -> str:
    return repr(float(x))


def _label(labels: Mapping[int, str] | None, node: int) -> str:
    if labels is None:
        return str(node)
    if isinstance(labels, LabelMap):
        return labels.lookup(node)
    return labels.get(int(node), str(node))


def _rows(stream: TextIO | Iterable[str]):
    """Non-empty, non-comment lines split on tabs."""
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if line.strip() and not line.startswith("#"):
            yield lineno, line.split("\t")


def write_ranking(stream: TextIO, values, labels=None) -> None:
    """``K<TAB>node_id<TAB>label<TAB>P`` with 1-based ``K``."""
    values = np.asarray(values)
    stream.write("K\tnode_id\tlabel\tP\n")
    for k, node in enumerate(rank_order(values).tolist(), start=1):
        stream.write(f"{k}\t{node}\t{_label(labels, node)}\t{_fmt(values[node])}\n")


def export_response_profile(p1, stream: TextIO, p0=None) -> None:
    """Nonzero entries of ``P1`` in ``K_L`` order: ``K_L, node_id, P1, |P1|, sign``.

    With ``p0`` an extra ``sensitivity`` column ``P1/P0`` is appended.
    """
    p1 = np.asarray(p1, dtype=np.float64)
    header = "K_L\tnode_id\tP1\tabs_P1\tsign"
    stream.write(header + ("\tsensitivity\n" if p0 is not None else "\n"))
    for kl, node in enumerate(rank_order(p1, by_magnitude=True).tolist(), start=1):
        v = p1[node]
        if v == 0.0:
            break
        row = f"{kl}\t{node}\t{_fmt(v)}\t{_fmt(abs(v))}\t{'+' if v > 0 else '-'}"
        if p0 is not None:
            row += f"\t{_fmt(v / p0[node])}"
        stream.write(row + "\n")


def read_response_profile(stream: TextIO | Iterable[str], n_nodes: int) -> np.ndarray:
    """Rebuild the full ``P1`` vector (absent nodes are zero)."""
    p1 = np.zeros(n_nodes)
    rows = _rows(stream)
    try:
        _, header = next(rows)
    except StopIteration:
        return p1
    try:
        c_node, c_val = header.index("node_id"), header.index("P1")
    except ValueError:
        raise ValueError("response profile lacks node_id/P1 columns") from None
    for lineno, cols in rows:
        try:
            node, val = int(cols[c_node]), float(cols[c_val])
        except (IndexError, ValueError):
            raise ValueError(f"line {lineno}: malformed response profile row") from None
        if not 0 <= node < n_nodes:
            raise ValueError(f"line {lineno}: node {node} out of range")
        p1[node] = val
    return p1


def write_pathway_subset(stream: TextIO, subset: PathwaySubset, labels=None) -> None:
    """``i<TAB>K_L<TAB>K<TAB>node_id<TAB>label<TAB>P1`` with 1-based ``i``."""
    stream.write("i\tK_L\tK\tnode_id\tlabel\tP1\n")
    for i in range(len(subset)):
        node = int(subset.nodes[i])
        stream.write(f"{i + 1}\t{subset.kl[i]}\t{subset.k[i]}\t{node}\t"
                     f"{_label(labels, node)}\t{_fmt(subset.values[i])}\n")


def read_subset(stream: TextIO | Iterable[str]) -> tuple[np.ndarray, np.ndarray | None]:
    """Node ids in file order, plus ``P1`` values when present.

    Accepts the pathway-subset table or a bare list of node ids.
    """
    nodes, values = [], []
    c_node = c_val = None
    for lineno, cols in _rows(stream):
        if c_node is None and "node_id" in cols:
            c_node = cols.index("node_id")
            c_val = cols.index("P1") if "P1" in cols else None
            continue
        try:
            nodes.append(int(cols[c_node or 0]))
            if c_val is not None:
                values.append(float(cols[c_val]))
        except (IndexError, ValueError):
            raise ValueError(f"line {lineno}: malformed subset row") from None
    vals = np.array(values) if c_val is not None else None
    return np.array(nodes, dtype=np.int64), vals


def write_matrix(stream: TextIO, M: np.ndarray, node_ids) -> None:
    """Square matrix with node-id header row and column."""
    ids = [str(int(k)) for k in node_ids]
    stream.write("node_id\t" + "\t".join(ids) + "\n")
    for k, row in zip(ids, np.asarray(M)):
        stream.write(k + "\t" + "\t".join(_fmt(x) for x in row) + "\n")


def read_matrix(stream: TextIO | Iterable[str]) -> tuple[np.ndarray, np.ndarray]:
    rows = list(_rows(stream))
    if not rows:
        raise ValueError("empty matrix file")
    ids = np.array([int(x) for x in rows[0][1][1:]], dtype=np.int64)
    M = np.array([[float(x) for x in cols[1:]] for _, cols in rows[1:]])
    if M.shape != (ids.size, ids.size):
        raise ValueError(f"matrix shape {M.shape} does not match {ids.size} header ids")
    return ids, M


def write_metadata(stream: TextIO, meta: Mapping[str, object]) -> None:
    for key, value in meta.items():
        if isinstance(value, (float, np.floating)):
            value = _fmt(value)
        stream.write(f"{key}\t{value}\n")


def read_metadata(stream: TextIO | Iterable[str]) -> dict[str, str]:
    return {cols[0]: cols[1] for _, cols in _rows(stream) if len(cols) >= 2}


def plot_scale(M: np.ndarray) -> np.ndarray:
    """``sgn(g) * (|g| / max|g|)**(1/4)``; all zeros when ``M`` vanishes."""
    M = np.asarray(M, dtype=np.float64)
    top = np.abs(M).max(initial=0.0)
    if top == 0.0:
        return np.zeros_like(M)
    return np.sign(M) * (np.abs(M) / top) ** 0.25


def export_matrix_plot_data(M, stream: TextIO) -> None:
    """Long-format TSV ``row, col, g, scaled`` with 1-based subset indices."""
    M = np.asarray(M, dtype=np.float64)
    scaled = plot_scale(M)
    stream.write("row\tcol\tg\tscaled\n")
    for r in range(M.shape[0]):
        for c in range(M.shape[1]):
            stream.write(f"{r + 1}\t{c + 1}\t{_fmt(M[r, c])}\t{_fmt(scaled[r, c])}\n")


def negative_entry_stats(M: np.ndarray) -> dict[str, object]:
    neg = M[M < 0]
    return {"count": int(neg.size),
            "min": float(neg.min()) if neg.size else 0.0,
            "max_positive": float(M.max(initial=0.0)),
            "fraction": neg.size / M.size if M.size else math.nan}
