"""Vertex-weighted graphs, clique predicates, and an exhaustive clique oracle.

Graphs are dense, undirected, and small (tens to a few hundred vertices);
vertex weights are non-negative scores. The oracle enumerates all 2^n vertex
subsets, so it is guarded at n <= 30 and intended as ground truth for tests
and benchmark scoring, not as a solver.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numba
import numpy as np

from ._validation import check_adjacency, check_vertex_weights, readonly
from .exceptions import ValidationError

VertexSet = tuple[int, ...]

BRUTEFORCE_MAX_VERTICES = 30


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable undirected graph with a non-negative weight per vertex.

    adjacency: dense symmetric 0/1 matrix with zero diagonal.
    vertex_weights: one finite score >= 0 per vertex.
    """

    adjacency: np.ndarray
    vertex_weights: np.ndarray

    def __post_init__(self) -> None:
        a = check_adjacency(self.adjacency)
        w = check_vertex_weights(self.vertex_weights, a.shape[0])
        object.__setattr__(self, "adjacency", readonly(a))
        object.__setattr__(self, "vertex_weights", readonly(w))
        masks = []
        for i in range(a.shape[0]):
            m = 0
            for j in np.flatnonzero(a[i]):
                m |= 1 << int(j)
            masks.append(m)
        object.__setattr__(self, "_neighbor_masks", tuple(masks))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def neighbor_masks(self) -> tuple[int, ...]:
        """Per-vertex adjacency bitmasks (bit j set iff edge to vertex j)."""
        return self._neighbor_masks

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency))
        return [(int(a), int(b)) for a, b in zip(i, j)]


def from_edges(n: int, edges: Iterable[Sequence[int]], weights=None) -> WeightedGraph:
    """Build a graph from an edge list; weights default to all ones."""
    if n < 1:
        raise ValidationError("graph needs at least one vertex")
    a = np.zeros((n, n))
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < n and 0 <= j < n):
            raise ValidationError(f"edge ({i}, {j}) out of range for n={n}")
        if i == j:
            raise ValidationError(f"self-loop at vertex {i}")
        a[i, j] = a[j, i] = 1.0
    if weights is None:
        weights = np.ones(n)
    return WeightedGraph(a, weights)


def complete_graph(n: int, weights=None) -> WeightedGraph:
    a = np.ones((n, n)) - np.eye(n)
    if weights is None:
        weights = np.ones(n)
    return WeightedGraph(a, weights)


def as_vertex_set(members: Iterable[int], n: int) -> VertexSet:
    """Normalize an iterable of vertex indices to a sorted distinct tuple."""
    out = sorted({int(v) for v in members})
    if out and (out[0] < 0 or out[-1] >= n):
        bad = out[0] if out[0] < 0 else out[-1]
        raise ValidationError(f"vertex {bad} out of range for graph with n={n}")
    return tuple(out)


def induced_subgraph(g: WeightedGraph, s: Iterable[int]) -> WeightedGraph:
    s = as_vertex_set(s, g.n)
    if not s:
        raise ValidationError("cannot induce a subgraph on an empty selection")
    idx = np.array(s, dtype=np.intp)
    return WeightedGraph(g.adjacency[np.ix_(idx, idx)], g.vertex_weights[idx])


def is_clique(g: WeightedGraph, s: Iterable[int]) -> bool:
    """True iff every pair in s is adjacent; sets of size <= 1 count as cliques."""
    s = as_vertex_set(s, g.n)
    if len(s) <= 1:
        return True
    masks = g.neighbor_masks()
    mask = 0
    for v in s:
        mask |= 1 << v
    return all(masks[v] & mask == mask ^ (1 << v) for v in s)


def clique_weight(g: WeightedGraph, s: Iterable[int]) -> float:
    s = as_vertex_set(s, g.n)
    return float(sum(g.vertex_weights[v] for v in s))


def degree(g: WeightedGraph, v: int) -> int:
    if not (0 <= int(v) < g.n):
        raise ValidationError(f"vertex {v} out of range for graph with n={g.n}")
    return int(g.adjacency[int(v)].sum())


def degrees(g: WeightedGraph) -> np.ndarray:
    return g.adjacency.sum(axis=1)


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Degree matrix minus adjacency; positive semidefinite."""
    return np.diag(degrees(g)) - g.adjacency


@numba.njit(cache=True)
def _lex_less(a: np.int64, b: np.int64) -> bool:
    # Compare two vertex bitmasks as sorted index tuples.
    while a != 0 and b != 0:
        la = a & (-a)
        lb = b & (-b)
        if la != lb:
            return la < lb
        a ^= la
        b ^= lb
    return b != 0


@numba.njit(cache=True)
def _clique_scan(masks, weights):
    """Enumerate all 2^n subsets; return (best mask, best weight, runner-up weight).

    The runner-up is the largest clique weight attained by any clique other
    than the returned one; -1.0 when no second clique exists.
    """
    n = masks.shape[0]
    best_mask = np.int64(0)
    best_w = -1.0
    second_w = -1.0
    total = np.int64(1) << n
    for m in range(total):
        mm = np.int64(m)
        ok = True
        for v in range(n):
            if (mm >> v) & 1:
                if masks[v] & mm != mm ^ (np.int64(1) << v):
                    ok = False
                    break
        if not ok:
            continue
        w = 0.0
        for v in range(n):
            if (mm >> v) & 1:
                w += weights[v]
        if w > best_w:
            second_w = best_w
            best_w = w
            best_mask = mm
        else:
            if w > second_w:
                second_w = w
            if w == best_w and _lex_less(mm, best_mask):
                best_mask = mm
    return best_mask, best_w, second_w


def _mask_to_set(mask: int) -> VertexSet:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def max_weighted_clique_with_runner_up(g: WeightedGraph) -> tuple[VertexSet, float, float]:
    """Exhaustive scan returning (best clique, its weight, runner-up weight).

    Ties on weight resolve to the lexicographically smallest member tuple.
    Guarded at n <= 30 (the scan visits all 2^n subsets).
    """
    if g.n > BRUTEFORCE_MAX_VERTICES:
        raise ValidationError(
            f"exhaustive clique scan is limited to n <= {BRUTEFORCE_MAX_VERTICES}, got n={g.n}"
        )
    masks = np.array(g.neighbor_masks(), dtype=np.int64)
    best_mask, best_w, second_w = _clique_scan(masks, g.vertex_weights)
    return _mask_to_set(int(best_mask)), float(best_w), float(second_w)


def max_weighted_clique_bruteforce(g: WeightedGraph) -> VertexSet:
    """Clique maximizing total vertex weight, by exhaustive enumeration."""
    best, _, _ = max_weighted_clique_with_runner_up(g)
    return best


def graph_to_dict(g: WeightedGraph, meta: dict | None = None) -> dict:
    d = {
        "n": g.n,
        "edges": [[i, j] for i, j in g.edges()],
        "weights": [float(w) for w in g.vertex_weights],
    }
    if meta:
        d["meta"] = meta
    return d


def graph_from_dict(d: dict) -> WeightedGraph:
    for key in ("n", "edges", "weights"):
        if key not in d:
            raise ValidationError(f"graph dict is missing required key {key!r}")
    return from_edges(int(d["n"]), d["edges"], d["weights"])


def save_graph(g: WeightedGraph, path: str | Path, meta: dict | None = None) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g, meta), indent=2) + "\n")


def load_graph(path: str | Path) -> WeightedGraph:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    return graph_from_dict(d)


def to_dimacs(g: WeightedGraph) -> str:
    """DIMACS-like clique text with vertex weights on comment-extension lines.

    Vertices are 1-indexed; weights ride on `c w <vertex> <weight>` lines so
    plain DIMACS consumers can skip them.
    """
    lines = [f"p edge {g.n} {g.n_edges}"]
    for v in range(g.n):
        lines.append(f"c w {v + 1} {float(g.vertex_weights[v])!r}")
    for i, j in g.edges():
        lines.append(f"e {i + 1} {j + 1}")
    return "\n".join(lines) + "\n"
