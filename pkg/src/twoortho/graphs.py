"""Graphical descriptions of two-orthogonal decompositions.

Graph ``k`` of a decomposition has the terms as vertices and an edge
``{i, j}`` whenever the k-th factor vectors of terms i and j are orthogonal.
Two-orthogonality says every pair of vertices is joined in at least two of
the graphs.  For binary factors (dimension 2) a graph is realizable exactly
when it is a disjoint union of complete bipartite graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterator, Sequence

import numpy as np

from .decomp import ORTHO_TOL, _cosines
from .tensor_core import Decomposition, TensorError

MAX_COLORING_VERTICES = 12
MAX_ISOMORPHISM_VERTICES = 8


@dataclass(frozen=True, eq=False)
class GraphTuple:
    """``adjacency[k]`` is the symmetric boolean adjacency matrix of graph k."""

    r: int
    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool).reshape(-1, self.r, self.r)
        if np.any(adj != np.transpose(adj, (0, 2, 1))):
            raise TensorError("graph adjacency must be symmetric")
        if self.r and np.any(adj[:, np.arange(self.r), np.arange(self.r)]):
            raise TensorError("graphs must not have self-loops")
        object.__setattr__(self, "adjacency", adj)

    @property
    def d(self) -> int:
        return self.adjacency.shape[0]

    @classmethod
    def from_edges(cls, r: int, graphs: Sequence[Sequence[Sequence[int]]]) -> "GraphTuple":
        adj = np.zeros((len(graphs), r, r), dtype=bool)
        for k, edges in enumerate(graphs):
            for i, j in edges:
                if i == j or not (0 <= i < r and 0 <= j < r):
                    raise TensorError(f"bad edge ({i},{j}) for {r} vertices")
                adj[k, i, j] = adj[k, j, i] = True
        return cls(r, adj)

    def edges(self, k: int) -> list[tuple[int, int]]:
        return [(i, j) for i, j in combinations(range(self.r), 2) if self.adjacency[k, i, j]]

    def to_json(self) -> dict:
        return {"r": self.r, "graphs": [[list(e) for e in self.edges(k)] for k in range(self.d)]}

    @classmethod
    def from_json(cls, obj: dict) -> "GraphTuple":
        return cls.from_edges(int(obj["r"]), obj["graphs"])


@dataclass(frozen=True)
class Verdict:
    status: str
    reason: str = ""

    def __bool__(self) -> bool:
        return self.status == "valid"


def graphical_description(decomp: Decomposition, tol: float = ORTHO_TOL) -> GraphTuple:
    cos = _cosines(decomp)
    adj = cos <= tol
    r = len(decomp)
    adj[:, np.arange(r), np.arange(r)] = False
    return GraphTuple(r, adj)


def components(adj: np.ndarray) -> list[list[int]]:
    """Connected components, each sorted, in order of smallest vertex."""
    r = adj.shape[0]
    seen = np.zeros(r, dtype=bool)
    out = []
    for s in range(r):
        if seen[s]:
            continue
        comp, stack = [], [s]
        seen[s] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in np.flatnonzero(adj[v] & ~seen):
                seen[w] = True
                stack.append(int(w))
        out.append(sorted(comp))
    return out


def complete_bipartite_components(adj: np.ndarray) -> int | None:
    """Number of components if every component is complete bipartite, else None.

    An isolated vertex is a complete bipartite component with one empty side.
    """
    comps = components(adj)
    for comp in comps:
        if len(comp) == 1:
            continue
        side = {comp[0]: 0}
        order = [comp[0]]
        for v in order:
            for w in np.flatnonzero(adj[v]):
                w = int(w)
                if w not in side:
                    side[w] = 1 - side[v]
                    order.append(w)
                elif side[w] == side[v]:
                    return None
        for a, b in combinations(comp, 2):
            if (side[a] != side[b]) != bool(adj[a, b]):
                return None
    return len(comps)


def _color(adj: np.ndarray, n: int) -> list[int] | None:
    """Proper n-coloring by backtracking in order of decreasing degree."""
    r = adj.shape[0]
    order = sorted(range(r), key=lambda v: -int(adj[v].sum()))
    colors = [-1] * r

    def place(pos: int) -> bool:
        if pos == r:
            return True
        v = order[pos]
        used = {colors[w] for w in np.flatnonzero(adj[v]) if colors[w] >= 0}
        # Colors are interchangeable: never open more than one new color.
        top = max(colors) + 1
        for c in range(min(n, top + 1)):
            if c not in used:
                colors[v] = c
                if place(pos + 1):
                    return True
        colors[v] = -1
        return False

    return colors if place(0) else None


def is_valid_graphical_description(gt: GraphTuple, shape: Sequence[int]) -> Verdict:
    """Three-valued validity check of a graph tuple for a tensor shape.

    Invalid when some pair is joined in fewer than two graphs, or when a
    graph for a binary factor is not a disjoint union of complete bipartite
    graphs.  For larger factors a proper coloring with ``n_k`` colors (basis
    vectors) certifies the vector chromatic bound; when none exists, or the
    graph is too large to search, the answer is inconclusive.
    """
    shape = tuple(int(n) for n in shape)
    if len(shape) != gt.d:
        raise TensorError(f"{gt.d} graphs given for a shape with {len(shape)} factors")
    count = gt.adjacency.sum(axis=0)
    for i, j in combinations(range(gt.r), 2):
        if count[i, j] < 2:
            return Verdict("invalid", f"pair ({i + 1},{j + 1}) is joined in {int(count[i, j])} graphs < 2")
    pending = []
    for k, n in enumerate(shape):
        adj = gt.adjacency[k]
        if n == 2:
            if complete_bipartite_components(adj) is None:
                return Verdict("invalid", f"graph {k + 1} is not a disjoint union of complete bipartite graphs")
        elif gt.r > MAX_COLORING_VERTICES:
            pending.append(f"graph {k + 1} has too many vertices for the coloring search")
        elif _color(adj, n) is None:
            pending.append(f"graph {k + 1} has no proper {n}-coloring")
    if pending:
        return Verdict("inconclusive", "; ".join(pending))
    return Verdict("valid")


def expected_dimension_binary(gt: GraphTuple) -> int:
    """``r + sum_k c_k`` with ``c_k`` the number of complete bipartite components of graph k."""
    total = gt.r
    for k in range(gt.d):
        c = complete_bipartite_components(gt.adjacency[k])
        if c is None:
            raise TensorError(f"graph {k + 1} is not a disjoint union of complete bipartite graphs")
        total += c
    return total


def _leq_labeled(a: np.ndarray, b: np.ndarray) -> bool:
    ra, rb = a.shape[1], b.shape[1]
    if ra == rb:
        return bool(np.all(~b | a))
    if ra < rb:
        return bool(np.all(~a | b[:, :ra, :ra]))
    return False


def leq_order(a: GraphTuple, b: GraphTuple, up_to_isomorphism: bool = True) -> bool:
    """Partial order on graph tuples.

    With equal vertex sets, ``a <= b`` when every graph of ``b`` is a subgraph
    of the matching graph of ``a`` (more orthogonality is more special).  With
    fewer vertices, ``a <= b`` when ``a`` embeds into ``b`` edge-wise.  Up to
    isomorphism all relabelings of ``b`` are tried for ``b.r <= 8``.
    """
    if a.d != b.d:
        raise TensorError(f"graph tuples have {a.d} and {b.d} graphs")
    if _leq_labeled(a.adjacency, b.adjacency):
        return True
    if not up_to_isomorphism or b.r > MAX_ISOMORPHISM_VERTICES or a.r > b.r:
        return False
    for perm in permutations(range(b.r)):
        p = np.array(perm)
        if _leq_labeled(a.adjacency, b.adjacency[:, p][:, :, p]):
            return True
    return False


# Exhaustive enumeration of valid binary descriptions

def _binary_tuples(r: int, d: int) -> Iterator[list[list[tuple[int, int]]]]:
    """Valid tuples on ``r`` labeled vertices for shape ``(2,)*d``.

    Each graph is encoded by a (component, side) label per vertex; vertices
    are adjacent exactly when they share a component on opposite sides.
    Labels use restricted growth so every labeled graph appears once.
    Partial assignments are pruned as soon as a pair is covered fewer
    than twice.
    """
    labels: list[list[tuple[int, int]]] = [[] for _ in range(d)]
    used = [0] * d

    def options(k: int):
        for c in range(used[k]):
            yield (c, 0)
            yield (c, 1)
        yield (used[k], 0)

    def adjacent(k: int, u: int, v: int) -> bool:
        (cu, su), (cv, sv) = labels[k][u], labels[k][v]
        return cu == cv and su != sv

    def extend(v: int, k: int):
        if k == d:
            if all(sum(adjacent(j, u, v) for j in range(d)) >= 2 for u in range(v)):
                if v + 1 == r:
                    if all(_connected_labels(lab) for lab in labels):
                        yield [list(lab) for lab in labels]
                else:
                    yield from extend(v + 1, 0)
            return
        for opt in options(k):
            labels[k].append(opt)
            grew = opt[0] == used[k]
            if grew:
                used[k] += 1
            # Remaining graphs can add at most d - k - 1 more joins per pair.
            if all(sum(adjacent(j, u, v) for j in range(k + 1)) + (d - k - 1) >= 2 for u in range(v)):
                yield from extend(v, k + 1)
            if grew:
                used[k] -= 1
            labels[k].pop()

    if r >= 1:
        yield from extend(0, 0)


def _connected_labels(lab: list[tuple[int, int]]) -> bool:
    """A label with two or more vertices needs both sides, else it is not one component."""
    sides: dict[int, set[int]] = {}
    for c, side in lab:
        sides.setdefault(c, set()).add(side)
    sizes = {c: sum(1 for cc, _ in lab if cc == c) for c in sides}
    return all(sizes[c] == 1 or len(sides[c]) == 2 for c in sides)


def binary_labels_to_graphs(r: int, labels: list[list[tuple[int, int]]]) -> GraphTuple:
    d = len(labels)
    adj = np.zeros((d, r, r), dtype=bool)
    for k in range(d):
        for u, v in combinations(range(r), 2):
            (cu, su), (cv, sv) = labels[k][u], labels[k][v]
            adj[k, u, v] = adj[k, v, u] = cu == cv and su != sv
    return GraphTuple(r, adj)


@dataclass
class ConjectureScan:
    """Per vertex count: number of valid labeled tuples and the largest ``r + sum c_k``."""

    d: int
    counts: dict[int, int]
    max_dimension: dict[int, int]
    witnesses: dict[int, GraphTuple]

    @property
    def bound(self) -> int:
        return 2 ** (self.d - 1) + self.d

    def violations(self) -> list[int]:
        """Vertex counts where the bound fails, or is met with ``r != 2^{d-1}``."""
        top = 2 ** (self.d - 1)
        return [r for r, m in self.max_dimension.items()
                if m > self.bound or (m == self.bound and r != top)]


def conjecture_scan(d: int, max_r: int | None = None) -> ConjectureScan:
    """Enumerate every valid binary description with up to ``max_r`` vertices.

    ``max_r`` defaults to ``2^{d-1} + 1`` so the scan also confirms that no
    description exceeds the maximal length.
    """
    if max_r is None:
        max_r = 2 ** (d - 1) + 1
    counts, best, witnesses = {}, {}, {}
    for r in range(1, max_r + 1):
        n = 0
        for labels in _binary_tuples(r, d):
            n += 1
            dim = r + sum(len({c for c, _ in lab}) for lab in labels)
            if dim > best.get(r, -1):
                best[r] = dim
                witnesses[r] = binary_labels_to_graphs(r, labels)
        counts[r] = n
    return ConjectureScan(d, counts, best, witnesses)
