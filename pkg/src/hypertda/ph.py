"""Vietoris-Rips filtration up to dimension 2 and dimension-1 persistence
over F2, with reduction-based representative cycles."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from ._reduce import apparent_positive_triangles, reduce_boundary


class FiltrationError(ValueError):
    pass


def enclosing_radius(d: np.ndarray) -> float:
    """Smallest eccentricity; beyond it the Rips complex is a cone."""
    return float(np.min(np.max(d, axis=1)))


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------

def _edge(i: int, j: int) -> tuple[int, int]:
    i, j = int(i), int(j)
    if i == j:
        raise FiltrationError(f"degenerate edge ({i}, {j})")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class CycleChain:
    """An F2 1-chain, stored as its set of edges (i, j) with i < j."""

    edges: frozenset

    def __init__(self, edges: Iterable = ()):
        object.__setattr__(self, "edges", frozenset(_edge(i, j) for i, j in edges))

    @property
    def vertex_set(self) -> frozenset:
        return frozenset(v for e in self.edges for v in e)

    def sorted_vertices(self) -> list[int]:
        return sorted(self.vertex_set)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def degrees(self) -> dict[int, int]:
        deg: dict[int, int] = {}
        for i, j in self.edges:
            deg[i] = deg.get(i, 0) + 1
            deg[j] = deg.get(j, 0) + 1
        return deg

    def is_cycle(self) -> bool:
        """Zero boundary over F2: every vertex has even degree."""
        return all(k % 2 == 0 for k in self.degrees().values())

    def length(self, d: np.ndarray) -> float:
        return float(sum(d[i, j] for i, j in self.sorted_edges()))

    def __len__(self) -> int:
        return len(self.edges)

    def __bool__(self) -> bool:
        return bool(self.edges)


def sum_chains(a: CycleChain, b: CycleChain) -> CycleChain:
    return CycleChain(a.edges ^ b.edges)


def triangle_boundary(i: int, j: int, k: int) -> CycleChain:
    return CycleChain([(i, j), (i, k), (j, k)])


# ---------------------------------------------------------------------------
# filtration
# ---------------------------------------------------------------------------

class Filtration:
    """Rips filtration of vertices, edges and triangles.

    Simplices are totally ordered by (value, dimension, vertex tuple).
    Edges and triangles are held in separate arrays, each in that order;
    ``global_index`` recovers positions in the merged order.
    """

    def __init__(self, d: np.ndarray, max_scale: float | None = None):
        d = np.asarray(d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise FiltrationError("distance matrix must be square")
        if not np.array_equal(d, d.T) or np.any(np.diag(d) != 0):
            raise FiltrationError("distance matrix must be symmetric with zero diagonal")
        n = d.shape[0]
        if max_scale is None:
            # beyond the enclosing radius every new cycle dies at birth, so the
            # positive-persistence diagram and its representatives match the
            # full-diameter filtration
            max_scale = enclosing_radius(d) if n > 1 else 0.0
        elif max_scale <= 0:
            raise FiltrationError("max_scale must be positive")
        self.d = d
        self.n = n
        self.max_scale = float(max_scale)

        iu, ju = np.triu_indices(n, k=1)
        vals = d[iu, ju]
        keep = vals <= self.max_scale
        iu, ju, vals = iu[keep], ju[keep], vals[keep]
        order = np.lexsort((ju, iu, vals))
        self.edges = np.column_stack([iu[order], ju[order]]).astype(np.int64)
        self.edge_values = vals[order]
        self.edge_index = np.full((n, n), -1, dtype=np.int64)
        pos = np.arange(len(self.edges))
        self.edge_index[self.edges[:, 0], self.edges[:, 1]] = pos
        self.edge_index[self.edges[:, 1], self.edges[:, 0]] = pos

        self.triangles, self.triangle_values = self._triangles()
        t = self.triangles
        te = np.column_stack([
            self.edge_index[t[:, 0], t[:, 1]],
            self.edge_index[t[:, 0], t[:, 2]],
            self.edge_index[t[:, 1], t[:, 2]],
        ])
        te.sort(axis=1)
        self.triangle_edges = te

    def _triangles(self) -> tuple[np.ndarray, np.ndarray]:
        adj = self.edge_index >= 0
        chunks = []
        for i in range(self.n):
            nb = np.flatnonzero(adj[i, i + 1:]) + i + 1
            if nb.size < 2:
                continue
            sub = adj[np.ix_(nb, nb)]
            a, b = np.nonzero(np.triu(sub, k=1))
            if a.size:
                chunks.append(np.column_stack([np.full(a.size, i), nb[a], nb[b]]))
        if not chunks:
            return np.zeros((0, 3), dtype=np.int64), np.zeros(0)
        tri = np.vstack(chunks).astype(np.int64)
        d = self.d
        vals = np.maximum(
            np.maximum(d[tri[:, 0], tri[:, 1]], d[tri[:, 0], tri[:, 2]]),
            d[tri[:, 1], tri[:, 2]],
        )
        order = np.lexsort((tri[:, 2], tri[:, 1], tri[:, 0], vals))
        return tri[order], vals[order]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def __len__(self) -> int:
        return self.n + self.n_edges + self.n_triangles

    def edge_global_index(self, e) -> np.ndarray:
        e = np.asarray(e)
        # triangles with an equal value come after the edge
        return self.n + e + np.searchsorted(self.triangle_values, self.edge_values[e], side="left")

    def triangle_global_index(self, t) -> np.ndarray:
        t = np.asarray(t)
        return self.n + t + np.searchsorted(self.edge_values, self.triangle_values[t], side="right")

    def simplices(self) -> list[tuple[tuple[int, ...], float]]:
        """All simplices with values, in filtration order (small inputs only)."""
        out = [((v,), 0.0) for v in range(self.n)]
        out += [((int(i), int(j)), float(x)) for (i, j), x in zip(self.edges, self.edge_values)]
        out += [(tuple(int(v) for v in t), float(x)) for t, x in zip(self.triangles, self.triangle_values)]
        out.sort(key=lambda s: (s[1], len(s[0]), s[0]))
        return out

    def edge_position(self, i: int, j: int) -> int:
        return int(self.edge_index[i, j])

    def chain_to_positions(self, chain: CycleChain) -> set[int]:
        pos = set()
        for i, j in chain.edges:
            p = self.edge_index[i, j]
            if p < 0:
                raise FiltrationError(f"edge ({i}, {j}) is not in the filtration")
            pos.add(int(p))
        return pos

    def positions_to_chain(self, positions: Iterable[int]) -> CycleChain:
        return CycleChain(tuple(self.edges[p]) for p in positions)

    @cached_property
    def reduction(self) -> "Reduction":
        return self.reduce(clearing=True)

    def reduce(self, clearing: bool = True) -> "Reduction":
        """Boundary-matrix reduction; ``clearing`` skips apparent positive
        triangles, which does not change any non-zero reduced column."""
        if clearing and self.n_triangles:
            skip = apparent_positive_triangles(self.triangles, self.triangle_values, self.d)
        else:
            skip = np.zeros(self.n_triangles, dtype=np.bool_)
        owner, ptr, length, buf = reduce_boundary(
            np.ascontiguousarray(self.triangle_edges), self.n_edges, skip
        )
        return Reduction(owner, ptr, length, buf)


def build_filtration(d: np.ndarray, max_scale: float | None = None) -> Filtration:
    return Filtration(d, max_scale)


@dataclass(frozen=True)
class Reduction:
    pivot_owner: np.ndarray
    col_ptr: np.ndarray
    col_len: np.ndarray
    buffer: np.ndarray

    def column(self, t: int) -> np.ndarray:
        p = self.col_ptr[t]
        return self.buffer[p:p + self.col_len[t]]


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PersistencePair:
    birth: float
    death: float
    birth_edge: int
    death_triangle: int
    birth_index: int
    death_index: int

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class PersistenceDiagram:
    pairs: tuple
    essential_births: tuple = ()

    def __len__(self) -> int:
        return len(self.pairs)

    def as_array(self) -> np.ndarray:
        return np.array([[p.birth, p.death] for p in self.pairs]).reshape(-1, 2)


def _positive_edges(f: Filtration) -> np.ndarray:
    parent = list(range(f.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    positive = np.zeros(f.n_edges, dtype=bool)
    for e, (i, j) in enumerate(f.edges.tolist()):
        ri, rj = find(i), find(j)
        if ri == rj:
            positive[e] = True
        else:
            parent[max(ri, rj)] = min(ri, rj)
    return positive


def persistence_dim1(f: Filtration):
    """Dimension-1 diagram and the matching reduction representatives.

    Returns ``(diagram, generators)`` where ``generators[k]`` is the reduced
    boundary column of the triangle that kills pair ``k``.
    """
    red = f.reduction
    deaths = np.flatnonzero(red.col_len > 0)
    pairs, gens = [], []
    for t in deaths:
        col = red.column(t)
        e = int(col[-1])
        birth, death = float(f.edge_values[e]), float(f.triangle_values[t])
        if death <= birth:
            continue
        pairs.append(PersistencePair(
            birth, death, e, int(t),
            int(f.edge_global_index(e)), int(f.triangle_global_index(t)),
        ))
        gens.append(f.positions_to_chain(col.tolist()))
    positive = _positive_edges(f)
    essential = np.flatnonzero(positive & (red.pivot_owner < 0))
    diagram = PersistenceDiagram(
        tuple(pairs), tuple(float(f.edge_values[e]) for e in essential)
    )
    return diagram, gens


def reduce_chain(positions: set[int], eps: float, f: Filtration) -> set[int]:
    """Eliminate pivots using reduced columns of triangles with value <= eps."""
    red = f.reduction
    work = set(positions)
    while work:
        low = max(work)
        t = red.pivot_owner[low]
        if t < 0 or f.triangle_values[t] > eps:
            break
        work.symmetric_difference_update(red.column(t).tolist())
    return work


def is_boundary_at(chain: CycleChain, eps: float, f: Filtration) -> bool:
    """True iff ``chain`` is an F2 boundary in the complex at scale ``eps``."""
    positions = f.chain_to_positions(chain)
    for p in positions:
        if f.edge_values[p] > eps:
            i, j = f.edges[p]
            raise FiltrationError(
                f"edge ({i}, {j}) enters at {f.edge_values[p]!r}, after scale {eps!r}"
            )
    return not reduce_chain(positions, eps, f)
