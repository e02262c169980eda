"""Clique-expansion flattening, Louvain communities, the community matrix,
and community-level geometric metrics."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import networkx as nx
import numpy as np

from .curves import Curve, radius_of_gyration
from .hypergraph import PHHypergraph
from .stats import mann_whitney

EPS_GUARD = 1e-9
MEMBERSHIP_THRESHOLD = 0.5
FLATTEN_WEIGHTS = ("count", "persistence")


class CommunityError(ValueError):
    pass


def flatten(h: PHHypergraph, weight: str = "count") -> nx.Graph:
    """Replace every hyperedge by a clique.

    Edge weights add up over hyperedges: +1 per shared hyperedge for
    ``count``, + the hyperedge persistence for ``persistence``.
    """
    if weight not in FLATTEN_WEIGHTS:
        raise ValueError(f"unknown flatten weight {weight!r}")
    g = nx.Graph()
    g.add_nodes_from(range(h.n_nodes))
    for e, w in zip(h.hyperedges, h.weights):
        inc = 1.0 if weight == "count" else float(w)
        for u, v in combinations(sorted(e), 2):
            if g.has_edge(u, v):
                g[u][v]["weight"] += inc
            else:
                g.add_edge(u, v, weight=inc)
    return g


@dataclass(frozen=True)
class CommunityMatrix:
    """n x k membership matrix; rows of singleton nodes are all zero."""

    M: np.ndarray
    singletons: tuple

    @property
    def k(self) -> int:
        return self.M.shape[1]

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def labels(self) -> np.ndarray:
        """Hard labels by largest membership; -1 for all-zero rows."""
        lab = np.full(self.n, -1, dtype=np.int64)
        if self.k:
            best = self.M.argmax(axis=1)
            has = self.M.max(axis=1) > 0
            lab[has] = best[has]
        return lab

    def members(self, j: int) -> np.ndarray:
        """Vertex indices of column ``j`` after thresholding at 0.5."""
        col = self.M[:, j]
        if np.all((col == 0) | (col == 1)):
            return np.flatnonzero(col)
        return np.flatnonzero(col > MEMBERSHIP_THRESHOLD)

    def comembership(self) -> np.ndarray:
        return self.M @ self.M.T

    def to_json(self) -> dict:
        cols = []
        binary = np.all((self.M == 0) | (self.M == 1))
        for j in range(self.k):
            nz = np.flatnonzero(self.M[:, j])
            if binary:
                cols.append([int(i) for i in nz])
            else:
                cols.append([[int(i), float(self.M[i, j])] for i in nz])
        return {"k": self.k, "columns": cols, "singletons": list(self.singletons)}


def modularity(g: nx.Graph, communities, resolution: float = 1.0) -> float:
    if g.number_of_edges() == 0:
        return 0.0
    return float(nx.community.modularity(g, communities, weight="weight", resolution=resolution))


def louvain(g: nx.Graph, seed: int = 0, resolution: float = 1.0) -> CommunityMatrix:
    """Louvain partition; isolated nodes are reported as singletons."""
    n = g.number_of_nodes()
    isolated = sorted(v for v in g.nodes if g.degree(v) == 0)
    sub = g.subgraph([v for v in g.nodes if g.degree(v) > 0])
    if sub.number_of_edges() == 0:
        return CommunityMatrix(np.zeros((n, 0)), tuple(isolated))
    parts = nx.community.louvain_communities(
        sub, weight="weight", resolution=resolution, seed=seed
    )
    # columns ordered by smallest member so output does not depend on set order
    parts = sorted((sorted(p) for p in parts), key=lambda p: p[0])
    M = np.zeros((n, len(parts)))
    for j, p in enumerate(parts):
        M[p, j] = 1.0
    return CommunityMatrix(M, tuple(isolated))


def partition_of(cm: CommunityMatrix) -> list[set]:
    """Hard partition of all nodes; unassigned nodes become singleton blocks."""
    lab = cm.labels()
    parts = [set(np.flatnonzero(lab == j).tolist()) for j in range(cm.k)]
    parts = [p for p in parts if p]
    parts += [{int(i)} for i in np.flatnonzero(lab == -1)]
    return parts


@dataclass(frozen=True)
class CommunityMetrics:
    size: np.ndarray
    volume: np.ndarray
    geodesic_size: np.ndarray
    pairwise_p: np.ndarray
    ambient_assortativity: float
    intrinsic_assortativity: float

    def to_json(self) -> dict:
        per = [
            {"size": float(s), "volume": float(v), "geodesic_size": int(gs)}
            for s, v, gs in zip(self.size, self.volume, self.geodesic_size)
        ]
        return {
            "per_community": per,
            "pairwise_p": [[float(x) for x in row] for row in self.pairwise_p],
            "ambient_assortativity": self.ambient_assortativity,
            "intrinsic_assortativity": self.intrinsic_assortativity,
        }


def geodesic_intersection(col_a, col_b) -> float:
    """Two-sided Mann-Whitney p-value between two communities' vertex indices."""
    a = _column_members(col_a)
    b = _column_members(col_b)
    if a.size < 1 or b.size < 1:
        raise CommunityError("geodesic intersection needs non-empty communities")
    return mann_whitney(a, b)


def _column_members(col) -> np.ndarray:
    col = np.asarray(col, dtype=float)
    if np.all((col == 0) | (col == 1)):
        return np.flatnonzero(col)
    return np.flatnonzero(col > MEMBERSHIP_THRESHOLD)


def community_metrics(cm: CommunityMatrix, curve: Curve) -> CommunityMetrics:
    if cm.n != curve.n:
        raise CommunityError(f"community matrix has {cm.n} rows, curve has {curve.n} vertices")
    k = cm.k
    size = cm.M.sum(axis=0) if k else np.zeros(0)
    volume = np.zeros(k)
    geo = np.zeros(k, dtype=np.int64)
    members = [cm.members(j) for j in range(k)]
    for j, idx in enumerate(members):
        if idx.size:
            volume[j] = radius_of_gyration(curve.points[idx])
            geo[j] = int(idx.max() - idx.min())
    p = np.ones((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            if members[a].size and members[b].size:
                p[a, b] = p[b, a] = mann_whitney(members[a], members[b])
            else:
                p[a, b] = p[b, a] = np.nan
    non_singleton = np.array([m.size > 1 for m in members], dtype=bool)
    if non_singleton.any():
        ambient = float(np.mean(size[non_singleton] / np.maximum(volume[non_singleton], EPS_GUARD)))
    else:
        ambient = float("nan")
    intrinsic = float(np.mean(size / np.maximum(geo, EPS_GUARD))) if k else float("nan")
    return CommunityMetrics(size, volume, geo, p, ambient, intrinsic)
