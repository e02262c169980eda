"""Persistence-weighted hypergraph of generators and its max-flavour node
centrality."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .ph import PersistenceDiagram


class HypergraphError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class PHHypergraph:
    n_nodes: int
    hyperedges: tuple  # tuple of sorted vertex tuples
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.hyperedges):
            raise HypergraphError("one weight per hyperedge is required")
        if np.any(w <= 0):
            raise HypergraphError("hyperedge weights must be positive")
        for e in self.hyperedges:
            if not e:
                raise HypergraphError("empty hyperedge")
            if min(e) < 0 or max(e) >= self.n_nodes:
                raise HypergraphError(f"hyperedge {e} out of range for {self.n_nodes} nodes")
        object.__setattr__(self, "weights", w)

    @property
    def n_edges(self) -> int:
        return len(self.hyperedges)

    def incidence(self) -> sp.csr_matrix:
        """Binary (hyperedges x nodes) incidence matrix."""
        rows = [k for k, e in enumerate(self.hyperedges) for _ in e]
        cols = [v for e in self.hyperedges for v in e]
        return sp.csr_matrix(
            (np.ones(len(cols)), (rows, cols)), shape=(self.n_edges, self.n_nodes)
        )

    def covered(self) -> np.ndarray:
        mask = np.zeros(self.n_nodes, dtype=bool)
        for e in self.hyperedges:
            mask[list(e)] = True
        return mask

    def to_json(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "hyperedges": [list(e) for e in self.hyperedges],
            "weights": [float(x) for x in self.weights],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PHHypergraph":
        return cls(
            int(obj["n_nodes"]),
            tuple(tuple(sorted(int(v) for v in e)) for e in obj["hyperedges"]),
            np.asarray(obj["weights"], dtype=float),
        )


def build_hypergraph(n_nodes: int, diagram: PersistenceDiagram, generators) -> PHHypergraph:
    if len(generators) != len(diagram.pairs):
        raise HypergraphError(
            f"{len(diagram.pairs)} pairs but {len(generators)} generators"
        )
    edges = tuple(tuple(g.sorted_vertices()) for g in generators)
    weights = np.array([p.death - p.birth for p in diagram.pairs], dtype=float)
    return PHHypergraph(n_nodes, edges, weights)


@dataclass(frozen=True)
class CentralityVector:
    values: np.ndarray
    covered: np.ndarray
    iterations: int
    residual: float

    def to_json(self) -> dict:
        return {
            "values": [float(x) for x in self.values],
            "covered": [bool(x) for x in self.covered],
            "iterations": self.iterations,
            "residual": self.residual,
        }


def centrality_step(c: np.ndarray, B: sp.csr_matrix, w: np.ndarray, p: float) -> np.ndarray:
    """One update of the max-flavour iteration (un-normalised)."""
    # p-norm over members scaled by the edge weight, a smooth maximum;
    # factoring out each edge's largest member avoids underflow of c**p
    M = B.multiply(c[None, :]).tocsr()
    top = M.max(axis=1).toarray().ravel()
    rows = np.repeat(np.arange(M.shape[0]), np.diff(M.indptr))
    safe = np.where(top > 0, top, 1.0)
    M.data = np.power(M.data / safe[rows], p)
    edge = w * top * np.power(np.asarray(M.sum(axis=1)).ravel(), 1.0 / p)
    # square root makes the map 1/2-homogeneous: a contraction on the positive
    # cone, so disconnected hypergraphs still have one positive fixed point
    return np.sqrt(B.T @ edge)


def centrality_max(
    h: PHHypergraph, p_norm: float = 10.0, tol: float = 1e-8, max_iter: int = 1000
) -> CentralityVector:
    if h.n_edges == 0:
        raise HypergraphError("centrality needs at least one hyperedge")
    B = h.incidence()
    cov = h.covered()
    c = np.zeros(h.n_nodes)
    c[cov] = 1.0 / cov.sum()
    w = h.weights
    # rescaling w only rescales the unnormalised step by sqrt(scale)
    w = w / w.max()
    residual = np.inf
    for it in range(1, max_iter + 1):
        new = centrality_step(c, B, w, p_norm)
        new /= new.sum()
        residual = float(np.abs(new - c).sum())
        c = new
        if residual < tol:
            return CentralityVector(c, cov, it, residual)
    raise ConvergenceError(
        f"centrality did not converge in {max_iter} iterations (residual {residual:.3e})",
        residual,
        max_iter,
    )
