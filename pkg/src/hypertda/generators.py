"""Generator policies for dimension-1 persistence pairs.

``reduction`` keeps the reduced boundary columns. ``minimal`` replaces each
by a shortest homologous cycle at the birth scale (LP over the reals, exact
F2 integer program when the LP answer is not usable) and then shortens index
jumps by inserting intermediate curve vertices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .ph import (
    CycleChain,
    Filtration,
    PersistenceDiagram,
    is_boundary_at,
    sum_chains,
    triangle_boundary,
)

log = logging.getLogger(__name__)

POLICIES = ("reduction", "minimal")
ROUND_TOL = 1e-6


class GeneratorError(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorSet:
    policy: str
    generators: tuple
    # per-pair flag: the chain is not a single simple loop
    non_loop: tuple = field(default=())
    # per-pair flag: the exact F2 program replaced the LP answer
    used_fallback: tuple = field(default=())

    def __len__(self) -> int:
        return len(self.generators)


def is_simple_loop(chain: CycleChain) -> bool:
    if not chain:
        return False
    deg = chain.degrees()
    if any(k != 2 for k in deg.values()):
        return False
    adj: dict[int, list[int]] = {}
    for i, j in chain.edges:
        adj.setdefault(i, []).append(j)
        adj.setdefault(j, []).append(i)
    start = next(iter(adj))
    seen, stack = {start}, [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


def eulerian_orientation(chain: CycleChain) -> list[tuple[int, int]]:
    """Orient the edges of an even-degree chain so in-degree = out-degree."""
    adj: dict[int, list[tuple[int, int]]] = {}
    for i, j in chain.sorted_edges():
        adj.setdefault(i, []).append((j, (i, j)))
        adj.setdefault(j, []).append((i, (i, j)))
    for v in adj:
        adj[v].sort(reverse=True)
    used: set = set()
    oriented = []
    for start in sorted(adj):
        # walk closed trails from ``start`` until its edges are exhausted
        while True:
            while adj[start] and adj[start][-1][1] in used:
                adj[start].pop()
            if not adj[start]:
                break
            v = start
            while True:
                while adj[v] and adj[v][-1][1] in used:
                    adj[v].pop()
                if not adj[v]:
                    break
                w, e = adj[v].pop()
                used.add(e)
                oriented.append((v, w))
                v = w
    return oriented


IPM_MIN_TRIANGLES = 20_000


def _alive_prefix(f: Filtration, scale: float) -> tuple[int, int]:
    m = int(np.searchsorted(f.edge_values, scale, side="right"))
    t = int(np.searchsorted(f.triangle_values, scale, side="right"))
    return m, t


def _boundary_matrix(f: Filtration, m: int, t: int, oriented: bool) -> sp.csc_matrix:
    # triangle (i, j, k), i < j < k: boundary = (j, k) - (i, k) + (i, j)
    tri = f.triangles[:t]
    ei = f.edge_index
    rows = np.concatenate([ei[tri[:, 1], tri[:, 2]], ei[tri[:, 0], tri[:, 2]], ei[tri[:, 0], tri[:, 1]]])
    cols = np.tile(np.arange(t), 3)
    if oriented:
        vals = np.concatenate([np.ones(t), -np.ones(t), np.ones(t)])
    else:
        vals = np.ones(3 * t)
    return sp.csc_matrix((vals, (rows, cols)), shape=(m, t))


def _lp_minimize(g: CycleChain, f: Filtration, birth: float):
    m, t = _alive_prefix(f, birth)
    w = f.edge_values[:m]
    rhs = np.zeros(m)
    for i, j in eulerian_orientation(g):
        p = f.edge_index[i, j]
        if p < 0 or p >= m:
            raise GeneratorError(f"edge ({i}, {j}) is not alive at scale {birth!r}")
        rhs[p] += 1.0 if i < j else -1.0
    bd = _boundary_matrix(f, m, t, oriented=True)
    eye = sp.identity(m, format="csc")
    A = sp.hstack([eye, -eye, -bd], format="csc")
    c = np.concatenate([w, w, np.zeros(t)])
    bounds = [(0, None)] * (2 * m) + [(None, None)] * t
    # dual simplex stalls on the huge, degenerate programs of late births;
    # interior point plus crossover still ends on a vertex
    method = "highs-ipm" if t > IPM_MIN_TRIANGLES else "highs"
    res = linprog(c, A_eq=A, b_eq=rhs, bounds=bounds, method=method)
    if res.status != 0:
        raise GeneratorError(f"length LP failed at scale {birth!r}: {res.message}")
    z = res.x[:m] - res.x[m:2 * m]
    return z, float(res.fun)


def _f2_minimize(g: CycleChain, f: Filtration, birth: float) -> CycleChain:
    """Exact shortest F2 cycle homologous to ``g`` at ``birth`` (MILP)."""
    m, t = _alive_prefix(f, birth)
    w = f.edge_values[:m]
    gvec = np.zeros(m)
    for p in f.chain_to_positions(g):
        gvec[p] = 1.0
    bd = _boundary_matrix(f, m, t, oriented=False)
    deg = np.asarray(bd.sum(axis=1)).ravel()
    eye = sp.identity(m, format="csc")
    # x + 2 k - bd @ y = g with x, y binary and k integer
    A = sp.hstack([eye, 2 * eye, -bd], format="csc")
    c = np.concatenate([w, np.zeros(m), np.zeros(t)])
    lb = np.zeros(2 * m + t)
    ub = np.concatenate([np.ones(m), np.floor((deg + 1) / 2), np.ones(t)])
    res = milp(
        c,
        constraints=LinearConstraint(A, gvec, gvec),
        integrality=np.ones(2 * m + t),
        bounds=Bounds(lb, ub),
        options={"mip_rel_gap": 0.0},
    )
    if res.status != 0:
        raise GeneratorError(f"F2 length program failed at scale {birth!r}: {res.message}")
    x = np.flatnonzero(np.round(res.x[:m]) == 1)
    return f.positions_to_chain(x.tolist())


def length_minimize(
    reduction_gen: CycleChain, birth: float, f: Filtration
) -> tuple[CycleChain, bool]:
    """Shortest cycle homologous to ``reduction_gen`` at scale ``birth``.

    Returns the chain and whether the exact F2 fallback was needed.
    """
    z, _ = _lp_minimize(reduction_gen, f, birth)
    zr = np.round(z)
    usable = np.all(np.abs(z - zr) <= ROUND_TOL) and np.all(np.abs(zr) <= 1)
    if usable:
        cand = f.positions_to_chain(np.flatnonzero(zr != 0).tolist())
        if cand.is_cycle() and is_boundary_at(sum_chains(cand, reduction_gen), birth, f):
            return cand, False
    log.info("LP answer unusable at scale %r; solving the F2 program", birth)
    cand = _f2_minimize(reduction_gen, f, birth)
    if not is_boundary_at(sum_chains(cand, reduction_gen), birth, f):
        raise GeneratorError("F2 program returned a non-homologous cycle")
    return cand, True


def jump_total(chain: CycleChain) -> int:
    """Number of curve indices skipped between consecutive chain vertices."""
    v = chain.sorted_vertices()
    return int(sum(b - a - 1 for a, b in zip(v, v[1:])))


def _jump_pass(edges: set, birth: float, f: Filtration) -> bool:
    ev = f.edge_values
    ei = f.edge_index

    def alive(i, j):
        p = ei[i, j]
        return p >= 0 and ev[p] <= birth

    verts = sorted({v for e in edges for v in e})
    changed = False
    i = 0
    while i < len(verts) - 1:
        a, c = verts[i], verts[i + 1]
        if c - a > 1 and (a, c) in edges:
            for v in range(a + 1, c):
                if not (alive(a, v) and alive(v, c)):
                    continue
                if is_boundary_at(triangle_boundary(a, v, c), birth, f):
                    edges.remove((a, c))
                    edges.add((a, v))
                    edges.add((v, c))
                    verts.insert(i + 1, v)
                    changed = True
                    break
        i += 1
    return changed


def jump_minimize(gen: CycleChain, birth: float, f: Filtration) -> CycleChain:
    """Insert skipped curve vertices while the class at ``birth`` is kept.

    One pass walks the sorted vertices from the lowest index. When
    consecutive vertices a < c with c - a > 1 are joined by an edge of the
    chain, the candidates a < v < c are tried in increasing order; v is
    accepted if the triangle boundary [a, v, c] is trivial at ``birth`` and
    the walk resumes from v. Passes repeat until one changes nothing, so the
    result is a fixed point (each changing pass lowers the jump total).
    """
    edges = set(gen.edges)
    while _jump_pass(edges, birth, f):
        pass
    return CycleChain(edges)


def compute_generators(
    policy: str,
    diagram: PersistenceDiagram,
    reduction_gens,
    f: Filtration,
) -> GeneratorSet:
    if policy not in POLICIES:
        raise ValueError(f"unknown generator policy {policy!r}; choose from {POLICIES}")
    if len(reduction_gens) != len(diagram.pairs):
        raise GeneratorError("generators and diagram pairs are misaligned")
    fallback = []
    if policy == "reduction":
        gens = list(reduction_gens)
        fallback = [False] * len(gens)
    else:
        gens = []
        for pair, g in zip(diagram.pairs, reduction_gens):
            shortest, used = length_minimize(g, pair.birth, f)
            gens.append(jump_minimize(shortest, pair.birth, f))
            fallback.append(used)
    return GeneratorSet(
        policy,
        tuple(gens),
        tuple(not is_simple_loop(g) for g in gens),
        tuple(fallback),
    )
