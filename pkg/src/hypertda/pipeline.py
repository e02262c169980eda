"""Curve -> diagram -> generators -> hypergraph -> centrality / communities."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import curves as ck
from .communities import (
    CommunityMatrix,
    CommunityMetrics,
    community_metrics,
    flatten,
    louvain,
    modularity,
    partition_of,
)
from .config import RunConfig
from .generators import GeneratorSet, compute_generators
from .hypergraph import CentralityVector, PHHypergraph, build_hypergraph, centrality_max
from .io import write_csv, write_json
from .ph import Filtration, PersistenceDiagram, build_filtration, persistence_dim1
from .stats import StatsError, pearson

log = logging.getLogger(__name__)


@dataclass
class CurveAnalysis:
    curve: ck.Curve
    working_curve: ck.Curve  # interpolated curve when interpolation is on
    imap: ck.InterpolationMap | None
    filtration: Filtration
    diagram: PersistenceDiagram
    generators: GeneratorSet
    hypergraph: PHHypergraph | None = None
    centrality: CentralityVector | None = None
    centrality_on_curve: np.ndarray | None = None
    communities: CommunityMatrix | None = None  # on the working curve
    communities_on_curve: CommunityMatrix | None = None
    modularity: float = float("nan")
    metrics: CommunityMetrics | None = None

    @property
    def trivial(self) -> bool:
        return len(self.diagram) == 0

    def labels(self) -> np.ndarray:
        if self.communities_on_curve is None:
            return np.full(self.curve.n, -1, dtype=np.int64)
        return self.communities_on_curve.labels()

    def centrality_values(self) -> np.ndarray:
        if self.centrality_on_curve is None:
            return np.zeros(self.curve.n)
        return self.centrality_on_curve


def analyze_curve(curve: ck.Curve, cfg: RunConfig, policy: str | None = None) -> CurveAnalysis:
    policy = policy or cfg.policy
    imap = None
    work = curve
    if cfg.interpolate_to:
        work, imap = ck.interpolate(curve, cfg.interpolate_to)
    f = build_filtration(ck.distance_matrix(work), cfg.max_scale)
    diagram, red_gens = persistence_dim1(f)
    gens = compute_generators(policy, diagram, red_gens, f)
    res = CurveAnalysis(curve, work, imap, f, diagram, gens)
    if res.trivial:
        return res
    h = build_hypergraph(work.n, diagram, gens.generators)
    cent = centrality_max(h, cfg.p_norm, cfg.tol, cfg.max_iter)
    g = flatten(h, cfg.flatten_weight)
    cm = louvain(g, cfg.seed, cfg.resolution)
    res.hypergraph = h
    res.centrality = cent
    res.communities = cm
    res.modularity = modularity(g, partition_of(cm), cfg.resolution) if cm.k else 0.0
    if imap is None:
        res.centrality_on_curve = cent.values
        res.communities_on_curve = cm
    else:
        res.centrality_on_curve = ck.uninterpolate(imap, cent.values)
        M = ck.uninterpolate(imap, cm.M, average=True)
        res.communities_on_curve = CommunityMatrix(
            M, tuple(int(i) for i in np.flatnonzero(M.sum(axis=1) == 0))
        )
    res.metrics = community_metrics(res.communities_on_curve, curve)
    return res


def _safe_pearson(x, y) -> float:
    try:
        return pearson(x, y)
    except StatsError:
        return float("nan")


def geometry_correlations(res: CurveAnalysis, density_radius: float = 2.0) -> dict:
    """Correlations of centrality with curve descriptors and of community
    co-membership with pairwise distance."""
    curve = res.curve
    out = {}
    c = res.centrality_values()
    if curve.n >= 4:
        out["centrality_curvature"] = _safe_pearson(c, ck.curvature(curve))
        out["centrality_torsion"] = _safe_pearson(c, ck.torsion(curve))
    out["centrality_density"] = _safe_pearson(c, ck.density(curve, density_radius))
    if res.communities_on_curve is not None:
        co = res.communities_on_curve.comembership() > 0
        iu = np.triu_indices(curve.n, k=1)
        out["comembership_distance"] = _safe_pearson(
            co[iu].astype(float), ck.distance_matrix(curve)[iu]
        )
    else:
        out["comembership_distance"] = float("nan")
    return out


def diagram_json(diagram: PersistenceDiagram, generators) -> dict:
    pairs = []
    for p, g in zip(diagram.pairs, generators):
        pairs.append({
            "birth": p.birth,
            "death": p.death,
            "persistence": p.persistence,
            "birth_index": p.birth_index,
            "death_index": p.death_index,
            "generator_vertices": g.sorted_vertices(),
            "generator_edges": [list(e) for e in g.sorted_edges()],
        })
    return {"pairs": pairs, "essential_births": list(diagram.essential_births)}


def generators_json(gs: GeneratorSet, diagram: PersistenceDiagram) -> dict:
    out = diagram_json(diagram, gs.generators)
    out["policy"] = gs.policy
    for entry, nl, fb in zip(out["pairs"], gs.non_loop, gs.used_fallback):
        entry["non_loop"] = nl
        entry["f2_fallback"] = fb
    return out


def bundle(res: CurveAnalysis, cfg: RunConfig, name: str, command: str = "analyze") -> dict:
    b = cfg.metadata(command)
    b["curve"] = {
        "name": name,
        "n": res.curve.n,
        "n_working": res.working_curve.n,
        "interpolated": res.imap is not None,
    }
    b["trivial_ph"] = res.trivial
    b["filtration"] = {
        "max_scale": res.filtration.max_scale,
        "n_edges": res.filtration.n_edges,
        "n_triangles": res.filtration.n_triangles,
    }
    b["generators"] = generators_json(res.generators, res.diagram)
    if res.trivial:
        return b
    b["hypergraph"] = res.hypergraph.to_json()
    b["centrality"] = res.centrality.to_json()
    if res.imap is not None:
        b["centrality"]["values_on_curve"] = res.centrality_on_curve
    comm = res.communities_on_curve.to_json()
    comm["seed"] = cfg.seed
    comm["modularity"] = res.modularity
    comm["metrics"] = res.metrics.to_json()
    b["communities"] = comm
    b["correlations"] = geometry_correlations(res, cfg.density_radius)
    return b


def summary_row(b: dict) -> dict:
    row = {
        "name": b["curve"]["name"],
        "n": b["curve"]["n"],
        "trivial_ph": b["trivial_ph"],
        "n_pairs": len(b["generators"]["pairs"]),
    }
    if not b["trivial_ph"]:
        m = b["communities"]["metrics"]
        row.update({
            "k": b["communities"]["k"],
            "modularity": b["communities"]["modularity"],
            "ambient_assortativity": m["ambient_assortativity"],
            "intrinsic_assortativity": m["intrinsic_assortativity"],
            **b["correlations"],
        })
    return row


SUMMARY_COLUMNS = [
    "name", "n", "trivial_ph", "n_pairs", "k", "modularity",
    "ambient_assortativity", "intrinsic_assortativity", "centrality_curvature",
    "centrality_torsion", "centrality_density", "comembership_distance",
]


def load_curve(path, cfg: RunConfig) -> ck.Curve:
    return ck.read_curve_csv(path, cfg.time_as_z, cfg.time_step)


def _analyze_path(args) -> dict:
    path, cfg = args
    curve = load_curve(path, cfg)
    return bundle(analyze_curve(curve, cfg), cfg, Path(path).stem)


def run_pipeline(cfg: RunConfig) -> list[dict]:
    """Analyse every input curve; writes one bundle per curve and a summary."""
    out = Path(cfg.out_dir)
    tasks = [(p, cfg) for p in cfg.inputs]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            bundles = list(ex.map(_analyze_path, tasks))
    else:
        bundles = [_analyze_path(t) for t in tasks]
    for b in bundles:
        write_json(out / f"{b['curve']['name']}.bundle.json", b)
        if b["trivial_ph"]:
            log.warning("%s has trivial dimension-1 PH; hypergraph stages skipped", b["curve"]["name"])
    rows = [summary_row(b) for b in bundles]
    write_csv(
        out / "summary.csv",
        SUMMARY_COLUMNS,
        [[r.get(c, float("nan")) for c in SUMMARY_COLUMNS] for r in rows],
        cfg.metadata("analyze"),
    )
    return bundles
