"""Experiment harnesses: noise robustness, generator-policy comparison and
feature export for external classifiers."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import curves as ck
from .config import RunConfig
from .io import write_csv, write_json
from .pipeline import CurveAnalysis, analyze_curve, load_curve
from .stats import StatsError, ami, canonical_labels, concatenated_ks, mann_whitney, pearson


def _corr(a, b) -> float:
    try:
        return pearson(a, b)
    except StatsError:
        # constant vectors: identical ones agree perfectly
        return 1.0 if np.array_equal(a, b) else float("nan")


def _ami(a, b, drop_singletons: bool) -> float:
    # identical partitions agree perfectly even when ami() has no information
    # to work with (a single community)
    if np.array_equal(canonical_labels(a), canonical_labels(b)):
        return 1.0
    return ami(a, b, drop_singletons)


def compare_analyses(a: CurveAnalysis, b: CurveAnalysis, drop_singletons: bool = False) -> dict:
    if a.trivial or b.trivial:
        return {"centrality_correlation": float("nan"), "ami": float("nan")}
    return {
        "centrality_correlation": _corr(a.centrality_values(), b.centrality_values()),
        "ami": _ami(a.labels(), b.labels(), drop_singletons),
    }


def _quantiles(x) -> dict:
    x = np.asarray([v for v in x if np.isfinite(v)], dtype=float)
    if x.size == 0:
        return {"count": 0, "median": None, "q25": None, "q75": None}
    return {
        "count": int(x.size),
        "median": float(np.median(x)),
        "q25": float(np.quantile(x, 0.25)),
        "q75": float(np.quantile(x, 0.75)),
    }


def perturbation_seed(seed: int, curve_index: int, variant_index: int) -> int:
    ss = np.random.SeedSequence([seed, curve_index, variant_index])
    return int(ss.generate_state(1)[0])


def robustness(curves: list, names: list, cfg: RunConfig) -> dict:
    """Compare each curve's analysis with its perturbed and smoothed variants."""
    rows = []
    variants = [f"sigma={s:g}" for s in cfg.sigmas]
    if cfg.include_smooth:
        variants.append("smooth")
    for ci, (curve, name) in enumerate(zip(curves, names)):
        base = analyze_curve(curve, cfg)
        for vi, sigma in enumerate(cfg.sigmas):
            pert = ck.perturb(curve, sigma, perturbation_seed(cfg.seed, ci, vi))
            cmp = compare_analyses(base, analyze_curve(pert, cfg), cfg.ami_drop_singletons)
            rows.append({"curve": name, "variant": variants[vi], "sigma": float(sigma), **cmp})
        if cfg.include_smooth:
            sm = ck.smooth(curve, cfg.smooth_window, cfg.smooth_passes)
            cmp = compare_analyses(base, analyze_curve(sm, cfg), cfg.ami_drop_singletons)
            rows.append({"curve": name, "variant": "smooth", "sigma": None, **cmp})
    summary = {}
    for v in variants:
        sel = [r for r in rows if r["variant"] == v]
        summary[v] = {
            "centrality_correlation": _quantiles([r["centrality_correlation"] for r in sel]),
            "ami": _quantiles([r["ami"] for r in sel]),
        }
    return {"rows": rows, "summary": summary}


def jaccard(a: frozenset, b: frozenset) -> float:
    union = a | b
    return len(a & b) / len(union) if union else 1.0


def generator_compare(curves: list, names: list, cfg: RunConfig) -> dict:
    rows = []
    for curve, name in zip(curves, names):
        red = analyze_curve(curve, cfg, policy="reduction")
        mini = analyze_curve(curve, cfg, policy="minimal")
        cmp = compare_analyses(red, mini, cfg.ami_drop_singletons)
        jac = [
            jaccard(g.vertex_set, h.vertex_set)
            for g, h in zip(red.generators.generators, mini.generators.generators)
        ]
        rows.append({"curve": name, **cmp, "jaccard": jac,
                     "median_jaccard": float(np.median(jac)) if jac else None})
    return {
        "rows": rows,
        "summary": {
            "centrality_correlation": _quantiles([r["centrality_correlation"] for r in rows]),
            "ami": _quantiles([r["ami"] for r in rows]),
            "median_jaccard": _quantiles([r["median_jaccard"] for r in rows if r["median_jaccard"] is not None]),
        },
    }


def _load_all(cfg: RunConfig):
    curves = [load_curve(p, cfg) for p in cfg.inputs]
    names = [Path(p).stem for p in cfg.inputs]
    return curves, names


def run_robustness(cfg: RunConfig) -> dict:
    if not cfg.sigmas and not cfg.include_smooth:
        raise ValueError("robustness needs at least one sigma or the smooth variant")
    curves, names = _load_all(cfg)
    report = {**cfg.metadata("robustness"), **robustness(curves, names, cfg)}
    out = Path(cfg.out_dir)
    write_json(out / "robustness.json", report)
    write_csv(
        out / "robustness.csv",
        ["curve", "variant", "sigma", "centrality_correlation", "ami"],
        [[r["curve"], r["variant"], r["sigma"] if r["sigma"] is not None else float("nan"),
          r["centrality_correlation"], r["ami"]] for r in report["rows"]],
        cfg.metadata("robustness"),
    )
    return report


def run_generator_compare(cfg: RunConfig) -> dict:
    curves, names = _load_all(cfg)
    report = {**cfg.metadata("compare-generators"), **generator_compare(curves, names, cfg)}
    write_json(Path(cfg.out_dir) / "compare_generators.json", report)
    return report


def export_features(cfg: RunConfig) -> list[dict]:
    """Write the incidence matrix H (hyperedges x vertices) and the centrality
    vector V of every input curve."""
    out = Path(cfg.out_dir)
    written = []
    for path in cfg.inputs:
        name = Path(path).stem
        res = analyze_curve(load_curve(path, cfg), cfg)
        meta = {**cfg.metadata("export-features"), "curve": name, "trivial_ph": res.trivial}
        n = res.working_curve.n
        header = [f"v{i}" for i in range(n)]
        if res.trivial:
            H = np.zeros((0, n), dtype=int)
            V = np.zeros(n)
        else:
            H = res.hypergraph.incidence().toarray().astype(int)
            V = res.centrality.values
        write_csv(out / f"{name}.H.csv", header, H.tolist(), meta)
        write_csv(out / f"{name}.V.csv", ["centrality"], [[float(v)] for v in V], meta)
        written.append({"name": name, "trivial_ph": res.trivial, "n_hyperedges": int(H.shape[0]),
                        "n_pairs": len(res.diagram)})
    return written


METRIC_KEYS = ("geodesic_intersection", "volume", "size", "geodesic_size")


def metric_samples(analyses) -> dict:
    """Pool per-community metrics (and pairwise p-values) over many curves."""
    out = {k: [] for k in METRIC_KEYS}
    for res in analyses:
        m = res.metrics
        if m is None:
            continue
        out["volume"].extend(m.volume.tolist())
        out["size"].extend(m.size.tolist())
        out["geodesic_size"].extend(m.geodesic_size.astype(float).tolist())
        iu = np.triu_indices(len(m.size), k=1)
        out["geodesic_intersection"].extend(v for v in m.pairwise_p[iu].tolist() if np.isfinite(v))
    return out


def compare_groups(groups: dict) -> dict:
    """Medians per metric, and pairwise Mann-Whitney / concatenated KS
    between named groups of curve analyses."""
    samples = {name: metric_samples(a) for name, a in groups.items()}
    names = sorted(samples)
    medians = {
        name: {k: float(np.median(v)) if v else None for k, v in samples[name].items()}
        for name in names
    }
    pairs = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            sa, sb = samples[a], samples[b]
            row = {"a": a, "b": b}
            for k in METRIC_KEYS:
                row[f"mann_whitney_{k}"] = (
                    mann_whitney(sa[k], sb[k]) if sa[k] and sb[k] else float("nan")
                )
            keys = [k for k in METRIC_KEYS if sa[k] and sb[k]]
            if keys:
                D, p = concatenated_ks({k: sa[k] for k in keys}, {k: sb[k] for k in keys})
            else:
                D, p = float("nan"), float("nan")
            row.update({"ks_statistic": D, "ks_p": p})
            pairs.append(row)
    return {"medians": medians, "pairs": pairs, "rank_normalized_ks": True}
