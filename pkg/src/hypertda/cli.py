"""Command-line entry point: ``hypertda <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure,
4 every input curve has trivial dimension-1 homology.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import curves as ck
from .communities import FLATTEN_WEIGHTS, CommunityError, flatten, louvain, modularity, partition_of
from .config import RunConfig
from .experiments import export_features, run_generator_compare, run_robustness
from .generators import POLICIES, GeneratorError
from .hypergraph import ConvergenceError, HypergraphError, PHHypergraph, centrality_max
from .io import read_json, write_csv, write_json
from .ph import FiltrationError
from .pipeline import analyze_curve, generators_json, load_curve, run_pipeline
from .stats import StatsError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_TRIVIAL = 4

log = logging.getLogger("hypertda")


class TrivialBatch(Exception):
    pass


def _config(args, inputs=None) -> RunConfig:
    cfg = RunConfig()
    for key in vars(cfg):
        if key == "inputs":
            continue
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    cfg.inputs = [str(p) for p in (inputs if inputs is not None else getattr(args, "inputs", []))]
    return cfg


def _meta(cfg: RunConfig, command: str) -> dict:
    return cfg.metadata(command)


# --- curve utilities -------------------------------------------------------

def cmd_generate_sarw(args) -> int:
    cfg = _config(args, [])
    out = Path(args.out)
    if args.count == 1:
        curve = ck.generate_sarw(args.length, args.seed, args.d_min)
        ck.write_curve_csv(curve, out, {**_meta(cfg, "generate-sarw"), "length": args.length})
        return EXIT_OK
    for i in range(args.count):
        seed = args.seed + i
        curve = ck.generate_sarw(args.length, seed, args.d_min)
        meta = {**_meta(cfg, "generate-sarw"), "length": args.length, "curve_seed": seed}
        ck.write_curve_csv(curve, out / f"sarw_{i:04d}.csv", meta)
    return EXIT_OK


def cmd_perturb(args) -> int:
    cfg = _config(args, [args.input])
    curve = load_curve(args.input, cfg)
    meta = {**_meta(cfg, "perturb"), "sigma": args.sigma}
    ck.write_curve_csv(ck.perturb(curve, args.sigma, args.seed), args.out, meta)
    return EXIT_OK


def cmd_smooth(args) -> int:
    cfg = _config(args, [args.input])
    curve = load_curve(args.input, cfg)
    out = ck.smooth(curve, cfg.smooth_window, cfg.smooth_passes)
    ck.write_curve_csv(out, args.out, _meta(cfg, "smooth"))
    return EXIT_OK


def cmd_interpolate(args) -> int:
    cfg = _config(args, [args.input])
    cfg.interpolate_to = args.target
    curve = load_curve(args.input, cfg)
    new, imap = ck.interpolate(curve, args.target)
    meta = _meta(cfg, "interpolate")
    ck.write_curve_csv(new, args.out, meta)
    if args.map_out:
        ck.write_interpolation_map(imap, args.map_out, meta)
    return EXIT_OK


# --- single-curve pipeline stages -----------------------------------------

def _analysis(args):
    cfg = _config(args, [args.input])
    res = analyze_curve(load_curve(args.input, cfg), cfg)
    return cfg, res


def cmd_ph(args) -> int:
    args.policy = "reduction"
    cfg, res = _analysis(args)
    out = {**_meta(cfg, "ph"), "trivial_ph": res.trivial,
           "diagram": generators_json(res.generators, res.diagram)}
    write_json(args.out, out)
    return EXIT_OK


def cmd_generators(args) -> int:
    cfg, res = _analysis(args)
    out = {**_meta(cfg, "generators"), "trivial_ph": res.trivial,
           "generators": generators_json(res.generators, res.diagram)}
    write_json(args.out, out)
    return EXIT_OK


def cmd_hypergraph(args) -> int:
    cfg, res = _analysis(args)
    if res.trivial:
        raise TrivialBatch(f"{args.input} has trivial dimension-1 homology")
    meta = _meta(cfg, "hypergraph")
    write_json(args.out, {**meta, "hypergraph": res.hypergraph.to_json()})
    if args.incidence_out:
        H = res.hypergraph.incidence().toarray().astype(int)
        write_csv(args.incidence_out, [f"v{i}" for i in range(H.shape[1])], H.tolist(), meta)
    return EXIT_OK


def cmd_centrality(args) -> int:
    cfg = _config(args, [args.input])
    meta = _meta(cfg, "centrality")
    if str(args.input).endswith(".json"):
        obj = read_json(args.input)
        h = PHHypergraph.from_json(obj.get("hypergraph", obj))
        if h.n_edges == 0:
            raise TrivialBatch(f"{args.input} has no hyperedges")
        cent = centrality_max(h, cfg.p_norm, cfg.tol, cfg.max_iter)
    else:
        res = analyze_curve(load_curve(args.input, cfg), cfg)
        if res.trivial:
            raise TrivialBatch(f"{args.input} has trivial dimension-1 homology")
        cent = res.centrality
    write_json(args.out, {**meta, "centrality": cent.to_json()})
    return EXIT_OK


def cmd_communities(args) -> int:
    cfg = _config(args, [args.input])
    meta = _meta(cfg, "communities")
    if str(args.input).endswith(".json"):
        obj = read_json(args.input)
        h = PHHypergraph.from_json(obj.get("hypergraph", obj))
        if h.n_edges == 0:
            raise TrivialBatch(f"{args.input} has no hyperedges")
        g = flatten(h, cfg.flatten_weight)
        cm = louvain(g, cfg.seed, cfg.resolution)
        comm = {**cm.to_json(), "seed": cfg.seed,
                "modularity": modularity(g, partition_of(cm), cfg.resolution)}
    else:
        res = analyze_curve(load_curve(args.input, cfg), cfg)
        if res.trivial:
            raise TrivialBatch(f"{args.input} has trivial dimension-1 homology")
        comm = {**res.communities_on_curve.to_json(), "seed": cfg.seed,
                "modularity": res.modularity, "metrics": res.metrics.to_json()}
    write_json(args.out, {**meta, "communities": comm})
    return EXIT_OK


# --- batch commands --------------------------------------------------------

def cmd_analyze(args) -> int:
    cfg = _config(args)
    bundles = run_pipeline(cfg)
    if bundles and all(b["trivial_ph"] for b in bundles):
        raise TrivialBatch("every input curve has trivial dimension-1 homology")
    return EXIT_OK


def cmd_robustness(args) -> int:
    cfg = _config(args)
    cfg.include_smooth = not args.no_smooth
    run_robustness(cfg)
    return EXIT_OK


def cmd_compare_generators(args) -> int:
    run_generator_compare(_config(args))
    return EXIT_OK


def cmd_export_features(args) -> int:
    written = export_features(_config(args))
    if written and all(w["trivial_ph"] for w in written):
        raise TrivialBatch("every input curve has trivial dimension-1 homology")
    return EXIT_OK


# --- parser ----------------------------------------------------------------

def _add_input_opts(p):
    p.add_argument("--time-as-z", action="store_true", default=None,
                   help="lift 2D input to 3D using the row index as z")
    p.add_argument("--time-step", type=float, help="z increment per row with --time-as-z")


def _add_analysis_opts(p, seed_required: bool):
    _add_input_opts(p)
    p.add_argument("--policy", choices=POLICIES)
    p.add_argument("--max-scale", type=float, help="filtration cap (default: enclosing radius)")
    p.add_argument("--density-radius", type=float)
    p.add_argument("--p-norm", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--seed", type=int, required=seed_required, help="Louvain seed")
    p.add_argument("--resolution", type=float)
    p.add_argument("--flatten-weight", choices=FLATTEN_WEIGHTS)
    p.add_argument("--interpolate-to", type=int)
    p.add_argument("--ami-drop-singletons", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypertda", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-sarw", help="equilateral self-avoiding random walk(s)")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=1, help="with >1, --out is a directory")
    p.add_argument("--d-min", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate_sarw)

    p = sub.add_parser("perturb", help="add Gaussian noise to every coordinate")
    p.add_argument("input")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_input_opts(p)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("smooth", help="moving-average smoothing with pinned endpoints")
    p.add_argument("input")
    p.add_argument("--smooth-window", type=int)
    p.add_argument("--smooth-passes", type=int)
    p.add_argument("--out", required=True)
    _add_input_opts(p)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("interpolate", help="insert vertices on the longest segments")
    p.add_argument("input")
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--map-out", help="write the uninterpolation matrix as JSON")
    _add_input_opts(p)
    p.set_defaults(func=cmd_interpolate)

    for name, func, help_ in [
        ("ph", cmd_ph, "dimension-1 diagram with reduction generators"),
        ("generators", cmd_generators, "generators under a policy"),
        ("hypergraph", cmd_hypergraph, "persistence-weighted hypergraph"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("input")
        p.add_argument("--out", required=True)
        _add_analysis_opts(p, seed_required=False)
        if name == "hypergraph":
            p.add_argument("--incidence-out", help="CSV of the 0/1 incidence matrix")
        p.set_defaults(func=func)

    p = sub.add_parser("centrality", help="max-flavour centrality (curve CSV or hypergraph JSON)")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    _add_analysis_opts(p, seed_required=False)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("communities", help="Louvain communities (curve CSV or hypergraph JSON)")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    _add_analysis_opts(p, seed_required=True)
    p.set_defaults(func=cmd_communities)

    batch = [
        ("analyze", cmd_analyze, "full pipeline; one bundle per curve plus summary.csv", True),
        ("robustness", cmd_robustness, "noise and smoothing sweep", True),
        ("compare-generators", cmd_compare_generators, "reduction vs minimal generators", True),
        ("export-features", cmd_export_features, "incidence matrix and centrality CSVs", False),
    ]
    for name, func, help_, needs_seed in batch:
        p = sub.add_parser(name, help=help_)
        p.add_argument("inputs", nargs="+")
        p.add_argument("--out-dir", required=True)
        p.add_argument("--jobs", type=int)
        _add_analysis_opts(p, seed_required=needs_seed)
        if name == "robustness":
            p.add_argument("--sigmas", type=float, nargs="+")
            p.add_argument("--no-smooth", action="store_true")
            p.add_argument("--smooth-window", type=int)
            p.add_argument("--smooth-passes", type=int)
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TrivialBatch as e:
        log.error("%s", e)
        return EXIT_TRIVIAL
    except (ConvergenceError, GeneratorError, ck.SARWGenerationError) as e:
        log.error("%s", e)
        return EXIT_NUMERIC
    except (ck.CurveError, FiltrationError, HypergraphError, CommunityError, StatsError,
            FileNotFoundError, ValueError) as e:
        log.error("%s", e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
