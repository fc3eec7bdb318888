"""Command-line front end: sampling campaigns, percolation studies,
validation oracles and honeycomb reductions with reproducible seeds.

Machine-readable results go to stdout or files; progress goes to stderr.
Exit codes: 0 success, 2 usage error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .domains import measure_graph_ensemble
from .graph_rules import reduce_to_honeycomb
from .lattices import (BC_CYLINDER, BC_TORUS, LatticeKind, build_lattice,
                       bridged_triangles, complete_graph_k4, cube_graph)
from .percolation import (bare_lattice_percolation, deletion_sweep,
                          estimate_threshold, sample_domain_graphs)
from .sampler import ChainParams, run_chain

SCHEMA_VERSION = 1

ORACLE_GRAPHS = {
    "k4": complete_graph_k4,
    "cube": cube_graph,
    "bridged-triangles": bridged_triangles,
}


def _parse_p_grid(spec: str) -> list[float]:
    """Grid spec: 'start:stop:step' (stop inclusive) or comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError("grid spec must be start:stop:step")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        return [round(p, 6) for p in np.arange(start, stop + step / 2, step)]
    return [round(float(x), 6) for x in spec.split(",") if x.strip()]


def _chain_params(args) -> ChainParams:
    return ChainParams(seed=args.seed, burn_in_sweeps=args.burn_in,
                       measure_sweeps=args.sweeps,
                       measure_interval=args.interval, n_chains=args.chains)


def _out_path(name: str) -> str:
    base = os.environ.get("AKLT_OUTDIR", "")
    return os.path.join(base, name) if base else name


def _emit_json(doc: dict, path: str | None) -> None:
    doc = dict(doc)
    doc["schema"] = SCHEMA_VERSION
    doc["meta"] = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
                   "version": __version__}
    text = json.dumps(doc, sort_keys=True, indent=1)
    if path:
        with open(_out_path(path), "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {_out_path(path)}", file=sys.stderr)
    else:
        print(text)


CSV_FIELDS = ["lattice", "L", "mode", "p_delete", "p_span", "stderr",
              "n_samples", "n_trials"]


def _curve_csv(curves) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for curve in curves:
        for row in curve.as_rows():
            writer.writerow(row)
    return buf.getvalue()


def _emit_curves(curves, threshold_doc, args) -> None:
    text = _curve_csv(curves)
    if args.output:
        csv_path = _out_path(args.output + ".csv")
        with open(csv_path, "w") as fh:
            fh.write(text)
        print(f"wrote {csv_path}", file=sys.stderr)
        _emit_json(threshold_doc, args.output + ".json")
    else:
        sys.stdout.write(text)
        _emit_json(threshold_doc, None)


def _config_echo(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def cmd_stats(args) -> int:
    lattice = build_lattice(LatticeKind.from_name(args.lattice), args.L,
                            BC_TORUS if args.bc == "torus" else BC_CYLINDER)
    params = _chain_params(args)
    print(f"sampling {args.lattice} L={args.L} "
          f"({params.n_chains} chains x {params.measure_sweeps} sweeps)",
          file=sys.stderr)
    stats, results = measure_graph_ensemble(lattice, params)
    doc = {
        "config": _config_echo(args),
        "results": stats.to_dict(),
        "acceptance_rate": float(np.mean([r.acceptance_rate for r in results])),
        "conventions": {
            "vertices_per_site": "largest-component vertices of the mod-2 graph / N",
            "edges_per_site": "largest-component edges of the mod-2 graph / N",
            "avg_degree": "2 * edges / vertices of the largest component",
            "avg_domain_size": "N / number of domains (all, incl. isolated)",
            "mod2_edges_per_site": "all edges after the mod-2 reduction / N",
        },
    }
    if len(lattice.triangles):
        doc["monochromatic_triangles"] = int(max(
            max(s) if (s := r.samples.get("mono", [0])) else 0 for r in results))
    _emit_json(doc, args.output)
    return 0


def cmd_percolation(args) -> int:
    kind = LatticeKind.from_name(args.lattice)
    params = _chain_params(args)
    curves = {}
    for L in args.L:
        lattice = build_lattice(kind, L, BC_CYLINDER)
        print(f"sampling domain graphs on {args.lattice} L={L}", file=sys.stderr)
        graphs, flags, _ = sample_domain_graphs(lattice, params)
        print(f"deletion sweep ({args.mode}) over {len(graphs)} graphs",
              file=sys.stderr)
        curves[L] = deletion_sweep(
            graphs, args.mode, _parse_p_grid(args.p_grid), args.trials,
            seed=args.seed, kind=args.lattice, L=L,
            refine_step=None if args.no_refine else 0.005)
    est = estimate_threshold(curves)
    doc = {
        "config": _config_echo(args),
        "results": {
            "mode": est.mode,
            "p_delete_star": {"value": est.p_delete_star.value,
                              "error": est.p_delete_star.error},
            "p_threshold": {"value": est.p_threshold.value,
                            "error": est.p_threshold.error},
            "per_L": {str(L): {"value": e.value, "error": e.error}
                      for L, e in est.per_L.items()},
        },
    }
    _emit_curves([curves[L] for L in sorted(curves)], doc, args)
    return 0


def cmd_bare(args) -> int:
    kind = LatticeKind.from_name(args.lattice)
    curves = {}
    for L in args.L:
        lattice = build_lattice(kind, L, BC_CYLINDER)
        print(f"bare deletion sweep on {args.lattice} L={L}", file=sys.stderr)
        curves[L] = bare_lattice_percolation(
            lattice, args.mode, _parse_p_grid(args.p_grid), args.trials,
            seed=args.seed, refine_step=None if args.no_refine else 0.005)
    est = estimate_threshold(curves)
    doc = {
        "config": _config_echo(args),
        "results": {
            "mode": est.mode,
            "p_delete_star": {"value": est.p_delete_star.value,
                              "error": est.p_delete_star.error},
            "p_threshold": {"value": est.p_threshold.value,
                            "error": est.p_threshold.error},
        },
    }
    _emit_curves([curves[L] for L in sorted(curves)], doc, args)
    return 0


def cmd_oracle(args) -> int:
    import itertools

    lattice = ORACLE_GRAPHS[args.graph]()
    n = lattice.n_sites
    from .domains import identify_domains
    from .sampler import PovmConfig

    print(f"enumerating 3^{n} configurations of {args.graph}", file=sys.stderr)
    probs = {}
    for cfg in itertools.product(range(3), repeat=n):
        labels = np.array(cfg, dtype=np.int8)
        config = PovmConfig(lattice, labels)
        if config.monochromatic_triangles():
            continue
        part = identify_domains(lattice, config)
        probs[cfg] = 2.0 ** (part.n_domains + part.n_internal_edges)
    total = sum(probs.values())
    probs = {c: p / total for c, p in probs.items()}

    params = ChainParams(seed=args.seed, burn_in_sweeps=max(100, n),
                         measure_sweeps=args.sweeps, measure_interval=1)
    counts: dict = {}

    def record(lat, labels):
        key = tuple(int(x) for x in labels)
        counts[key] = counts.get(key, 0) + 1
        return {}

    print(f"running {args.sweeps} sweeps", file=sys.stderr)
    run_chain(lattice, params, [record])
    tot = sum(counts.values())
    tv = 0.5 * sum(abs(counts.get(c, 0) / tot - p) for c, p in probs.items())
    invalid = sum(counts.get(c, 0) for c in counts if c not in probs)
    doc = {
        "config": _config_echo(args),
        "results": {
            "tv_distance": tv,
            "n_configurations": len(probs),
            "n_measurements": tot,
            "invalid_visits": invalid,
            "distinct_visited": len(counts),
        },
    }
    _emit_json(doc, args.output)
    return 0 if tv < 0.01 and invalid == 0 else 3


def cmd_reduce(args) -> int:
    result = reduce_to_honeycomb(LatticeKind.from_name(args.lattice), args.L)
    doc = {
        "config": _config_echo(args),
        "isomorphic_to_honeycomb": bool(result.isomorphic),
        "results": {
            "n_vertices": result.graph.n_vertices,
            "n_edges": result.graph.n_edges,
            "n_measured": result.n_measured,
            "target_cells": list(result.target_cells),
        },
    }
    _emit_json(doc, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aklt-perc",
        description="POVM ensemble sampling and percolation analysis on "
                    "trivalent Archimedean lattices")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_chain_args(p):
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--chains", type=int, default=2)
        p.add_argument("--burn-in", type=int, default=500, dest="burn_in")
        p.add_argument("--sweeps", type=int, default=2000)
        p.add_argument("--interval", type=int, default=4)

    lattices = [k.value for k in LatticeKind]

    p = sub.add_parser("stats", help="graph-ensemble statistics")
    p.add_argument("--lattice", choices=lattices, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--bc", choices=["torus", "cylinder"], default="torus")
    add_chain_args(p)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("percolation", help="deletion study on sampled domain graphs")
    p.add_argument("--lattice", choices=lattices, required=True)
    p.add_argument("--L", type=int, nargs="+", required=True)
    p.add_argument("--mode", choices=["site", "bond"], required=True)
    add_chain_args(p)
    p.add_argument("--p-grid", default="0:0.6:0.02", dest="p_grid")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_percolation)

    p = sub.add_parser("bare", help="deletion study on the bare lattice")
    p.add_argument("--lattice", choices=lattices, required=True)
    p.add_argument("--L", type=int, nargs="+", required=True)
    p.add_argument("--mode", choices=["site", "bond"], required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--p-grid", default="0:0.6:0.02", dest="p_grid")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_bare)

    p = sub.add_parser("oracle", help="validate the sampler against exhaustive enumeration")
    p.add_argument("--graph", choices=sorted(ORACLE_GRAPHS), default="k4")
    p.add_argument("--sweeps", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("reduce", help="reduce a cluster state to the honeycomb")
    p.add_argument("--lattice", choices=["square-octagon", "cross", "star"],
                   required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
