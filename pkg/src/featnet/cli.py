"""Command-line interface: ``featnet {simulate,estimate,metrics,ingest,sweep}``.

Flags may also come from a ``--config FILE`` of ``key = value`` lines
(keys are flag names without dashes, e.g. ``realizations = 100``);
explicit flags win. ``FEATNET_OUT_DIR`` sets the default output directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import EstimationReport, SigmoidParams
from .estimation import (
    delta_loglikelihood,
    delta_statistics,
    estimate_alpha,
    estimate_beta,
    estimate_delta,
    estimate_p,
    fit_k_theta,
    observed_link_fraction,
)
from .experiments import (
    CellSpec,
    ExperimentGrid,
    aggregate,
    run_sweep,
    simulate_realization,
    write_rows,
)
from .io import (
    DEFAULT_STOPWORDS,
    build_coauthorship_graph,
    build_feature_matrix,
    format_report,
    read_documents,
    read_feature_matrix,
    read_graph,
    read_stopwords,
    write_feature_matrix,
    write_graph,
    write_report,
)
from .metrics import (
    clustering_coefficient,
    component_summary,
    degree_ccdf,
    reachable_pairs,
    shared_feature_distributions,
)
from .network import similarity_histogram

log = logging.getLogger("featnet")

OUT_DIR_ENV = "FEATNET_OUT_DIR"


class CLIError(Exception):
    pass


def _default_out(name: str) -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, ".")) / name


def read_config(path) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for no, line in enumerate(fh, start=1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            if "=" not in s:
                raise CLIError(f"{path}:{no}: expected 'key = value'")
            k, v = (part.strip() for part in s.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


# ---------------------------------------------------------------- simulate

def cmd_simulate(args) -> int:
    if (args.theta is None) == (args.ell is None):
        raise CLIError("give exactly one of --theta and --ell")
    cell = CellSpec(args.n, args.alpha, args.beta, args.delta, args.p, args.K, theta=args.theta, ell=args.ell)
    out = Path(args.out_dir) if args.out_dir else _default_out("simulation")
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    width = max(3, len(str(args.realizations - 1)))
    for r in range(args.realizations):
        real = simulate_realization(cell, args.seed, r, h=args.h, with_metrics=not args.no_metrics)
        stem = "" if args.realizations == 1 else f"_{r:0{width}d}"
        write_feature_matrix(real.features, out / f"features{stem}.txt")
        write_graph(real.graph, out / f"graph{stem}.tsv")
        if args.s_star is not None:
            try:
                real.stats["f_star"] = observed_link_fraction(real.features, real.graph, args.s_star)
            except ValueError:
                real.stats["f_star"] = float("nan")
        rows.append(real.stats)
        log.info("realization %d: %s", r, real.stats)
    write_rows(out / "realizations.csv", rows)
    if args.realizations > 1:
        agg = {**{k: v for k, v in vars(args).items() if k in ("n", "alpha", "beta", "delta", "p", "K", "theta", "ell", "seed")},
               **aggregate(rows)}
        write_rows(out / "aggregate.csv", [agg])
        summary = agg
    else:
        summary = rows[0]
    print(json.dumps(summary, sort_keys=True))
    return 0


# ---------------------------------------------------------------- estimate

_WHICH = ("alpha", "beta", "delta", "ktheta", "p", "all")


def cmd_estimate(args) -> int:
    which = set(args.which)
    if "all" in which:
        which = {"alpha", "beta", "delta", "ktheta", "p"} if args.graph else {"alpha", "beta", "delta"}
    if which & {"alpha", "beta", "delta", "ktheta"} and not args.features:
        raise CLIError("--features is required for alpha, beta, delta and ktheta")
    if which & {"ktheta", "p"} and not args.graph:
        raise CLIError("--graph is required for ktheta and p")
    F = read_feature_matrix(args.features) if args.features else None
    g = read_graph(args.graph, n=F.n_nodes if F is not None else None) if args.graph else None
    rep = EstimationReport()
    if which & {"alpha", "beta"}:
        beta, r2 = estimate_beta(F, return_r2=True)
        rep.beta_hat = beta
        rep.diagnostics["beta_r2"] = r2
        if "alpha" in which:
            rep.alpha_hat, rep.diagnostics["gamma"] = estimate_alpha(F, beta, return_slope=True)
    if "delta" in which:
        st = delta_statistics(F)
        rep.delta_hat = estimate_delta(st)
        rep.diagnostics["delta_loglik"] = delta_loglikelihood(st, rep.delta_hat)
    if "p" in which and not g.has_phase_labels:
        raise CLIError("graph has untagged edges (phase 0); p needs first-phase labels")
    if "ktheta" in which:
        first = g.first_phase() if g.has_phase_labels else g
        ell = args.ell if args.ell is not None else first.n_edges
        S = F.similarity_matrix()
        f_star = args.f_star if args.f_star is not None else observed_link_fraction(F, first, args.s_star, S)
        sig, diag = fit_k_theta(F, ell, args.s_star, f_star, hist=similarity_histogram(F, S), return_diagnostics=True)
        rep.k_hat, rep.theta_hat = sig.k_steep, sig.theta
        rep.diagnostics.update({"ell": float(ell), "s_star": float(args.s_star), "f_star": float(f_star),
                                "k_theta_residual": diag["residual"]})
    if "p" in which:
        rep.p_hat = estimate_p(g)
    rep.__post_init__()
    text = format_report(rep)
    if args.out:
        write_report(rep, args.out)
    sys.stdout.write(text)
    return 0


# ----------------------------------------------------------------- metrics

def cmd_metrics(args) -> int:
    F = read_feature_matrix(args.features) if args.features else None
    g = read_graph(args.graph, n=F.n_nodes if F is not None else None)
    rp, h_star = reachable_pairs(g, args.h) if g.n > 1 else (0.0, 0)
    comp = component_summary(g)
    summary = {
        "nodes": g.n,
        "links": g.n_edges,
        "clustering": clustering_coefficient(g),
        f"rp_{args.h}": rp,
        "h_star": h_star,
        "components": comp.n_components,
        "largest_component_nodes": comp.largest_size,
        "largest_component_links": comp.largest_edges,
        "largest_component_diameter": comp.largest_diameter,
        "isolated_nodes": comp.n_isolated,
    }
    for k, v in summary.items():
        print(f"{k} = {v}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_rows(out / "summary.csv", [summary])
        with open(out / "degree_ccdf.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["degree", "ccdf"])
            w.writerows(degree_ccdf(g))
        if F is not None:
            curves = shared_feature_distributions(F, g)
            with open(out / "shared_features.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["x", "linked_pairs", "unlinked_pairs", "p_x_given_linked", "p_x_given_unlinked", "p_linked_given_x"])
                w.writerows(curves.rows())
    return 0


# ------------------------------------------------------------------ ingest

def cmd_ingest(args) -> int:
    docs = read_documents(args.docs)
    stop = read_stopwords(args.stopwords) if args.stopwords else DEFAULT_STOPWORDS
    F, vocab, ids = build_feature_matrix(docs, stop)
    g = build_coauthorship_graph(docs)
    out_f = Path(args.out_features) if args.out_features else _default_out("features.txt")
    out_g = Path(args.out_graph) if args.out_graph else _default_out("graph.tsv")
    for p in (out_f, out_g):
        p.parent.mkdir(parents=True, exist_ok=True)
    write_feature_matrix(F, out_f)
    write_graph(g, out_g)
    if args.out_vocab:
        Path(args.out_vocab).write_text("".join(f"{k}\t{w}\n" for k, w in enumerate(vocab, start=1)))
    if args.out_nodes:
        Path(args.out_nodes).write_text("".join(f"{i}\t{d}\n" for i, d in enumerate(ids, start=1)))
    print(json.dumps({"documents": F.n_nodes, "features": F.n_features, "links": g.n_edges}))
    return 0


# ------------------------------------------------------------------- sweep

def _pivot(rows, value, path):
    deltas = sorted({r["delta"] for r in rows})
    keys = sorted({(r["k_steep"], r["p"]) for r in rows})
    lookup = {(r["k_steep"], r["p"], r["delta"]): r.get(value) for r in rows}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["K", "p", *[f"delta={d:g}" for d in deltas]])
        for k, p in keys:
            w.writerow([k, p, *[lookup.get((k, p, d), "") for d in deltas]])


def cmd_sweep(args) -> int:
    grid = ExperimentGrid.read_csv(args.grid) if args.grid else ExperimentGrid.default()
    rows = run_sweep(grid, args.realizations, args.seed, h=args.h, n_jobs=args.jobs)
    out = Path(args.out) if args.out else _default_out("sweep.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_rows(out, rows)
    stem = out.with_suffix("")
    _pivot(rows, "mean_clustering", f"{stem}_clustering.csv")
    _pivot(rows, "mean_rp", f"{stem}_rp.csv")
    _pivot(rows, "mean_links", f"{stem}_links.csv")
    print(f"wrote {out} ({len(rows)} cells)")
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="featnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key = value file supplying defaults for any flag")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate feature matrices and graphs")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--alpha", type=float, default=10.0)
    s.add_argument("--beta", type=float, default=0.5)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--p", type=float, default=0.0)
    s.add_argument("--K", type=float, default=1.0)
    s.add_argument("--theta", type=float)
    s.add_argument("--ell", type=float, help="calibrate theta so the expected first-phase link count is ELL")
    s.add_argument("--s-star", type=int, help="also record the observed first-phase link fraction at this similarity")
    s.add_argument("--realizations", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--h", type=int, default=20)
    s.add_argument("--no-metrics", action="store_true", help="skip clustering and reachability")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="estimate model parameters")
    e.add_argument("--features")
    e.add_argument("--graph")
    e.add_argument("--which", nargs="+", choices=_WHICH, default=["all"])
    e.add_argument("--s-star", type=int, default=10)
    e.add_argument("--f-star", type=float)
    e.add_argument("--ell", type=float)
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    m = sub.add_parser("metrics", help="network statistics")
    m.add_argument("--graph", required=True)
    m.add_argument("--features")
    m.add_argument("--h", type=int, default=20)
    m.add_argument("--out", help="directory for CSV tables")
    m.set_defaults(func=cmd_metrics)

    i = sub.add_parser("ingest", help="documents -> 2-gram feature matrix and co-authorship graph")
    i.add_argument("--docs", required=True)
    i.add_argument("--stopwords")
    i.add_argument("--out-features")
    i.add_argument("--out-graph")
    i.add_argument("--out-vocab")
    i.add_argument("--out-nodes")
    i.set_defaults(func=cmd_ingest)

    w = sub.add_parser("sweep", help="aggregate statistics over a parameter grid")
    w.add_argument("--grid", help="CSV with columns n,alpha,beta,delta,p,K,theta|ell (default: 18-cell delta x K x p grid at ell=4000)")
    w.add_argument("--realizations", type=int, default=100)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--h", type=int, default=20)
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    cfg = read_config(known.config)
    args = parser.parse_args(argv)
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    sub_parser = parser._subparsers._group_actions[0].choices[args.command]
    types = {a.dest: a for a in sub_parser._actions}
    for key, raw in cfg.items():
        if key in given or key not in types:
            if key not in types and key != "config":
                raise CLIError(f"{known.config}: unknown key {key!r} for '{args.command}'")
            continue
        action = types[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.nargs == "+":
            value = raw.split()
        else:
            value = action.type(raw) if action.type else raw
        setattr(args, key, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(
            level=logging.WARNING - 10 * min(args.verbose, 2),
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.func(args)
    except (CLIError, ValueError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"featnet: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
