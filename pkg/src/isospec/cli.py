"""Command-line surface.

Subcommands mirror the library layers: `graph build`, `spectra
supnorm|separation|moment`, `sample run|oracle|deviation`, `cost
qpe|pipeline`, `action demo`.  All outputs are deterministic given the
flags (seeds included), so repeated runs are byte-identical; nothing
carries timestamps.

Exit codes: 0 success, 2 usage error (bad flag or bad input value),
1 computation error.  Computation errors print the library error class
name followed by the message.

Environment: ISOSPEC_CACHE_DIR sets the default graph cache directory,
ISOSPEC_PHI_DIR a modular-polynomial database directory; --cache-dir and
--phi-dir override.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, scans, walksim
from .action import RegularActionTable, AbelianGroupSpec, oriented_sampling, \
    kappa_hat_flatness, make_kappa
from .errors import IsospecError, UsageError
from .graphs import CACHE_FORMAT_VERSION, cached_build, save_graph
from .walksim import deviation_check, oracle_distribution, prepare

ENV_CACHE_DIR = "ISOSPEC_CACHE_DIR"


def _write_out(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}")


def _scan_args(sub, ells_default=None):
    sub.add_argument("--pmin", type=int, required=True)
    sub.add_argument("--pmax", type=int, required=True)
    if ells_default:
        sub.add_argument("--ells", default=ells_default,
                         help="comma-separated Hecke primes")
    sub.add_argument("--stride", type=int, default=1,
                     help="take every k-th prime in range")
    sub.add_argument("--limit", type=int, default=None,
                     help="cap on number of primes")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--jobs", type=int, default=1)
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--out", default=None)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="isospec",
        description="supersingular isogeny graph spectra and sampling toolkit")
    ap.add_argument("--version", action="version",
                    version=f"isospec {__version__} "
                            f"(cache-format {CACHE_FORMAT_VERSION})")
    top = ap.add_subparsers(dest="command", required=True)

    g = top.add_parser("graph", help="graph construction")
    gsub = g.add_subparsers(dest="subcommand", required=True)
    gb = gsub.add_parser("build", help="build a graph and print a summary")
    gb.add_argument("--p", type=int, required=True)
    gb.add_argument("--ell", type=int, default=2)
    gb.add_argument("--cache-dir", default=None)
    gb.add_argument("--phi-dir", default=None)
    gb.add_argument("--out", default=None, help="write full graph JSON here")

    s = top.add_parser("spectra", help="spectral scans")
    ssub = s.add_subparsers(dest="subcommand", required=True)
    _scan_args(ssub.add_parser("supnorm", help="sup-norm scan"), "2,3,5")
    _scan_args(ssub.add_parser("separation", help="tag separation scan"))
    _scan_args(ssub.add_parser("moment", help="fourth-moment scan"), "2,3,5")

    sm = top.add_parser("sample", help="walk sampler")
    smsub = sm.add_subparsers(dest="subcommand", required=True)
    sr = smsub.add_parser("run", help="run the sampling cascade")
    sr.add_argument("--p", type=int, required=True)
    sr.add_argument("--shots", type=int, default=100)
    sr.add_argument("--seed", type=int, default=0)
    sr.add_argument("--mode", choices=("ideal", "kernel"), default="ideal")
    sr.add_argument("--bits", type=int, default=None)
    sr.add_argument("--window", default=None,
                    help="override the prime window, e.g. 3,5,7")
    sr.add_argument("--out", default=None)
    so = smsub.add_parser("oracle", help="exact output distribution")
    so.add_argument("--p", type=int, required=True)
    so.add_argument("--seed", type=int, default=0)
    so.add_argument("--window", default=None)
    so.add_argument("--out", default=None)
    sd = smsub.add_parser("deviation", help="near-uniformity deviation report")
    sd.add_argument("--p", type=int, required=True)
    sd.add_argument("--seed", type=int, default=0)
    sd.add_argument("--window", default=None)
    sd.add_argument("--out", default=None)

    c = top.add_parser("cost", help="gate-cost model")
    csub = c.add_subparsers(dest="subcommand", required=True)
    cq = csub.add_parser("qpe", help="single QPE call cost")
    cq.add_argument("--ell", type=int, required=True)
    cq.add_argument("--eps", type=float, required=True)
    cq.add_argument("--eta", type=float, required=True)
    cq.add_argument("--out", default=None)
    cp = csub.add_parser("pipeline", help="full cascade cost over a p grid")
    cp.add_argument("--pmin", type=int, required=True)
    cp.add_argument("--pmax", type=int, required=True)
    cp.add_argument("--points", type=int, default=8)
    cp.add_argument("--regime", choices=("heuristic", "grh"),
                    default="heuristic")
    cp.add_argument("--format", choices=("csv", "json"), default="csv")
    cp.add_argument("--out", default=None)

    a = top.add_parser("action", help="abelian group-action sampling")
    asub = a.add_subparsers(dest="subcommand", required=True)
    ad = asub.add_parser("demo", help="exact sampling distribution on a torsor")
    ad.add_argument("--factors", required=True,
                    help="cyclic factors, e.g. 4,3")
    ad.add_argument("--shots", type=int, default=None)
    ad.add_argument("--seed", type=int, default=0)
    ad.add_argument("--out", default=None)
    return ap


def _cmd_graph_build(args):
    cache_dir = args.cache_dir or os.environ.get(ENV_CACHE_DIR)
    graph, hit = cached_build(args.p, args.ell, cache_dir, args.phi_dir)
    if cache_dir:
        print(f"cache: {'hit' if hit else 'miss'}", file=sys.stderr)
    if args.out:
        save_graph(graph, args.out)
    summary = {
        "p": graph.p, "ell": graph.ell, "n": graph.n,
        "orientation": graph.orientation,
        "weights": {"1": int(np.sum(graph.w == 1)),
                    "2": int(np.sum(graph.w == 2)),
                    "3": int(np.sum(graph.w == 3))},
        "row_sum": int(graph.ell + 1),
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_spectra(args):
    primes = scans.primes_in(args.pmin, args.pmax, args.stride, args.limit)
    kind = args.subcommand
    kwargs = {"seed": args.seed}
    if kind in ("supnorm", "moment"):
        kwargs["ells"] = tuple(_int_list(args.ells))
        columns = (scans.SUPNORM_COLUMNS if kind == "supnorm"
                   else scans.MOMENT_COLUMNS)
    else:
        columns = scans.SEPARATION_COLUMNS
    rows = scans.run_scan(kind, primes, jobs=args.jobs, **kwargs)
    if args.format == "csv":
        _write_out(scans.rows_to_csv(rows, columns), args.out)
    else:
        _write_out(scans.rows_to_json(rows, columns, seed=args.seed), args.out)
    return 0


def _cmd_sample(args):
    window = _int_list(args.window) if args.window else None
    if args.subcommand == "run":
        graph, basis, e0 = prepare(args.p, window, args.seed)
        config = walksim.config_for(basis, mode=args.mode, bits=args.bits)
        res = walksim.run_sampler(args.p, window, args.shots, config,
                                  args.seed)
        _write_out(json.dumps(res.to_json_dict(), sort_keys=True, indent=2)
                   + "\n", args.out)
        return 0
    graph, basis, e0 = prepare(args.p, window, args.seed)
    if args.subcommand == "oracle":
        dist = oracle_distribution(basis, e0)
        doc = {
            "p": args.p, "window": list(basis.primes),
            "e0": str(graph.vertices[e0]), "seed": args.seed,
            "distribution": {str(v): float(q)
                             for v, q in zip(graph.vertices, dist)},
            "min_prob": float(dist.min()),
        }
    else:
        rep = deviation_check(basis)
        doc = {
            "p": args.p, "window": list(basis.primes), "n": rep.n,
            "seed": args.seed,
            "identity_max_err": rep.identity_max_err,
            "cauchy_schwarz_ok": rep.cauchy_schwarz_ok,
            "max_prob": rep.max_prob, "min_prob": rep.min_prob,
            "alpha": rep.alpha, "alpha_over_log2p": rep.alpha_over_log2p,
        }
    _write_out(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_cost(args):
    if args.subcommand == "qpe":
        ce = walksim.qpe_cost(args.ell, args.eps, args.eta)
        doc = {"ell": ce.ell, "eps": ce.eps, "eta": ce.eta, "kappa": ce.kappa,
               "leading": ce.leading, "secondary": ce.secondary,
               "total": ce.total}
        _write_out(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
        return 0
    import sympy
    grid = np.geomspace(args.pmin, args.pmax, args.points)
    ps = sorted({int(sympy.nextprime(int(v))) for v in grid})
    rows = [scans.cost_row(p, args.regime) for p in ps]
    if args.format == "csv":
        _write_out(scans.rows_to_csv(rows, scans.COST_COLUMNS), args.out)
    else:
        _write_out(scans.rows_to_json(rows, scans.COST_COLUMNS), args.out)
    return 0


def _cmd_action(args):
    factors = tuple(_int_list(args.factors))
    spec = AbelianGroupSpec(factors)
    act = RegularActionTable.random_torsor(spec, seed=args.seed)
    act.validate()
    res = oriented_sampling(act, shots=args.shots, seed=args.seed)
    doc = res.to_json_dict()
    flat = kappa_hat_flatness(make_kappa(spec))
    doc["kappa_flatness_spread"] = flat.flatness_spread
    doc["seed"] = args.seed
    _write_out(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    return 0


_DISPATCH = {
    "graph": _cmd_graph_build,
    "spectra": _cmd_spectra,
    "sample": _cmd_sample,
    "cost": _cmd_cost,
    "action": _cmd_action,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return _DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except IsospecError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
