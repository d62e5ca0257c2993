"""Scan drivers over ranges of primes, with frozen CSV/JSON schemas.

Every row is a pure function of (p, seed), so scans can fan out over a
process pool; results are merged in p order regardless of completion order
and runs with identical parameters are byte-identical.

CSV schemas (column order is frozen; floats are written as shortest
round-trip reprs):

  supnorm:    p, n, supnorm, ratio, seed, eig_residual_tol, degeneracy_gap
  separation: p, n, window, min_separation, min_separation_with_perron,
              seed, eig_residual_tol, degeneracy_gap
  moment:     p, n, statistic, normalized, seed, eig_residual_tol,
              degeneracy_gap
  cost:       p, regime, r, total, leading_term

The JSON variant carries the same rows plus a metadata object (tool
version, seed, tolerances).
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor

import sympy

from . import __version__
from .graphs import build_family, symmetrize
from .spectra import (DEGENERACY_GAP, EIG_RESIDUAL_TOL, fourth_moment_stat,
                      joint_diagonalize, separation_report, supnorm_report,
                      tag_window)
from .walksim import pipeline_cost

SUPNORM_COLUMNS = ("p", "n", "supnorm", "ratio", "seed",
                   "eig_residual_tol", "degeneracy_gap")
SEPARATION_COLUMNS = ("p", "n", "window", "min_separation",
                      "min_separation_with_perron", "seed",
                      "eig_residual_tol", "degeneracy_gap")
MOMENT_COLUMNS = ("p", "n", "statistic", "normalized", "seed",
                  "eig_residual_tol", "degeneracy_gap")
COST_COLUMNS = ("p", "regime", "r", "total", "leading_term")


def primes_in(pmin, pmax, stride=1, limit=None):
    """Primes in [pmin, pmax], optionally every stride-th, capped at limit."""
    ps = list(sympy.primerange(pmin, pmax + 1))
    ps = ps[::max(1, stride)]
    return ps[:limit] if limit else ps


def basis_for(p, ells, seed=0):
    fam = build_family(p, tuple(ells))
    ops = [symmetrize(fam[ell]) for ell in ells]
    return joint_diagonalize(ops, seed=seed)


def _tol_fields(seed):
    return {"seed": seed, "eig_residual_tol": EIG_RESIDUAL_TOL,
            "degeneracy_gap": DEGENERACY_GAP}


def supnorm_row(p, ells=(2, 3, 5), seed=0):
    rep = supnorm_report(basis_for(p, ells, seed))
    return {"p": p, "n": rep.n, "supnorm": rep.supnorm, "ratio": rep.ratio,
            **_tol_fields(seed)}


def separation_row(p, seed=0):
    window = tag_window(p)
    rep = separation_report(basis_for(p, window, seed))
    return {"p": p, "n": rep.n, "window": " ".join(map(str, window)),
            "min_separation": rep.min_separation,
            "min_separation_with_perron": rep.min_separation_with_perron,
            **_tol_fields(seed)}


def moment_row(p, ells=(2, 3, 5), seed=0):
    rep = fourth_moment_stat(basis_for(p, ells, seed))
    return {"p": p, "n": rep.n, "statistic": rep.statistic,
            "normalized": rep.normalized, **_tol_fields(seed)}


def cost_row(p, regime="heuristic"):
    pc = pipeline_cost(p, regime)
    return {"p": p, "regime": regime, "r": pc.r, "total": pc.total,
            "leading_term": pc.leading}


_WORKERS = {"supnorm": supnorm_row, "separation": separation_row,
            "moment": moment_row}


def _call(args):
    kind, p, kwargs = args
    return _WORKERS[kind](p, **kwargs)


def run_scan(kind, primes, jobs=1, **kwargs):
    """Rows for one scan kind over the given primes, merged in p order."""
    tasks = [(kind, p, kwargs) for p in sorted(primes)]
    if jobs <= 1:
        rows = [_call(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_call, tasks))
    rows.sort(key=lambda r: r["p"])
    return rows


def format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows, columns):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_cell(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def rows_to_json(rows, columns, seed=None):
    doc = {
        "meta": {
            "tool": "isospec",
            "version": __version__,
            "columns": list(columns),
            "seed": seed,
            "eig_residual_tol": EIG_RESIDUAL_TOL,
            "degeneracy_gap": DEGENERACY_GAP,
        },
        "rows": [{c: row[c] for c in columns} for row in rows],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
