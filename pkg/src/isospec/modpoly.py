"""Classical modular polynomials: file format, lookup, and mod-p reduction.

File format ("i j c", one monomial per line, '#' comments): a line with
i > j encodes c*(X^i Y^j + X^j Y^i); a line with i == j encodes c*X^i Y^i.
This matches the symmetric folding used by the standard public databases.

Lookup order for a level ell:
  1. an explicit file path passed by the caller (CLI --phi-dir expands to this),
  2. the directory named by the ISOSPEC_PHI_DIR environment variable,
  3. the table bundled with the package (levels 2..47).

Level coverage beyond the bundled table requires an external database file;
asking for an uncovered level raises Unavailable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
import sympy

from .errors import DegreeMismatch, ParseError, Unavailable

ENV_PHI_DIR = "ISOSPEC_PHI_DIR"


@dataclass(frozen=True)
class ModularPolynomial:
    """Phi_ell over Z as a folded symmetric monomial list."""

    ell: int
    monomials: tuple  # ((i, j, c), ...) with i >= j, symmetric completion implied

    def coefficient_grid(self):
        """Full (ell+2) x (ell+2) grid of integer coefficients."""
        n = self.ell + 2
        grid = [[0] * n for _ in range(n)]
        for i, j, c in self.monomials:
            grid[i][j] = c
            grid[j][i] = c
        return grid

    def evaluate(self, x, y, ctx):
        """Phi(x, y) for scalar F_p^2 pairs; test/debug convenience."""
        xp = [(1, 0)]
        yp = [(1, 0)]
        for _ in range(self.ell + 1):
            xp.append(ctx.mul(xp[-1], x))
            yp.append(ctx.mul(yp[-1], y))
        acc = (0, 0)
        p = ctx.p
        for i, j, c in self.monomials:
            term = ctx.mul(xp[i], yp[j])
            if i != j:
                term = ctx.add(term, ctx.mul(xp[j], yp[i]))
            acc = ctx.add(acc, ((c % p) * term[0] % p, (c % p) * term[1] % p))
        return acc

    def reduce_mod(self, p):
        """Coefficient grid reduced mod p as an int64 array."""
        grid = np.array(self.coefficient_grid(), dtype=object) % p
        return grid.astype(np.int64)


def _parse_phi_text(text, ell):
    monos = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'i j c', got {raw!r}")
        try:
            i, j, c = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer token in {raw!r}") from None
        if i < j:
            raise ParseError(f"line {lineno}: monomials must have i >= j")
        if (i, j) in seen:
            raise ParseError(f"line {lineno}: duplicate monomial ({i},{j})")
        seen.add((i, j))
        monos.append((i, j, c))
    if not monos:
        raise ParseError("no monomials found")
    deg_x = max(i for i, _, _ in monos)
    if deg_x != ell + 1:
        raise DegreeMismatch(f"deg_X = {deg_x}, expected {ell + 1} for level {ell}")
    monos.sort(reverse=True)
    return ModularPolynomial(ell, tuple(monos))


def _builtin_dir():
    return resources.files("isospec").joinpath("data/phi")


def load_modular_polynomial(ell, source=None):
    """Load Phi_ell from a file path, the env-var directory, or the bundle.

    source=None means "search"; a str/Path is used verbatim.
    """
    if not sympy.isprime(ell):
        raise ParseError(f"level {ell} is not prime")
    if source is not None:
        path = Path(source)
        if path.is_dir():
            path = path / f"phi_ell_{ell}.txt"
        if not path.exists():
            raise Unavailable(f"no modular polynomial file at {path}")
        return _parse_phi_text(path.read_text(encoding="utf-8"), ell)
    env_dir = os.environ.get(ENV_PHI_DIR)
    if env_dir:
        path = Path(env_dir) / f"phi_ell_{ell}.txt"
        if path.exists():
            return _parse_phi_text(path.read_text(encoding="utf-8"), ell)
    builtin = _builtin_dir().joinpath(f"phi_ell_{ell}.txt")
    if builtin.is_file():
        return _parse_phi_text(builtin.read_text(encoding="utf-8"), ell)
    raise Unavailable(
        f"no modular polynomial for level {ell}: not bundled and no file found "
        f"(set {ENV_PHI_DIR} or pass a path)")


@lru_cache(maxsize=None)
def bundled(ell):
    """Memoized bundled-table lookup (env var still honored)."""
    return load_modular_polynomial(ell)


def bundled_levels():
    """Sorted levels available in the package bundle."""
    out = []
    for entry in _builtin_dir().iterdir():
        name = entry.name
        if name.startswith("phi_ell_") and name.endswith(".txt"):
            out.append(int(name[len("phi_ell_"):-len(".txt")]))
    return sorted(out)
