"""Supersingular ell-isogeny graphs, Brandt matrices, and symmetrization.

Graph convention (pinned by the test battery, see symmetrize):

  * vertices are j-invariants in F_p^2, sorted in the canonical (a, b)-lex
    order; twists are identified (they are re-attached only at sampler
    output time);
  * B[i][k] counts ell-isogenies from vertex i to vertex k, i.e. the root
    multiplicity of j_k in Phi_ell(j_i, Y); rows therefore sum to ell + 1;
  * A' = D^s B D^(-s) with D = diag(w), where the exponent sign s is chosen
    by a symmetry self-test: s = +1/2 is tried first and on failure s = -1/2
    is used and recorded.  The Perron vector of A' is D^s 1 either way.

Graphs are immutable after construction.  Builds are deterministic; the
module-level caches exploit that (distinct p never share state).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import modpoly
from .arith import (Fp2Elem, arr_powers, field, find_seed_j,
                    is_supersingular_fp, root_multiplicities)
from .errors import (CorruptCache, IoError, SeedNotSupersingular,
                     SymmetrizationFailed)

CACHE_FORMAT_VERSION = 1

ORIENT_PLUS = "D+1/2 B D-1/2"
ORIENT_MINUS = "D-1/2 B D+1/2"


def automorphism_weight(j, ctx):
    """|Aut(E)/{+-1}|: 3 at j=0, 2 at j=1728, else 1."""
    if isinstance(j, int):
        j = ctx.elem(j)
    if j == ctx.elem(0):
        return 3
    if j == ctx.elem(1728 % ctx.p):
        return 2
    return 1


def phi_neighbors(phi, j, ctx, rng=None):
    """Roots of Phi_ell(j, Y) over F_p^2 with multiplicities.

    For supersingular j the polynomial splits completely, so the
    multiplicities sum to ell + 1.
    """
    if isinstance(j, int):
        j = ctx.elem(j)
    p = ctx.p
    grid = phi.reduce_mod(p)
    d = phi.ell + 1
    jp = [(1, 0)]
    for _ in range(d):
        jp.append(ctx.mul(jp[-1], (j.a, j.b)))
    coeffs = []
    for k in range(d + 1):
        ca = cb = 0
        col = grid[:, k]
        for i in range(d + 1):
            c = int(col[i])
            if c:
                ca += c * jp[i][0]
                cb += c * jp[i][1]
        coeffs.append((ca % p, cb % p))
    return root_multiplicities(coeffs, ctx, rng=rng)


@dataclass(eq=False)
class IsogenyGraph:
    """Vertex list, integer Brandt matrix, weights, and the pinned
    symmetrization orientation."""

    p: int
    ell: int
    vertices: tuple
    B: np.ndarray
    w: np.ndarray
    orientation: str = dc_field(default="")

    @property
    def n(self):
        return len(self.vertices)

    def vertex_index(self, j):
        try:
            return self.vertices.index(j)
        except ValueError:
            raise KeyError(f"{j} is not a vertex") from None

    def __eq__(self, other):
        return (isinstance(other, IsogenyGraph)
                and self.p == other.p and self.ell == other.ell
                and self.vertices == other.vertices
                and np.array_equal(self.B, other.B)
                and np.array_equal(self.w, other.w)
                and self.orientation == other.orientation)


@dataclass(eq=False)
class SymmetricOperator:
    """A' = D^s B D^(-s), real symmetric with spectrum equal to B's."""

    p: int
    ell: int
    A: np.ndarray
    orientation: str
    w: np.ndarray

    def perron_vector(self):
        """Unit eigenvector for eigenvalue ell + 1: normalized D^s 1."""
        s = 0.5 if self.orientation == ORIENT_PLUS else -0.5
        v = self.w.astype(np.float64) ** s
        return v / np.linalg.norm(v)


def _mass_check(p, weights):
    total = sum(Fraction(1, int(wi)) for wi in weights)
    return total == Fraction(p - 1, 12)


def _validate_build(p, ell, vertices, B, w):
    n = len(vertices)
    if not np.all(B.sum(axis=1) == ell + 1):
        raise SeedNotSupersingular(
            f"row sums != {ell + 1} for p={p}, ell={ell}: "
            "vertex set is not a closed supersingular locus")
    if not _mass_check(p, w):
        raise SeedNotSupersingular(
            f"Eichler mass formula fails for p={p}: seed was not supersingular")
    if not (p // 12 <= n <= p // 12 + 2):
        raise SeedNotSupersingular(f"vertex count {n} out of range for p={p}")


def _pick_orientation(B, w, ell):
    """Symmetry self-test for the D-conjugation exponent."""
    tol = 1e-12 * (ell + 1)
    d = np.sqrt(w.astype(np.float64))
    for orient, left, right in ((ORIENT_PLUS, d, 1.0 / d),
                                (ORIENT_MINUS, 1.0 / d, d)):
        A = left[:, None] * B * right[None, :]
        if np.max(np.abs(A - A.T)) <= tol:
            return orient
    raise SymmetrizationFailed(
        "neither D-exponent convention symmetrizes B; build is inconsistent")


def symmetrize(graph):
    """Conjugate B by diag(w)^(+-1/2) into a real symmetric operator."""
    d = np.sqrt(graph.w.astype(np.float64))
    if graph.orientation == ORIENT_PLUS:
        A = d[:, None] * graph.B * (1.0 / d)[None, :]
    else:
        A = (1.0 / d)[:, None] * graph.B * d[None, :]
    A = 0.5 * (A + A.T)  # scrub float roundoff; symmetry already verified
    return SymmetricOperator(graph.p, graph.ell, A, graph.orientation, graph.w)


def _weights_for(vertices, ctx):
    return np.array([automorphism_weight(j, ctx) for j in vertices],
                    dtype=np.int64)


def build_graph(ctx, ell, seed_j=None, phi=None):
    """Breadth-first closure of phi_neighbors from a supersingular seed."""
    if ell == ctx.p:
        raise SeedNotSupersingular(f"ell = p = {ell} is not allowed")
    if phi is None:
        phi = modpoly.bundled(ell)
    if seed_j is None:
        seed_j = find_seed_j(ctx)
    if seed_j.in_base_field() and not is_supersingular_fp(seed_j, ctx):
        raise SeedNotSupersingular(f"seed j = {seed_j} is ordinary for p = {ctx.p}")
    adj = {}
    frontier = [seed_j]
    seen = {seed_j}
    while frontier:
        nxt = []
        for j in sorted(frontier):
            nb = phi_neighbors(phi, j, ctx)
            adj[j] = nb
            for jp, _ in nb:
                if jp not in seen:
                    seen.add(jp)
                    nxt.append(jp)
        frontier = nxt
    vertices = tuple(sorted(seen))
    index = {j: i for i, j in enumerate(vertices)}
    n = len(vertices)
    B = np.zeros((n, n), dtype=np.int64)
    for j, nb in adj.items():
        for jp, mult in nb:
            B[index[j], index[jp]] = mult
    w = _weights_for(vertices, ctx)
    _validate_build(ctx.p, ell, vertices, B, w)
    return IsogenyGraph(ctx.p, ell, vertices, B, w, _pick_orientation(B, w, ell))


# -- fast family construction ---------------------------------------------------
# The vertex set is shared by every ell, so it is discovered once (with the
# cheap cubic Phi_2) and each Brandt matrix is then read off a dense grid of
# Phi_ell evaluations over vertex pairs plus synthetic division for root
# multiplicities.  Row sums are still verified, which also certifies closure.


@lru_cache(maxsize=512)
def vertex_set(p):
    """Sorted supersingular j-invariants over F_p^2 (discovered via ell=2)."""
    ctx = field(p)
    phi2 = modpoly.bundled(2)
    seed = find_seed_j(ctx)
    seen = {seed}
    frontier = [seed]
    while frontier:
        nxt = []
        for j in sorted(frontier):
            for jp, _ in phi_neighbors(phi2, j, ctx):
                if jp not in seen:
                    seen.add(jp)
                    nxt.append(jp)
        frontier = nxt
    return tuple(sorted(seen))


def _brandt_grid(ctx, phi, vertices):
    """Brandt matrix on a known closed vertex set, via pair-grid evaluation."""
    p, ns = ctx.p, ctx.ns
    n = len(vertices)
    d = phi.ell + 1
    grid = phi.reduce_mod(p)
    va = np.array([v.a for v in vertices], dtype=np.int64)
    vb = np.array([v.b for v in vertices], dtype=np.int64)
    Pa, Pb = arr_powers(va, vb, d, p, ns)
    # univariate coefficients per source vertex: g_a(Y) = sum_k G[a, k] Y^k
    Ga = (Pa @ grid) % p
    Gb = (Pb @ grid) % p
    # values on the pair grid
    Va = (Ga @ Pa.T + ns * (Gb @ Pb.T)) % p
    Vb = (Ga @ Pb.T + Gb @ Pa.T) % p
    B = np.zeros((n, n), dtype=np.int64)
    zero_rows, zero_cols = np.nonzero((Va == 0) & (Vb == 0))
    by_row = {}
    for r, c in zip(zero_rows.tolist(), zero_cols.tolist()):
        by_row.setdefault(r, []).append(c)
    for r, cols in by_row.items():
        coeffs = [(int(Ga[r, k]), int(Gb[r, k])) for k in range(d + 1)]
        for c in cols:
            root = (int(va[c]), int(vb[c]))
            mult = 0
            g = coeffs
            while True:
                quo = [(0, 0)] * (len(g) - 1)
                acc = (0, 0)
                for i in range(len(g) - 1, -1, -1):
                    acc = ctx.add(g[i], ctx.mul(acc, root))
                    if i > 0:
                        quo[i - 1] = acc
                if acc != (0, 0):
                    break
                mult += 1
                g = quo
            B[r, c] = mult
    return B


@lru_cache(maxsize=1024)
def build_graph_fast(p, ell, phi_dir=None):
    """Cached Brandt-matrix build on the shared vertex set for p."""
    ctx = field(p)
    vertices = vertex_set(p)
    phi = (modpoly.load_modular_polynomial(ell, phi_dir) if phi_dir
           else modpoly.bundled(ell))
    B = _brandt_grid(ctx, phi, vertices)
    w = _weights_for(vertices, ctx)
    _validate_build(p, ell, vertices, B, w)
    return IsogenyGraph(p, ell, vertices, B, w, _pick_orientation(B, w, ell))


def build_family(p, ells, phi_dir=None):
    """Graphs for several ell over the shared vertex set of p."""
    return {ell: build_graph_fast(p, ell, phi_dir) for ell in ells}


# -- persistence ------------------------------------------------------------------


def _payload(graph):
    return {
        "vertices": [[v.a, v.b] for v in graph.vertices],
        "w": graph.w.tolist(),
        "B": graph.B.reshape(-1).tolist(),
    }


def _checksum(payload):
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def save_graph(graph, path):
    """Atomic write: JSON header + row-major integer payload."""
    payload = _payload(graph)
    doc = {
        "format_version": CACHE_FORMAT_VERSION,
        "p": graph.p,
        "ell": graph.ell,
        "n": graph.n,
        "orientation": graph.orientation,
        "checksum": _checksum(payload),
        **payload,
    }
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
    os.replace(tmp, path)


def load_graph(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read graph cache {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptCache(f"graph cache {path} is not valid JSON") from exc
    try:
        if doc["format_version"] != CACHE_FORMAT_VERSION:
            raise CorruptCache(f"unsupported cache format {doc['format_version']}")
        payload = {k: doc[k] for k in ("vertices", "w", "B")}
        if _checksum(payload) != doc["checksum"]:
            raise CorruptCache(f"checksum mismatch in {path}")
        n = doc["n"]
        graph = IsogenyGraph(
            doc["p"], doc["ell"],
            tuple(Fp2Elem(a, b) for a, b in payload["vertices"]),
            np.array(payload["B"], dtype=np.int64).reshape(n, n),
            np.array(payload["w"], dtype=np.int64),
            doc["orientation"],
        )
    except (KeyError, ValueError) as exc:
        raise CorruptCache(f"graph cache {path} is malformed: {exc}") from exc
    return graph


def cache_roundtrip(graph, cache_dir):
    """Save to the canonical cache path and reload; must be bit-exact."""
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"graph_p{graph.p}_ell{graph.ell}.json")
    save_graph(graph, path)
    return load_graph(path)


def cached_build(p, ell, cache_dir=None, phi_dir=None):
    """Build with a persistent cache; returns (graph, cache_hit)."""
    if cache_dir is None:
        return build_graph_fast(p, ell, phi_dir), False
    path = os.path.join(cache_dir, f"graph_p{p}_ell{ell}.json")
    if os.path.exists(path):
        graph = load_graph(path)
        if graph.p == p and graph.ell == ell:
            return graph, True
        raise CorruptCache(f"cache file {path} holds the wrong graph")
    graph = build_graph_fast(p, ell, phi_dir)
    os.makedirs(cache_dir, exist_ok=True)
    save_graph(graph, path)
    return graph, False
