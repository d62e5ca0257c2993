"""Arithmetic over F_p and F_p^2, supersingularity tests, and curve encodings.

Conventions fixed here and relied on everywhere else:

  * F_p^2 = F_p[t] / (t^2 - ns) where ns is the smallest quadratic
    non-residue mod p.  Elements are a + b*t with a, b in [0, p).
  * The canonical total order on F_p^2 is lexicographic on (a, b); vertex
    lists of isogeny graphs are sorted in this order.
  * Supersingularity of j in F_p is decided by exhaustive point counting
    over F_p (a curve is supersingular iff its trace vanishes, which for
    p >= 5 forces #E(F_p) = p + 1).  This is O(p) per j with a cached
    quadratic-character table and is fine at desk scale.

Hot paths (graph building) use vectorized int64 arrays of (a, b) pairs; the
scalar Fp2Elem class is the convenience surface for everything else.
p is assumed < 2^31 so products of residues fit in int64.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy

from .errors import NonPrime, PTooSmall, UnknownVertex


@dataclass(frozen=True, order=True)
class Fp2Elem:
    """Element a + b*t of F_p^2; ordering is lex on (a, b)."""

    a: int
    b: int

    def __str__(self):
        return f"{self.a}+{self.b}*t"

    def in_base_field(self):
        return self.b == 0


class FieldCtx:
    """A prime p with a fixed model of F_p^2 and a verified generator.

    Instances are immutable after construction and safe to share between
    workers; the lazily built character table is written once.
    """

    def __init__(self, p, ns, alpha):
        self.p = p
        self.ns = ns
        self.alpha = alpha
        self._chi = None  # quadratic character table over F_p, built lazily

    # -- scalar F_p^2 arithmetic on (a, b) int pairs --------------------------

    def add(self, x, y):
        p = self.p
        return ((x[0] + y[0]) % p, (x[1] + y[1]) % p)

    def sub(self, x, y):
        p = self.p
        return ((x[0] - y[0]) % p, (x[1] - y[1]) % p)

    def mul(self, x, y):
        p, ns = self.p, self.ns
        return ((x[0] * y[0] + ns * x[1] * y[1]) % p,
                (x[0] * y[1] + x[1] * y[0]) % p)

    def inv(self, x):
        # 1/(a + bt) = (a - bt)/(a^2 - ns b^2); the norm is in F_p*.
        p, ns = self.p, self.ns
        nrm = (x[0] * x[0] - ns * x[1] * x[1]) % p
        if nrm == 0:
            raise ZeroDivisionError("inverse of zero in F_p^2")
        ninv = pow(nrm, p - 2, p)
        return ((x[0] * ninv) % p, ((-x[1]) * ninv) % p)

    def pow(self, x, e):
        if e < 0:
            return self.pow(self.inv(x), -e)
        acc = (1, 0)
        base = x
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def norm(self, x):
        """Norm to F_p: (a + bt)(a - bt) = a^2 - ns b^2."""
        return (x[0] * x[0] - self.ns * x[1] * x[1]) % self.p

    def elem(self, a, b=0):
        return Fp2Elem(a % self.p, b % self.p)

    # -- quadratic character over F_p -----------------------------------------

    def chi_table(self):
        """chi[v] = Legendre symbol (v|p) as int8, chi[0] = 0."""
        if self._chi is None:
            p = self.p
            x = np.arange(p, dtype=np.int64)
            chi = np.full(p, -1, dtype=np.int8)
            chi[(x * x) % p] = 1
            chi[0] = 0
            self._chi = chi
        return self._chi

    def __repr__(self):
        return f"FieldCtx(p={self.p}, ns={self.ns}, alpha={self.alpha})"


def make_field(p):
    """Build the field context for an odd prime p > 3.

    Finds the smallest quadratic non-residue ns and a generator alpha of
    F_p^2^* whose order is verified against the factorization of p^2 - 1.
    """
    if not isinstance(p, int) or not sympy.isprime(p):
        raise NonPrime(f"p = {p} is not prime")
    if p <= 3:
        raise PTooSmall(f"p = {p} too small; need p > 3")
    ns = 2
    while pow(ns, (p - 1) // 2, p) != p - 1:
        ns += 1
    ctx = FieldCtx(p, ns, None)
    order = p * p - 1
    prime_factors = set(sympy.factorint(p - 1)) | set(sympy.factorint(p + 1))
    cofactors = [order // f for f in sorted(prime_factors)]
    c = 0
    while True:
        cand = (c, 1)  # elements of F_p never generate, so search c + t
        if all(ctx.pow(cand, e) != (1, 0) for e in cofactors):
            break
        c += 1
    ctx.alpha = Fp2Elem(*cand)
    return ctx


@lru_cache(maxsize=None)
def field(p):
    """Memoized make_field; contexts are immutable so sharing is safe."""
    return make_field(p)


# -- supersingularity over F_p -------------------------------------------------


def short_weierstrass_fp(j, p):
    """Integer coefficients (A, B) of a curve over F_p with j-invariant j."""
    j %= p
    if j == 0:
        return 0, 1
    if j == 1728 % p:
        return 1, 0
    k = (j * pow((1728 - j) % p, p - 2, p)) % p
    return (3 * k) % p, (2 * k) % p


def is_supersingular_fp(j, ctx):
    """True iff the curve with j-invariant j in F_p has trace 0 over F_p.

    Exhaustive point count: #E(F_p) = p + 1 + sum_x chi(x^3 + Ax + B);
    the character sum is twist-invariant, so the model choice is immaterial.
    """
    if isinstance(j, Fp2Elem):
        if not j.in_base_field():
            raise UnknownVertex(f"j = {j} is not in the base field F_p")
        j = j.a
    p = ctx.p
    A, B = short_weierstrass_fp(j, p)
    x = np.arange(p, dtype=np.int64)
    f = ((x * x % p) * x + A * x + B) % p
    return int(ctx.chi_table()[f].sum()) == 0


def find_seed_j(ctx):
    """Smallest j in F_p (integer order) that is supersingular."""
    for j in range(ctx.p):
        if is_supersingular_fp(j, ctx):
            return ctx.elem(j)
    raise AssertionError("no supersingular j in F_p; unreachable for p > 3")


def is_supersingular_fp2(j, ctx):
    """Supersingularity of any j in F_p^2 by O(p^2) point counting.

    Counts points of one model with invariant j over F_q, q = p^2, using
    chi_q(v) = chi_p(Norm(v)); supersingular iff the trace is divisible
    by p.  Meant for tests and small p.
    """
    p, ns = ctx.p, ctx.ns
    A, B = curve_model(j, 0, ctx)
    xa = np.repeat(np.arange(p, dtype=np.int64), p)
    xb = np.tile(np.arange(p, dtype=np.int64), p)
    # f = x^3 + A x + B over F_q, componentwise
    sa, sb = (xa * xa + ns * xb * xb) % p, (2 * xa * xb) % p       # x^2
    ca, cb = (sa * xa + ns * sb * xb) % p, (sa * xb + sb * xa) % p  # x^3
    fa = (ca + A.a * xa + ns * A.b * xb + B.a) % p
    fb = (cb + A.a * xb + A.b * xa + B.b) % p
    nrm = (fa * fa - ns * fb * fb) % p
    npoints = p * p + 1 + int(ctx.chi_table()[nrm].sum(dtype=np.int64))
    trace = p * p + 1 - npoints
    return trace % p == 0


# -- the (j, b) curve encoding -------------------------------------------------


def twist_codes(j, ctx):
    """Valid twist indices b for the curve class with invariant j."""
    if isinstance(j, int):
        j = ctx.elem(j)
    if j == ctx.elem(0):
        return list(range(6))
    if j == ctx.elem(1728 % ctx.p):
        return list(range(4))
    return list(range(2))


@dataclass(frozen=True)
class CurveCode:
    """Output encoding (j, b): the twist index b selects the K-isomorphism
    class among curves sharing the invariant j."""

    j: Fp2Elem
    b: int

    def __post_init__(self):
        if self.b < 0:
            raise UnknownVertex(f"negative twist index {self.b}")


def curve_model(j, b, ctx):
    """Weierstrass coefficients (A, B) over F_p^2 of the class (j, b)."""
    if isinstance(j, int):
        j = ctx.elem(j)
    if b not in twist_codes(j, ctx):
        raise UnknownVertex(f"twist index {b} invalid for j = {j}")
    alpha = (ctx.alpha.a, ctx.alpha.b)
    if j == ctx.elem(0):
        return ctx.elem(0), Fp2Elem(*ctx.pow(alpha, b))
    if j == ctx.elem(1728 % ctx.p):
        return Fp2Elem(*ctx.pow(alpha, b)), ctx.elem(0)
    jt = (j.a, j.b)
    k = ctx.mul(jt, ctx.inv(ctx.sub((1728 % ctx.p, 0), jt)))
    A = ctx.mul((3, 0), ctx.mul(k, ctx.pow(alpha, 2 * b)))
    B = ctx.mul((2, 0), ctx.mul(k, ctx.pow(alpha, 3 * b)))
    return Fp2Elem(*A), Fp2Elem(*B)


# -- univariate polynomials over F_p^2 ------------------------------------------
# Coefficient lists [(a, b), ...], index = degree, trailing zeros stripped.


def _poly_trim(f):
    while f and f[-1] == (0, 0):
        f.pop()
    return f


def _poly_sub(f, g, ctx):
    n = max(len(f), len(g))
    out = []
    for i in range(n):
        x = f[i] if i < len(f) else (0, 0)
        y = g[i] if i < len(g) else (0, 0)
        out.append(ctx.sub(x, y))
    return _poly_trim(out)


def _poly_mul(f, g, ctx):
    if not f or not g:
        return []
    out = [(0, 0)] * (len(f) + len(g) - 1)
    p, ns = ctx.p, ctx.ns
    for i, (xa, xb) in enumerate(f):
        if xa == 0 and xb == 0:
            continue
        for k, (ya, yb) in enumerate(g):
            oa, ob = out[i + k]
            out[i + k] = ((oa + xa * ya + ns * xb * yb) % p,
                          (ob + xa * yb + xb * ya) % p)
    return _poly_trim(out)


def _poly_mod(f, g, ctx):
    f = list(f)
    dg = len(g) - 1
    glead_inv = ctx.inv(g[-1])
    while len(f) - 1 >= dg and f:
        c = ctx.mul(f[-1], glead_inv)
        shift = len(f) - 1 - dg
        for i in range(dg + 1):
            f[shift + i] = ctx.sub(f[shift + i], ctx.mul(c, g[i]))
        _poly_trim(f)
    return f


def _poly_powmod(base, e, mod, ctx):
    acc = [(1, 0)]
    base = _poly_mod(base, mod, ctx)
    while e:
        if e & 1:
            acc = _poly_mod(_poly_mul(acc, base, ctx), mod, ctx)
        base = _poly_mod(_poly_mul(base, base, ctx), mod, ctx)
        e >>= 1
    return acc


def _poly_gcd(f, g, ctx):
    while g:
        f, g = g, _poly_mod(f, g, ctx)
    if f:
        lead_inv = ctx.inv(f[-1])
        f = [ctx.mul(c, lead_inv) for c in f]
    return f


def _poly_monic(f, ctx):
    li = ctx.inv(f[-1])
    return [ctx.mul(c, li) for c in f]


def _deflate(f, root, ctx):
    """Divide f by (Y - root); returns (quotient, remainder)."""
    out = [(0, 0)] * (len(f) - 1)
    acc = (0, 0)
    for i in range(len(f) - 1, -1, -1):
        acc = ctx.add(f[i], ctx.mul(acc, root))
        if i > 0:
            out[i - 1] = acc
    return out, acc


def root_multiplicities(f, ctx, rng=None):
    """All roots of f in F_p^2 with multiplicities, by equal-degree splitting.

    Deterministic for a given rng seed; with rng=None a seed is derived from
    (p, f) so repeated calls agree.  Repeated roots are peeled off by
    synthetic division before the squarefree part is split.
    """
    if rng is None:
        h = hashlib.sha256(repr((ctx.p, ctx.ns, tuple(f))).encode()).digest()
        rng = np.random.default_rng(int.from_bytes(h[:8], "big"))
    p = ctx.p
    q = p * p
    roots = {}
    f = _poly_monic(list(f), ctx)
    # strip known roots greedily as they are found
    work = [f]
    linear_done = []
    while work:
        g = work.pop()
        if len(g) - 1 == 0:
            continue
        if len(g) - 1 == 1:
            linear_done.append(ctx.sub((0, 0), g[0]))  # monic: root = -c0
            continue
        # keep only the part that splits into distinct linear factors
        xq = _poly_powmod([(0, 0), (1, 0)], q, g, ctx)
        lin = _poly_gcd(_poly_sub(xq, [(0, 0), (1, 0)], ctx), g, ctx)
        if len(lin) - 1 == 0:
            continue  # no roots in F_p^2 in this factor
        if lin != g:
            work.append(lin)
            continue
        # g splits completely and is squarefree here; random-shift split
        while True:
            delta = (int(rng.integers(p)), int(rng.integers(p)))
            spl = _poly_powmod([delta, (1, 0)], (q - 1) // 2, g, ctx)
            spl = _poly_sub(spl, [(1, 0)], ctx)
            h1 = _poly_gcd(spl, g, ctx)
            if 0 < len(h1) - 1 < len(g) - 1:
                work.append(h1)
                work.append(_poly_divexact(g, h1, ctx))
                break
    for r in linear_done:
        roots[r] = roots.get(r, 0)
    # multiplicities via deflation against the original polynomial
    out = []
    for r in roots:
        mult = 0
        g = f
        while True:
            quo, rem = _deflate(g, r, ctx)
            if rem != (0, 0):
                break
            mult += 1
            g = quo
            if not g:
                break
        out.append((Fp2Elem(*r), mult))
    out.sort(key=lambda t: (t[0].a, t[0].b))
    return out


def _poly_divexact(f, g, ctx):
    """f / g when the division is exact."""
    f = list(f)
    out = [(0, 0)] * (len(f) - len(g) + 1)
    ginv = ctx.inv(g[-1])
    while len(f) >= len(g) and f:
        c = ctx.mul(f[-1], ginv)
        shift = len(f) - len(g)
        out[shift] = c
        for i in range(len(g)):
            f[shift + i] = ctx.sub(f[shift + i], ctx.mul(c, g[i]))
        _poly_trim(f)
    assert not f, "inexact polynomial division"
    return _poly_trim(out)


# -- vectorized F_p^2 arrays (used by the graph builder) -------------------------


def arr_mul(xa, xb, ya, yb, p, ns):
    return (xa * ya + ns * xb * yb) % p, (xa * yb + xb * ya) % p


def arr_powers(xa, xb, dmax, p, ns):
    """Stacked powers x^0..x^dmax of an array of F_p^2 elements.

    Returns (Pa, Pb) with shape (len(x), dmax + 1).
    """
    n = len(xa)
    Pa = np.zeros((n, dmax + 1), dtype=np.int64)
    Pb = np.zeros((n, dmax + 1), dtype=np.int64)
    Pa[:, 0] = 1
    if dmax >= 1:
        Pa[:, 1] = xa
        Pb[:, 1] = xb
    for d in range(2, dmax + 1):
        Pa[:, d], Pb[:, d] = arr_mul(Pa[:, d - 1], Pb[:, d - 1], xa, xb, p, ns)
    return Pa, Pb
