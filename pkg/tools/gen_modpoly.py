#!/usr/bin/env python3
"""Generate classical modular polynomials Phi_ell(X, Y) over Z as data files.

Method: q-expansion arithmetic.  With s = q^(1/ell), the ell+1 conjugate
functions of j(q) under the level-ell correspondence are

    f_k(s) = j(zeta^k s)   (k = 0..ell-1)   and   f_inf = j(q^ell),

and Phi_ell(X, j(q)) = (X - f_inf) * prod_k (X - f_k).  The elementary
symmetric functions of the f_k are computed from the power sums

    p_m = sum_k f_k^m = ell * U_ell(j^m),

where U_ell keeps every ell-th q-exponent; no root of unity is ever
materialized.  Each X-coefficient is then a q-series that gets rewritten as
an integer polynomial in j(q) by peeling off the pole order.  All arithmetic
is exact (Python ints).

Built-in validation per level:
  * X-degree ell+1, monic, coefficient grid symmetric;
  * Kronecker congruence Phi_ell == (X^ell - Y)(X - Y^ell) mod ell;
  * the j-reduction residual vanishes through the positive-power margin;
  * for ell in {2, 3}: exact match against the published coefficient tables.

Output: one file per level, lines "i j c" with i >= j (symmetric completion
implied), '#' comments allowed.  Usage:

    python tools/gen_modpoly.py --levels 2,3,5,7,11,13 --out src/isospec/data/phi
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

MARGIN = 2  # positive q-powers kept beyond q^0 for residual validation


# ----------------------------------------------------------------------------
# Dense integer series on a fixed exponent window [lo, lo + len(c) - 1].


class Series:
    __slots__ = ("lo", "c")

    def __init__(self, lo, c):
        self.lo = lo
        self.c = list(c)

    def coeff(self, n):
        k = n - self.lo
        if 0 <= k < len(self.c):
            return self.c[k]
        return 0

    def hi(self):
        return self.lo + len(self.c) - 1

    def trunc(self, hi):
        return Series(self.lo, self.c[: max(0, hi - self.lo + 1)])

    def is_zero(self):
        return all(v == 0 for v in self.c)


def s_add(a, b):
    lo = min(a.lo, b.lo)
    hi = min(a.hi(), b.hi())  # window intersection on the high side
    out = [a.coeff(n) + b.coeff(n) for n in range(lo, hi + 1)]
    return Series(lo, out)


def s_scale_sub(a, coef, b):
    """a - coef*b, truncated to the shorter high end."""
    lo = min(a.lo, b.lo)
    hi = min(a.hi(), b.hi())
    out = [a.coeff(n) - coef * b.coeff(n) for n in range(lo, hi + 1)]
    return Series(lo, out)


def s_mul(a, b, hi):
    """Product truncated at exponent hi."""
    lo = a.lo + b.lo
    n_out = hi - lo + 1
    if n_out <= 0:
        return Series(lo, [])
    out = [0] * n_out
    ac, bc = a.c, b.c
    for i, av in enumerate(ac):
        if av == 0:
            continue
        jmax = min(len(bc), n_out - i)
        if jmax <= 0:
            break
        for j in range(jmax):
            bv = bc[j]
            if bv:
                out[i + j] += av * bv
    return Series(lo, out)


def s_inv_unit(a, nterms):
    """Inverse of a series with a.lo == 0 and a.c[0] == 1."""
    assert a.lo == 0 and a.c[0] == 1
    inv = [0] * nterms
    inv[0] = 1
    ac = a.c
    for n in range(1, nterms):
        acc = 0
        for k in range(1, min(n, len(ac) - 1) + 1):
            if ac[k]:
                acc += ac[k] * inv[n - k]
        inv[n] = -acc
    return Series(0, inv)


# ----------------------------------------------------------------------------
# j-invariant q-expansion: j = E4^3 / Delta.


def j_series(hi):
    """q-expansion of j from q^-1 through q^hi, exact integers."""
    n = hi + 2  # working length in q^0..q^(n-1)
    sig3 = [0] * n
    for d in range(1, n):
        d3 = d * d * d
        for m in range(d, n, d):
            sig3[m] += d3
    e4 = Series(0, [1] + [240 * sig3[m] for m in range(1, n)])
    # Euler product prod(1-q^k) via the pentagonal number theorem (sparse).
    eul = [0] * n
    eul[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 >= n and g2 >= n:
            break
        sgn = -1 if k % 2 == 1 else 1
        if g1 < n:
            eul[g1] += sgn
        if g2 < n:
            eul[g2] += sgn
        k += 1
    p1 = Series(0, eul)
    p2 = s_mul(p1, p1, n - 1)
    p4 = s_mul(p2, p2, n - 1)
    p8 = s_mul(p4, p4, n - 1)
    p16 = s_mul(p8, p8, n - 1)
    p24 = s_mul(p16, p8, n - 1)  # Delta = q * p24
    e4cubed = s_mul(s_mul(e4, e4, n - 1), e4, n - 1)
    jhat = s_mul(e4cubed, s_inv_unit(p24, n), n - 1)
    j = Series(-1, jhat.c)
    assert j.coeff(-1) == 1 and j.coeff(0) == 744 and j.coeff(1) == 196884
    assert j.coeff(2) == 21493760 and j.coeff(3) == 864299970
    return j.trunc(hi)


def u_ell(a, ell, hi):
    """Keep exponents divisible by ell, reindexed by n -> n/ell."""
    lo_t = -((-a.lo) // ell) if a.lo < 0 else (a.lo + ell - 1) // ell
    out = []
    t = lo_t
    while t <= hi:
        out.append(a.coeff(ell * t))
        t += 1
    return Series(lo_t, out)


def reindex_pow(a, ell, hi):
    """a(q^ell) truncated at exponent hi."""
    lo = a.lo * ell
    out = [0] * (hi - lo + 1)
    for k, v in enumerate(a.c):
        n = (a.lo + k) * ell
        if n > hi:
            break
        out[n - lo] = v
    return Series(lo, out)


# ----------------------------------------------------------------------------
# Phi_ell assembly.


def compute_phi(ell, progress=False):
    """Return Phi_ell as dict {(i, d): c} with X^i Y^d monomials, i.e. the
    full (not symmetry-folded) coefficient grid."""
    t_e = MARGIN + ell + 2        # q-precision for power sums / symmetric fns
    t_j = ell * t_e               # q-precision needed on j^m
    t0 = time.time()
    # The power chain j^m loses its top coefficient at each multiplication
    # (j has a simple pole), so it carries `ell - m` spare exponents.
    j = j_series(t_j + ell - 1)

    # Power sums p_m = ell * U_ell(j^m), m = 1..ell.
    psums = [None]  # 1-indexed
    jm = j
    for m in range(1, ell + 1):
        if m > 1:
            jm = s_mul(jm, j, t_j + (ell - m))
        u = u_ell(jm, ell, t_e)
        psums.append(Series(u.lo, [ell * v for v in u.c]))
        if progress and m % 5 == 0:
            print(f"  ell={ell}: power sum {m}/{ell} ({time.time()-t0:.1f}s)", flush=True)

    # Newton's identities: e_m = (1/m) sum_{i=1..m} (-1)^(i-1) e_{m-i} p_i.
    e = [Series(0, [1] + [0] * t_e)]  # e_0 = 1
    for m in range(1, ell + 1):
        acc = Series(-2, [0] * (t_e + 3))
        for i in range(1, m + 1):
            term = s_mul(e[m - i], psums[i], t_e)
            acc = s_add(acc, term) if i % 2 == 1 else s_scale_sub(acc, 1, term)
        cm = []
        for v in acc.c:
            q, r = divmod(v, m)
            assert r == 0, "Newton identity produced a non-integer series"
            cm.append(q)
        e.append(Series(acc.lo, cm).trunc(t_e))

    # psi(X) = prod_k (X - f_k) = sum_i psi_i X^i, psi_i = (-1)^(ell-i) e_{ell-i}.
    psi = [None] * (ell + 1)
    for i in range(ell + 1):
        m = ell - i
        sgn = -1 if m % 2 == 1 else 1
        psi[i] = Series(e[m].lo, [sgn * v for v in e[m].c])

    # Phi coefficients c_i = psi_{i-1} - j(q^ell) * psi_i.
    jl = reindex_pow(j, ell, MARGIN + ell)
    coef = [None] * (ell + 2)
    for i in range(ell + 2):
        acc = Series(-(ell + 1), [0] * (MARGIN + ell + 2))
        if i >= 1:
            acc = s_add(acc, psi[i - 1])
        if i <= ell:
            acc = s_scale_sub(acc, 1, s_mul(jl, psi[i], MARGIN))
        coef[i] = acc.trunc(MARGIN)

    # Rewrite each q-series as an integer polynomial in j.  j^d must be exact
    # through q^MARGIN, so intermediates carry headroom for the remaining
    # multiplications (each factor j contributes a simple pole).
    jpow = [Series(0, [1] + [0] * (MARGIN + ell + 1))]
    for d in range(1, ell + 2):
        jpow.append(s_mul(jpow[-1], j, MARGIN + (ell + 1 - d)))
    grid = {}
    for i in range(ell + 2):
        cur = coef[i]
        for d in range(ell + 1, -1, -1):
            beta = cur.coeff(-d)
            if beta:
                cur = s_scale_sub(cur, beta, jpow[d])
                grid[(i, d)] = beta
        assert cur.is_zero(), f"nonzero residual in X^{i} coefficient of Phi_{ell}"

    _validate(ell, grid)
    if progress:
        print(f"  ell={ell}: done in {time.time()-t0:.1f}s, {len(grid)} monomials", flush=True)
    return grid


PHI2 = {
    (3, 0): 1, (2, 2): -1, (2, 1): 1488, (2, 0): -162000,
    (1, 1): 40773375, (1, 0): 8748000000, (0, 0): -157464000000000,
}
PHI3 = {
    (4, 0): 1, (3, 3): -1, (3, 2): 2232, (3, 1): -1069956, (3, 0): 36864000,
    (2, 2): 2587918086, (2, 1): 8900222976000, (2, 0): 452984832000000,
    (1, 1): -770845966336000000, (1, 0): 1855425871872000000000,
}


def _validate(ell, grid):
    assert grid[(ell + 1, 0)] == 1, "Phi must be monic in X"
    assert max(i for i, _ in grid) == ell + 1
    for (i, d), c in grid.items():
        assert grid.get((d, i)) == c, f"asymmetric grid at {(i, d)}"
    # Kronecker congruence: Phi_ell == (X^ell - Y)(X - Y^ell) mod ell.
    kron = {(ell + 1, 0): 1, (ell, ell): -1 % ell, (1, 1): -1 % ell, (0, ell + 1): 1}
    seen = {}
    for (i, d), c in grid.items():
        if c % ell:
            seen[(i, d)] = c % ell
    assert seen == {k: v for k, v in kron.items() if v}, f"Kronecker congruence fails at ell={ell}"
    if ell == 2:
        assert {k: v for k, v in grid.items() if k[0] >= k[1]} == PHI2
    if ell == 3:
        folded = {k: v for k, v in grid.items() if k[0] >= k[1]}
        assert folded == PHI3, "Phi_3 does not match the published table"


def write_phi(grid, ell, path):
    lines = [f"# classical modular polynomial, level {ell}",
             "# line format: i j c  (i >= j, symmetric completion implied)"]
    for (i, d) in sorted((k for k in grid if k[0] >= k[1]), reverse=True):
        lines.append(f"{i} {d} {grid[(i, d)]}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", default="2,3,5,7,11,13",
                    help="comma-separated prime levels")
    ap.add_argument("--out", default="src/isospec/data/phi", help="output directory")
    args = ap.parse_args()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for ell in [int(v) for v in args.levels.split(",")]:
        t0 = time.time()
        grid = compute_phi(ell, progress=True)
        write_phi(grid, ell, outdir / f"phi_ell_{ell}.txt")
        print(f"phi_ell_{ell}.txt written ({time.time()-t0:.1f}s)", flush=True)


if __name__ == "__main__":
    main()
