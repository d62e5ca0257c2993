"""Joint diagonalization of commuting Hecke operators and spectral statistics.

The simultaneous eigenbasis is computed by eigendecomposing one random
positive combination M = sum_k c_k A_k (c_k iid uniform on [1, 2]) and
refining near-degenerate clusters of M block-wise with fresh coefficients.
Nothing is trusted: orthonormality and the per-operator eigen-residuals are
checked against explicit tolerances, with up to 5 restarts on failure.

Eigenvalue a of A_ell is reported together with its tag a / sqrt(ell); tags
of non-Perron eigenvectors land in [-2, 2] and the vector of tags over a
prime window identifies the eigenvector (that is the separation property
being measured here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy
from scipy.spatial.distance import pdist

from .errors import (DegenerateJointSpectrum, EmptyWindow, NotCommuting,
                     SingleEigenvector)

EIG_RESIDUAL_TOL = 1e-8     # scaled by (ell + 1) per operator
DEGENERACY_GAP = 1e-6       # cluster gap for the random combination
TAG_COLLISION_TOL = 1e-6    # "identical tag vectors" threshold
ORTHONORMALITY_TOL = 1e-9
COMMUTATOR_TOL = 1e-9
MAX_RESTARTS = 5


@dataclass(eq=False)
class JointEigenbasis:
    """Simultaneous orthonormal eigenvectors (columns of V) with raw
    eigenvalues and normalized tags per operator."""

    p: int
    primes: tuple
    V: np.ndarray            # (n, n), column i = phi_i
    eigenvalues: np.ndarray  # (n, r), a_{i,k}
    tags: np.ndarray         # (n, r), a_{i,k} / sqrt(ell_k)
    perron_index: int
    seed: int

    @property
    def n(self):
        return self.V.shape[0]

    def non_perron(self):
        return [i for i in range(self.n) if i != self.perron_index]


def _split_clusters(values, gap):
    """Index groups of consecutive near-equal values (input sorted)."""
    groups = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] >= gap:
            groups.append(list(range(start, i)))
            start = i
    return groups


def _refine_block(V_block, ops, rng, depth):
    """Re-diagonalize a near-degenerate block with a fresh combination."""
    if depth <= 0 or V_block.shape[1] <= 1:
        return V_block
    c = rng.uniform(1.0, 2.0, size=len(ops))
    S = sum(ck * (V_block.T @ A @ V_block) for ck, A in zip(c, ops))
    S = 0.5 * (S + S.T)
    vals, U = np.linalg.eigh(S)
    V_new = V_block @ U
    for idx in _split_clusters(vals, DEGENERACY_GAP):
        if len(idx) > 1:
            V_new[:, idx] = _refine_block(V_new[:, idx], ops, rng, depth - 1)
    return V_new


def joint_diagonalize(ops, seed=0):
    """Common orthonormal eigenbasis of commuting symmetric operators.

    Raises NotCommuting if the family does not commute, and
    DegenerateJointSpectrum if two eigenvectors carry identical full tag
    vectors (within TAG_COLLISION_TOL); such a basis is not canonical and
    is never silently merged.
    """
    if not ops:
        raise ValueError("need at least one operator")
    p = ops[0].p
    if any(op.p != p for op in ops):
        raise NotCommuting("operators live over different primes")
    mats = [op.A for op in ops]
    n = mats[0].shape[0]
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            if np.max(np.abs(comm)) > COMMUTATOR_TOL:
                raise NotCommuting(
                    f"A_{ops[i].ell} and A_{ops[j].ell} do not commute "
                    f"(max |[A,B]| = {np.max(np.abs(comm)):.3e})")
    ells = np.array([op.ell for op in ops], dtype=np.float64)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(p,)))
    last_err = None
    for _ in range(MAX_RESTARTS):
        c = rng.uniform(1.0, 2.0, size=len(mats))
        M = sum(ck * A for ck, A in zip(c, mats))
        M = 0.5 * (M + M.T)
        vals, V = np.linalg.eigh(M)
        for idx in _split_clusters(vals, DEGENERACY_GAP):
            if len(idx) > 1:
                V[:, idx] = _refine_block(V[:, idx], mats, rng, depth=4)
        ok, err, eigvals = _validate_basis(V, mats, ells)
        if ok:
            break
        last_err = err
    else:
        raise DegenerateJointSpectrum(
            f"no valid joint eigenbasis after {MAX_RESTARTS} restarts: {last_err}")
    tags = eigvals / np.sqrt(ells)[None, :]
    order = np.lexsort(tuple(tags[:, k] for k in range(tags.shape[1] - 1, -1, -1)))
    V, eigvals, tags = V[:, order], eigvals[order], tags[order]
    # canonical signs: the largest-magnitude entry of each column is positive
    anchor = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[anchor, np.arange(n)])
    signs[signs == 0] = 1.0
    V = V * signs[None, :]
    perron = _find_perron(eigvals, ops)
    _check_tag_collisions(tags)
    return JointEigenbasis(p, tuple(op.ell for op in ops), V, eigvals, tags,
                           perron, seed)


def _validate_basis(V, mats, ells):
    n = V.shape[0]
    gram = V.T @ V - np.eye(n)
    if np.max(np.abs(gram)) > ORTHONORMALITY_TOL:
        return False, f"orthonormality {np.max(np.abs(gram)):.2e}", None
    eigvals = np.empty((n, len(mats)))
    for k, A in enumerate(mats):
        AV = A @ V
        eigvals[:, k] = np.einsum("ij,ij->j", V, AV)
        resid = AV - V * eigvals[:, k][None, :]
        worst = np.max(np.linalg.norm(resid, axis=0))
        if worst > EIG_RESIDUAL_TOL * (ells[k] + 1):
            return False, f"residual {worst:.2e} for ell={int(ells[k])}", None
    return True, "", eigvals


def _find_perron(eigvals, ops):
    hits = np.nonzero(np.abs(eigvals[:, 0] - (ops[0].ell + 1)) < 1e-6)[0]
    if len(hits) != 1:
        raise DegenerateJointSpectrum(
            f"expected exactly one Perron eigenvalue, found {len(hits)}")
    return int(hits[0])


def _check_tag_collisions(tags):
    n = tags.shape[0]
    if n < 2:
        return
    # tags are lex-sorted, so colliding vectors are adjacent
    diffs = np.max(np.abs(np.diff(tags, axis=0)), axis=1)
    bad = np.nonzero(diffs < TAG_COLLISION_TOL)[0]
    if len(bad):
        pairs = [(int(i), int(i + 1)) for i in bad]
        raise DegenerateJointSpectrum(
            f"identical full tag vectors (within {TAG_COLLISION_TOL}) "
            f"for eigenvector pairs {pairs}")


def tag_window(p):
    """Primes ell with ln p < ell <= 4 ln p, excluding p itself."""
    if p <= 7:
        raise EmptyWindow(f"tag window is degenerate for p = {p}")
    lo = math.log(p)
    hi = 4.0 * math.log(p)
    ells = [int(ell) for ell in sympy.primerange(2, math.floor(hi) + 1)
            if lo < ell <= hi and ell != p]
    if not ells:
        raise EmptyWindow(f"no primes in (ln {p}, 4 ln {p}]")
    return ells


# -- reports -----------------------------------------------------------------------


@dataclass(frozen=True)
class SupnormReport:
    p: int
    n: int
    primes: tuple
    supnorm: float          # max_i max_x |phi_i(x)|
    ratio: float            # supnorm * sqrt(p) / ln(p)


@dataclass(frozen=True)
class FourthMomentReport:
    p: int
    n: int
    primes: tuple
    statistic: float        # max_{x,y} sum_i (phi_i(x)^2 - phi_i(y)^2)^2
    normalized: float       # statistic * p


@dataclass(frozen=True)
class SeparationReport:
    p: int
    n: int
    primes: tuple
    min_separation: float           # over non-Perron tag pairs
    min_separation_with_perron: float
    undefined: bool = False


def supnorm_report(basis):
    sup = float(np.max(np.abs(basis.V)))
    ratio = sup * math.sqrt(basis.p) / math.log(basis.p)
    return SupnormReport(basis.p, basis.n, basis.primes, sup, ratio)


def fourth_moment_stat(basis):
    W = basis.V ** 2
    if basis.n == 1:
        stat = 0.0
    else:
        stat = float(np.max(pdist(W, metric="sqeuclidean")))
    return FourthMomentReport(basis.p, basis.n, basis.primes, stat,
                              stat * basis.p)


def separation_report(basis):
    """Min pairwise Euclidean distance between tag vectors.

    The Perron tag (sqrt(ell) + 1/sqrt(ell) per coordinate) is an outlier,
    so the headline number excludes it; the all-pairs value is also given.
    """
    if basis.n < 2:
        raise SingleEigenvector(f"p = {basis.p} has a single eigenvector")
    with_perron = float(np.min(pdist(basis.tags)))
    rest = basis.tags[basis.non_perron()]
    if len(rest) < 2:
        # n = 2: no non-Perron pair exists; report the all-pairs value and flag
        return SeparationReport(basis.p, basis.n, basis.primes,
                                with_perron, with_perron, undefined=True)
    min_sep = float(np.min(pdist(rest)))
    return SeparationReport(basis.p, basis.n, basis.primes, min_sep, with_perron)
