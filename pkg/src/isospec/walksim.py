"""Classical simulation of the QPE measurement cascade and its cost model.

Two fidelities of the phase-estimation round are provided:

  * ideal   — infinite-precision QPE: the eigenvalues of H_k = A'_ell/sqrt(ell)
              are grouped into buckets of width eps = c/(2 sqrt r); measuring
              returns a bucket with probability equal to the eigenmass inside
              it and projects the state onto that bucket.
  * kernel  — m-bit QPE: outcomes y in {0..2^m-1} follow the exact finite-m
              amplitude kernel on eigenphases t/(2 pi) mod 1, and the
              post-measurement state keeps the complex kernel amplitudes
              (later rounds only see their moduli, the final vertex
              measurement sees the phases).

Because every measurement is diagonal in the joint eigenbasis, a full shot
is simulated in eigencoordinates: beta_i = <phi_i|psi>.  Ideal-mode outcome
sequences are determined by the bucket-tuple partition of eigenindices,
which also gives the exact (shot-free) marginal distribution used by the
sampler-vs-oracle equivalence checks.

The cost model evaluates the query-count formula for one QPE call with all
implied constants set to one; it is a scaling model, not a gate count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import sympy

from .arith import field, find_seed_j, twist_codes
from .errors import (DomainError, EmptyWindow, NotNormalized, SingleEigenvector,
                     UnknownVertex)
from .graphs import build_family, symmetrize
from .spectra import joint_diagonalize, separation_report, tag_window

NORM_TOL = 1e-12
TWO_PI = 2.0 * math.pi


@dataclass(eq=False)
class VertexState:
    """Unit-norm complex amplitudes over the graph's vertex order."""

    amplitudes: np.ndarray
    vertices: tuple

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        nrm = np.linalg.norm(self.amplitudes)
        if abs(nrm - 1.0) > NORM_TOL:
            raise NotNormalized(f"state norm {nrm} differs from 1 beyond {NORM_TOL}")


def initial_state(graph, e0):
    """Basis state |E0>; e0 is a vertex index or an Fp2Elem j-invariant."""
    if isinstance(e0, (int, np.integer)):
        idx = int(e0)
        if not 0 <= idx < graph.n:
            raise UnknownVertex(f"vertex index {idx} out of range")
    else:
        try:
            idx = graph.vertex_index(e0)
        except KeyError:
            raise UnknownVertex(f"{e0} is not a vertex of the p={graph.p} graph")
    amps = np.zeros(graph.n, dtype=np.complex128)
    amps[idx] = 1.0
    return VertexState(amps, graph.vertices)


@dataclass(frozen=True)
class QPEConfig:
    """Round parameters: mode, kernel bit count, and the per-round precision
    eps = c / (2 sqrt r) derived from the separation constant c."""

    mode: str = "ideal"          # "ideal" | "kernel"
    bits: int = 0                # kernel mode only
    c: float = 0.25              # max(0.25, certified separation)
    r: int = 1                   # number of cascade rounds

    def __post_init__(self):
        if self.mode not in ("ideal", "kernel"):
            raise DomainError(f"unknown QPE mode {self.mode!r}")
        if self.mode == "kernel":
            if self.bits < 1:
                raise DomainError("kernel mode needs bits >= 1")
            need = math.ceil(math.log2(4.0 / self.eps))
            if self.bits < need:
                raise DomainError(
                    f"kernel mode needs m >= ceil(log2(4/eps)) = {need}, got {self.bits}")

    @property
    def eps(self):
        return self.c / (2.0 * math.sqrt(self.r))


def config_for(basis, mode="ideal", bits=None):
    """Config per the sampling algorithm: c = max(0.25, certified separation),
    where the certified value is the measured min tag distance of the basis
    (all pairs, Perron included, since the cascade must split it too)."""
    c = 0.25
    try:
        rep = separation_report(basis)
        c = max(c, rep.min_separation_with_perron)
    except SingleEigenvector:
        pass
    r = len(basis.primes)
    if mode == "kernel":
        eps = c / (2.0 * math.sqrt(r))
        need = math.ceil(math.log2(4.0 / eps))
        bits = need if bits is None else bits
        return QPEConfig("kernel", bits, c, r)
    return QPEConfig("ideal", 0, c, r)


# -- single QPE round ---------------------------------------------------------


def _buckets(tags, eps):
    return np.floor(tags / eps).astype(np.int64)


def _kernel_amplitudes(tags, bits):
    """Exact m-bit QPE amplitude matrix A[i, y] for eigenphases tags/(2 pi)."""
    m2 = 1 << bits
    frac = (tags / TWO_PI) % 1.0
    delta = frac[:, None] - np.arange(m2)[None, :] / m2
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = np.sin(m2 * np.pi * delta) / (m2 * np.sin(np.pi * delta))
    mag = np.where(np.abs(np.sin(np.pi * delta)) < 1e-15,
                   np.where(np.abs(np.cos(np.pi * delta)) > 0.5, 1.0, mag), mag)
    phase = np.exp(1j * np.pi * (m2 - 1) * delta)
    return phase * mag


def wrapped_tag_collisions(tags, bits):
    """Pairs on different 2 pi branches whose m-bit eigenphases alias.

    The Perron tag (ell+1)/sqrt(ell) exceeds pi for ell >= 11, so kernel
    mode reduces phases mod 2 pi; a tag pair more than pi apart on the real
    line that lands in the same phase grid cell is a wrap-induced collision
    the kernel cannot resolve at this m, and is reported.  Pairs that are
    merely close (|t_i - t_j| < pi) are ordinary resolution limits handled
    by the cross-window separation, not wraps.
    """
    m2 = 1 << bits
    tags = np.asarray(tags)
    frac = (tags / TWO_PI) % 1.0
    out = []
    for i in range(len(tags)):
        for j in range(i + 1, len(tags)):
            if abs(tags[i] - tags[j]) <= math.pi:
                continue
            d = abs(frac[i] - frac[j])
            if min(d, 1.0 - d) < 1.0 / m2:
                out.append((i, j))
    return out


def qpe_round(state, basis, k, config, rng):
    """One phase-estimation round for H_k = A'_{ell_k}/sqrt(ell_k).

    Returns (outcome, post-measurement VertexState).  The outcome is the
    bucket midpoint (ideal mode) or 2 pi y / 2^m (kernel mode).
    """
    beta = basis.V.T @ state.amplitudes
    if abs(np.linalg.norm(beta) - 1.0) > NORM_TOL * 10:
        raise NotNormalized("state lost normalization")
    outcome, beta = _round_on_beta(beta, basis.tags[:, k], config, rng)
    return outcome, VertexState(basis.V @ beta, state.vertices)


def _round_on_beta(beta, tags, config, rng):
    weights = np.abs(beta) ** 2
    if config.mode == "ideal":
        eps = config.eps
        buckets = _buckets(tags, eps)
        labels, inverse = np.unique(buckets, return_inverse=True)
        probs = np.bincount(inverse, weights=weights)
        probs = probs / probs.sum()
        pick = rng.choice(len(labels), p=probs)
        mask = inverse == pick
        beta = np.where(mask, beta, 0.0)
        beta = beta / np.linalg.norm(beta)
        return (float(labels[pick]) + 0.5) * eps, beta
    amp = _kernel_amplitudes(tags, config.bits)
    probs = weights @ (np.abs(amp) ** 2)
    probs = probs / probs.sum()
    y = rng.choice(len(probs), p=probs)
    beta = beta * amp[:, y]
    beta = beta / np.linalg.norm(beta)
    return TWO_PI * y / (1 << config.bits), beta


# -- exact distributions -------------------------------------------------------


def oracle_distribution(basis, e0):
    """Exact output law Pr[E = E'] = sum_i |alpha_i|^2 |phi_i(E')|^2."""
    idx = _vertex_idx(basis, e0)
    W = basis.V ** 2
    return W @ W[idx]


def _vertex_idx(basis, e0):
    if isinstance(e0, (int, np.integer)):
        return int(e0)
    raise UnknownVertex("pass a vertex index aligned with the basis")


def cascade_groups(basis, config):
    """Partition of eigenindices by ideal-mode outcome tuple."""
    keys = np.stack([_buckets(basis.tags[:, k], config.eps)
                     for k in range(len(basis.primes))], axis=1)
    order = np.lexsort(keys.T[::-1])
    groups = []
    start = 0
    for i in range(1, len(order) + 1):
        if i == len(order) or np.any(keys[order[i]] != keys[order[start]]):
            groups.append(np.array(order[start:i]))
            start = i
    return groups, keys


def cascade_exact_distribution(basis, e0, config):
    """Marginal vertex distribution of the ideal cascade, no sampling.

    Cross terms survive exactly within each outcome group, so this equals
    the oracle iff every group is a singleton (that is the separation
    guarantee being tested).
    """
    idx = _vertex_idx(basis, e0)
    alpha = basis.V[idx, :]
    groups, _ = cascade_groups(basis, config)
    dist = np.zeros(basis.n)
    for g in groups:
        dist += (basis.V[:, g] @ alpha[g]) ** 2
    return dist


def kernel_exact_distribution(basis, e0, config):
    """Marginal vertex distribution of the kernel-mode cascade.

    Averaging over all outcome sequences reduces to an elementwise product
    of per-round Gram matrices G[i,i'] = sum_y A[i,y] conj(A[i',y]).
    """
    if config.mode != "kernel":
        raise DomainError("kernel_exact_distribution needs a kernel config")
    idx = _vertex_idx(basis, e0)
    alpha = basis.V[idx, :].astype(np.complex128)
    F = np.ones((basis.n, basis.n), dtype=np.complex128)
    for k in range(len(basis.primes)):
        amp = _kernel_amplitudes(basis.tags[:, k], config.bits)
        F *= amp @ amp.conj().T
    M = np.outer(alpha, alpha.conj()) * F
    dist = np.einsum("ei,ij,ej->e", basis.V, M, basis.V).real
    return dist


def total_variation(d1, d2):
    return 0.5 * float(np.abs(np.asarray(d1) - np.asarray(d2)).sum())


# -- the sampler ----------------------------------------------------------------


@dataclass(frozen=True)
class SampleTrace:
    """One shot: measured eigenvalue estimates, the output curve code, and
    the shot counter that (with the run's master seed) keys its RNG stream."""

    lambdas: tuple
    j: str
    b: int
    shot: int


@dataclass(eq=False)
class SamplerResult:
    p: int
    window: tuple
    mode: str
    bits: int
    seed: int
    shots: int
    vertices: tuple
    counts: np.ndarray
    traces: list
    wrapped_collisions: list = dc_field(default_factory=list)

    def empirical(self):
        return self.counts / self.counts.sum()

    def to_json_dict(self):
        return {
            "p": self.p,
            "window": list(self.window),
            "mode": self.mode,
            "bits": self.bits,
            "seed": self.seed,
            "shots": self.shots,
            "wrapped_collisions": self.wrapped_collisions,
            "traces": [{"lambdas": list(t.lambdas), "j": t.j, "b": t.b}
                       for t in self.traces],
            "empirical": {str(v): int(c)
                          for v, c in zip(self.vertices, self.counts) if c},
        }


def _shot_rng(seed, shot):
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, shot], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw(rng, cdf):
    """Inverse-CDF categorical draw; one uniform per draw."""
    return min(int(np.searchsorted(cdf, rng.random(), side="right")),
               len(cdf) - 1)


def prepare(p, window=None, seed=0, e0=None, phi_dir=None):
    """Graphs, joint basis, and start vertex for the sampler at prime p."""
    if window is None:
        window = tag_window(p)
    window = [ell for ell in window if ell != p]
    if not window:
        raise EmptyWindow(f"window for p={p} is empty")
    fam = build_family(p, tuple(window), phi_dir)
    ops = [symmetrize(fam[ell]) for ell in window]
    basis = joint_diagonalize(ops, seed=seed)
    graph = fam[window[0]]
    if e0 is None:
        # default start: the seed curve, i.e. the smallest supersingular j
        e0_idx = graph.vertex_index(find_seed_j(field(p)))
    else:
        e0_idx = e0 if isinstance(e0, int) else graph.vertex_index(e0)
    return graph, basis, e0_idx


def run_sampler(p, window=None, shots=1, config=None, seed=0, e0=None,
                phi_dir=None):
    """Run the full cascade `shots` times and collect output curve codes.

    Deterministic given `seed`: shot k draws from a counter-based generator
    keyed (seed, k), so parallel and serial execution agree.  In ideal mode
    the whole outcome sequence is determined by the eigenindex group, which
    lets a shot draw (group, vertex, twist) directly; kernel mode walks the
    rounds honestly.
    """
    if shots < 1:
        raise DomainError("shots must be >= 1")
    graph, basis, e0_idx = prepare(p, window, seed, e0, phi_dir)
    if config is None:
        config = config_for(basis)
    ctx = field(p)
    alpha = basis.V[e0_idx, :]
    r = len(basis.primes)
    counts = np.zeros(basis.n, dtype=np.int64)
    traces = []
    collisions = []
    if config.mode == "ideal":
        groups, keys = cascade_groups(basis, config)
        gprobs = np.array([float(np.sum(alpha[g] ** 2)) for g in groups])
        gcdf = np.cumsum(gprobs / gprobs.sum())
        gdists = []
        glambdas = []
        for g in groups:
            vec = basis.V[:, g] @ alpha[g]
            nrm2 = float(vec @ vec)
            d = (vec ** 2) / nrm2 if nrm2 > 0 else np.full(basis.n, 1.0 / basis.n)
            gdists.append(np.cumsum(d / d.sum()))
            glambdas.append(tuple((keys[g[0], k] + 0.5) * config.eps
                                  for k in range(r)))
        for shot in range(shots):
            rng = _shot_rng(seed, shot)
            gi = _draw(rng, gcdf)
            v = _draw(rng, gdists[gi])
            codes = twist_codes(graph.vertices[v], ctx)
            b = int(codes[rng.integers(len(codes))])
            counts[v] += 1
            traces.append(SampleTrace(glambdas[gi], str(graph.vertices[v]), b,
                                      shot))
    else:
        amps = [_kernel_amplitudes(basis.tags[:, k], config.bits)
                for k in range(r)]
        probs_tbl = [np.abs(a) ** 2 for a in amps]
        for k in range(r):
            for pair in wrapped_tag_collisions(basis.tags[:, k], config.bits):
                collisions.append((int(basis.primes[k]), pair))
        for shot in range(shots):
            rng = _shot_rng(seed, shot)
            beta = alpha.astype(np.complex128)
            lambdas = []
            for k in range(r):
                w = np.abs(beta) ** 2
                py = w @ probs_tbl[k]
                y = _draw(rng, np.cumsum(py / py.sum()))
                beta = beta * amps[k][:, y]
                beta = beta / np.linalg.norm(beta)
                lambdas.append(TWO_PI * y / (1 << config.bits))
            vdist = np.abs(basis.V @ beta) ** 2
            v = _draw(rng, np.cumsum(vdist / vdist.sum()))
            codes = twist_codes(graph.vertices[v], ctx)
            b = int(codes[rng.integers(len(codes))])
            counts[v] += 1
            traces.append(SampleTrace(tuple(lambdas), str(graph.vertices[v]),
                                      b, shot))
    return SamplerResult(p, tuple(basis.primes), config.mode, config.bits,
                         seed, shots, graph.vertices, counts, traces, collisions)


# -- near-uniformity deviation identity -------------------------------------------


@dataclass(frozen=True)
class DeviationReport:
    p: int
    n: int
    identity_max_err: float     # |Pr - 1/n - (r_E0-u).(r_E'-u)| over pairs
    cauchy_schwarz_ok: bool
    max_prob: float             # max over (E0, E') of Pr[E = E']
    min_prob: float
    alpha: float                # n * max_prob
    alpha_over_log2p: float


def deviation_check(basis, e0=None):
    """Verify Pr = 1/n + (r_E0 - u).(r_E' - u) and its Cauchy-Schwarz bound.

    With e0=None every start vertex is checked at once (the acceptance
    battery); with a vertex index only that row is examined.
    """
    W = basis.V ** 2
    n = basis.n
    if e0 is None:
        Q = W @ W.T
        Cen = W - 1.0 / n
        C = Cen @ Cen.T
        norms = np.linalg.norm(Cen, axis=1)
        bound = np.outer(norms, norms)
    else:
        idx = _vertex_idx(basis, e0)
        Q = (W @ W[idx])[None, :]
        Cen = W - 1.0 / n
        C = (Cen @ Cen[idx])[None, :]
        bound = (np.linalg.norm(Cen, axis=1) * np.linalg.norm(Cen[idx]))[None, :]
    ident = float(np.max(np.abs(Q - 1.0 / n - C)))
    cs_ok = bool(np.all(np.abs(Q - 1.0 / n) <= bound + 1e-10))
    max_pr = float(np.max(Q))
    min_pr = float(np.min(Q))
    alpha = n * max_pr
    return DeviationReport(basis.p, n, ident, cs_ok, max_pr, min_pr, alpha,
                           alpha / math.log(basis.p) ** 2)


# -- cost model -------------------------------------------------------------------


@dataclass(frozen=True)
class CostEstimate:
    """Query-count model for one QPE call; constants normalized to 1."""

    ell: int
    eps: float
    eta: float
    kappa: float
    leading: float      # log(1/eta) * kappa^{3/2} eps^{-3/2}
    secondary: float    # log(1/eta) * kappa^{1/2} eps^{-1/2} (log(1/eta)+loglog(1/eps))
    total: float


def qpe_cost(ell, eps, eta):
    """Evaluate the one-call cost formula with implied constants = 1."""
    if not sympy.isprime(int(ell)):
        raise DomainError(f"ell = {ell} must be prime")
    if not 0.0 < eps < 1.0 or not 0.0 < eta < 1.0:
        raise DomainError("eps and eta must lie in (0, 1)")
    kappa = (ell + 1) / math.sqrt(ell)
    log_eta = math.log(1.0 / eta)
    loglog_eps = math.log(math.log(1.0 / eps))
    t1 = kappa ** 1.5 * (1.0 / eps) ** 1.5
    t2 = kappa ** 0.5 * (1.0 / eps) ** 0.5 * (log_eta + loglog_eps)
    return CostEstimate(int(ell), eps, eta, kappa,
                        log_eta * t1, log_eta * t2, log_eta * (t1 + t2))


@dataclass(frozen=True)
class PipelineCost:
    p: int
    regime: str
    window_lo: float
    window_hi: float
    r: int
    c: float
    eps: float
    eta: float
    total: float
    leading: float
    total_over_log4p: float


def pipeline_cost(p, regime="heuristic"):
    """Total cascade cost: sum of per-prime QPE calls at eps = c/(2 sqrt r).

    heuristic: window (ln p, 4 ln p], c = 0.25 (the empirical separation
    floor); grh: window [ln^4 p, 2 ln^4 p], c = 1 (the proven bound).
    """
    if p <= 7:
        raise EmptyWindow(f"p = {p} too small for a prime window")
    if regime == "heuristic":
        lo, hi = math.log(p), 4.0 * math.log(p)
        ells = tag_window(p)
        c = 0.25
    elif regime == "grh":
        lo = math.log(p) ** 4
        hi = 2.0 * lo
        ells = [int(ell) for ell in sympy.primerange(math.ceil(lo), math.floor(hi) + 1)
                if ell != p]
        c = 1.0
    else:
        raise DomainError(f"unknown regime {regime!r}")
    if not ells:
        raise EmptyWindow(f"no primes in [{lo:.2f}, {hi:.2f}]")
    r = len(ells)
    eps = c / (2.0 * math.sqrt(r))
    eta = 1.0 / p
    costs = [qpe_cost(ell, eps, eta) for ell in ells]
    total = sum(ce.total for ce in costs)
    leading = sum(ce.leading for ce in costs)
    return PipelineCost(p, regime, lo, hi, r, c, eps, eta, total, leading,
                        total / math.log(p) ** 4)
