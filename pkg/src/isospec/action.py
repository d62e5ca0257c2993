"""Regular abelian group actions, their Fourier basis, and uniform sampling.

The class-group action is modeled abstractly: X is a torsor of
G = Z_{N1} x ... x Z_{Nk}, realized as a seeded random relabeling of G, so
the index-recovery and sampling circuits can be executed as dense
statevectors without any isogeny arithmetic.

Group elements are flat indices into the mixed-radix factor decomposition.
Character phases and quadratic-refinement phases are carried as exact
rationals (multiples of 1/lcm) wherever a law is being *verified*, and only
converted to complex numbers to run circuits; the refinement law check is
therefore exact, not float-tolerant.

Conventions: chi(a, x) = prod_j omega_{N_j}^{a_j x_j}; the QFT matrix
F = chi / sqrt(|G|) is symmetric, and the index-recovery circuit is
F . (controlled action) . F, whose net effect on |G^(h) * x>|0> is to write
h (not -h) into the second register.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .errors import DomainError, NotNormalized, SpecMismatch

NORM_TOL = 1e-12
STATEVECTOR_AMP_CAP = 1 << 20  # dense |X| x |G| simulation cap


@dataclass(frozen=True)
class AbelianGroupSpec:
    """Cyclic factor sizes (N_1, ..., N_k); elements are flat indices."""

    factors: tuple

    def __post_init__(self):
        if not self.factors or any(n < 1 for n in self.factors):
            raise DomainError("factors must be positive integers")

    @property
    def order(self):
        out = 1
        for n in self.factors:
            out *= n
        return out

    def tuples(self):
        """(|G|, k) array of factor coordinates, index-aligned."""
        idx = np.arange(self.order)
        return np.stack(np.unravel_index(idx, self.factors), axis=1)

    def add_table(self):
        """add[g, h] = index of g + h."""
        t = self.tuples()
        coords = (t[:, None, :] + t[None, :, :]) % np.array(self.factors)
        return np.ravel_multi_index(
            tuple(coords[:, :, j] for j in range(len(self.factors))),
            self.factors)

    def neg(self):
        """neg[g] = index of -g."""
        t = (-self.tuples()) % np.array(self.factors)
        return np.ravel_multi_index(
            tuple(t[:, j] for j in range(len(self.factors))), self.factors)


def chi_frac(spec, a, x):
    """Exact phase of chi(a, x) as a rational in [0, 1)."""
    at = np.unravel_index(a, spec.factors)
    xt = np.unravel_index(x, spec.factors)
    acc = Fraction(0)
    for aj, xj, nj in zip(at, xt, spec.factors):
        acc += Fraction(int(aj) * int(xj), nj)
    return acc % 1


def chi(spec_a, a, x, spec_x=None):
    """chi(a, x) as a unit complex number; bicharacter of the spec."""
    if spec_x is not None and spec_x != spec_a:
        raise SpecMismatch("elements come from different group specs")
    return complex(np.exp(2j * np.pi * float(chi_frac(spec_a, a, x))))


def chi_matrix(spec):
    """Full |G| x |G| matrix chi[a, g]; symmetric."""
    t = spec.tuples().astype(np.float64)
    phase = np.zeros((spec.order, spec.order))
    for j, nj in enumerate(spec.factors):
        phase += np.outer(t[:, j], t[:, j]) / nj
    return np.exp(2j * np.pi * phase)


@dataclass(eq=False)
class RegularActionTable:
    """A regular (free + transitive) action of G on X with |X| = |G|.

    table[g, x] is the index of g * x in the X labeling; basepoint is the
    image of 0 under the relabeling.
    """

    spec: AbelianGroupSpec
    table: np.ndarray
    basepoint: int

    @classmethod
    def random_torsor(cls, spec, seed=0):
        """X = G relabeled by a seeded random bijection."""
        rng = np.random.default_rng(seed)
        sigma = rng.permutation(spec.order)
        add = spec.add_table()
        table = np.empty((spec.order, spec.order), dtype=np.int64)
        for g in range(spec.order):
            table[g, sigma] = sigma[add[g]]
        return cls(spec, table, int(sigma[0]))

    def validate(self, exhaustive=None, rng=None):
        """Action axioms + regularity; exhaustive for |G| <= 64."""
        n = self.spec.order
        if exhaustive is None:
            exhaustive = n <= 64
        if not np.array_equal(self.table[0], np.arange(n)):
            raise SpecMismatch("identity element does not act trivially")
        add = self.spec.add_table()
        if exhaustive:
            for g in range(n):
                if not np.array_equal(self.table[g][self.table],
                                      self.table[add[g]]):
                    raise SpecMismatch(f"compatibility fails at g={g}")
        else:
            rng = rng or np.random.default_rng(0)
            for _ in range(200):
                g, h = rng.integers(n, size=2)
                if not np.array_equal(self.table[g][self.table[h]],
                                      self.table[add[g, h]]):
                    raise SpecMismatch("compatibility fails")
        # regularity: for each (x, y) exactly one g with g*x = y, i.e. every
        # row and every column of the table is a permutation, and only the
        # identity fixes a point
        idx = np.arange(n)
        for g in range(n):
            if len(set(self.table[g].tolist())) != n:
                raise SpecMismatch(f"action by g={g} is not a bijection")
            if g and np.any(self.table[g] == idx):
                raise SpecMismatch(f"freeness fails at g={g}")
        for x in range(n):
            if len(set(self.table[:, x].tolist())) != n:
                raise SpecMismatch(f"orbit map of x={x} is not a bijection")
        return True


@dataclass(eq=False)
class ActionState:
    """Dense amplitudes over X (1D) or X x G (2D)."""

    amplitudes: np.ndarray
    action: RegularActionTable

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        nrm = np.linalg.norm(self.amplitudes)
        if abs(nrm - 1.0) > NORM_TOL:
            raise NotNormalized(f"state norm {nrm} differs from 1")


def fourier_state(action, h, x=None):
    """|G^(h) * x> = |G|^{-1/2} sum_g chi(g, h) |g * x>."""
    spec = action.spec
    n = spec.order
    if x is None:
        x = action.basepoint
    amps = np.zeros(n, dtype=np.complex128)
    phases = np.array([float(chi_frac(spec, g, h)) for g in range(n)])
    amps[action.table[:, x]] = np.exp(2j * np.pi * phases) / np.sqrt(n)
    return ActionState(amps, action)


def apply_action(action, k, state):
    """U_k |y> = |k * y> on a 1D X-register state."""
    out = np.empty_like(state.amplitudes)
    out[action.table[k]] = state.amplitudes
    return ActionState(out, state.action)


def _checked_2d(action, state):
    amps = state.amplitudes
    n = action.spec.order
    if amps.ndim != 2 or amps.shape != (n, n):
        raise SpecMismatch(f"need an X x G register of shape ({n}, {n})")
    if amps.size > STATEVECTOR_AMP_CAP:
        raise DomainError("statevector exceeds the dense amplitude cap")
    return amps


def comp_index(action, state):
    """Index recovery: |G^(h) * x>|0>  ->  |G^(h) * x>|h>, extended linearly.

    Implemented as F on register 2, the controlled action
    sum_k U_k (x) |k><k|, then F again; the second F (rather than F^{-1})
    absorbs the chi(-k, h) kickback so the register reads h.
    """
    amps = _checked_2d(action, state)
    F = chi_matrix(action.spec) / np.sqrt(action.spec.order)
    out = amps @ F
    ctl = np.empty_like(out)
    for k in range(action.spec.order):
        ctl[action.table[k], k] = out[:, k]
    return ActionState(ctl @ F, action)


def comp_index_inverse(action, state):
    """Adjoint of comp_index."""
    amps = _checked_2d(action, state)
    Fh = chi_matrix(action.spec).conj() / np.sqrt(action.spec.order)
    out = amps @ Fh
    ctl = np.empty_like(out)
    for k in range(action.spec.order):
        ctl[:, k] = out[action.table[k], k]
    return ActionState(ctl @ Fh, action)


# -- quadratic refinements ------------------------------------------------------


@dataclass(frozen=True)
class QuadraticRefinement:
    """kappa: G -> T with kappa(g+h) = kappa(g) kappa(h) chi(g, h).

    Stored as per-factor exponent rules: kappa_j(h) = exp(pi i h^2 / N_j)
    for even N_j and exp(2 pi i t_j h^2 / N_j), 2 t_j = 1 (mod N_j), for odd.
    """

    spec: AbelianGroupSpec
    t: tuple  # per-factor multiplier; None marks an even factor

    def phase_frac(self, g):
        gt = np.unravel_index(g, self.spec.factors)
        acc = Fraction(0)
        for gj, nj, tj in zip(gt, self.spec.factors, self.t):
            if tj is None:
                acc += Fraction(int(gj) ** 2, 2 * nj)
            else:
                acc += Fraction(tj * int(gj) ** 2, nj)
        return acc % 1

    def value(self, g):
        return complex(np.exp(2j * np.pi * float(self.phase_frac(g))))

    def values(self):
        return np.array([self.value(g) for g in range(self.spec.order)])

    def verify(self, rng=None):
        """Check the refinement law; exhaustive for |G| <= 64, else 10^4
        random pairs.  Exact rational arithmetic, no tolerance."""
        n = self.spec.order
        add = self.spec.add_table()
        if n <= 64:
            pairs = [(g, h) for g in range(n) for h in range(n)]
        else:
            rng = rng or np.random.default_rng(0)
            pairs = [tuple(rng.integers(n, size=2)) for _ in range(10_000)]
        for g, h in pairs:
            lhs = self.phase_frac(add[g, h])
            rhs = (self.phase_frac(g) + self.phase_frac(h)
                   + chi_frac(self.spec, g, h)) % 1
            if lhs != rhs:
                raise DomainError(f"refinement law fails at (g, h) = ({g}, {h})")
        return True


def make_kappa(spec):
    """The standard quadratic refinement of chi, verified before return."""
    t = tuple(None if nj % 2 == 0 else (nj + 1) // 2 for nj in spec.factors)
    kappa = QuadraticRefinement(spec, t)
    kappa.verify()
    return kappa


def kappa_hat(kappa):
    """Fourier transform by direct summation."""
    spec = kappa.spec
    return chi_matrix(spec) @ kappa.values() / np.sqrt(spec.order)


@dataclass(frozen=True)
class FlatnessReport:
    order: int
    max_closed_form_err: float  # direct sum vs the lemma's closed form
    flatness_spread: float      # max_g |kappa_hat| - min_g |kappa_hat|
    parseval_err: float         # |sum |kappa_hat|^2 - |G||


def kappa_hat_flatness(kappa):
    spec = kappa.spec
    direct = kappa_hat(kappa)
    vals = kappa.values()
    total = vals.sum()
    closed = np.conj(vals) * total / np.sqrt(spec.order)
    mags = np.abs(direct)
    return FlatnessReport(
        spec.order,
        float(np.max(np.abs(direct - closed))),
        float(mags.max() - mags.min()),
        float(abs((mags ** 2).sum() - spec.order)),
    )


# -- the oriented sampling circuit ------------------------------------------------


@dataclass(eq=False)
class OrientedSamplingResult:
    spec_factors: tuple
    analytic: np.ndarray        # |kappa_hat(g)|^2 / |G| pushed to X labels
    statevector: np.ndarray     # full circuit marginal over X
    tv_uniform: float
    counts: np.ndarray = dc_field(default=None)

    def to_json_dict(self):
        out = {
            "factors": list(self.spec_factors),
            "order": int(len(self.analytic)),
            "analytic": [float(v) for v in self.analytic],
            "tv_to_uniform": self.tv_uniform,
            "max_statevector_dev": float(np.max(np.abs(self.statevector
                                                       - self.analytic))),
        }
        if self.counts is not None:
            out["counts"] = [int(c) for c in self.counts]
        return out


def oriented_sampling(action, x=None, kappa=None, shots=None, seed=0):
    """Execute the uniform-sampling circuit on the torsor.

    Both the analytic output law |kappa_hat(g)|^2/|G| and the full
    statevector execution (prepare |x>|0>, comp_index, phase by kappa,
    comp_index^{-1}, measure register 1) are returned; with a quadratic
    refinement they agree and are uniform.  A caller-supplied kappa is
    verified first.
    """
    spec = action.spec
    n = spec.order
    if x is None:
        x = action.basepoint
    if kappa is None:
        kappa = make_kappa(spec)
    elif isinstance(kappa, QuadraticRefinement):
        if kappa.spec != spec:
            raise SpecMismatch("kappa built for a different group spec")
        kappa.verify()
    vals = kappa.values() if isinstance(kappa, QuadraticRefinement) \
        else np.asarray(kappa, dtype=np.complex128)
    if vals.shape != (n,):
        raise SpecMismatch(f"kappa must assign a phase to each of {n} elements")
    # analytic law
    khat = chi_matrix(spec) @ vals / np.sqrt(n)
    analytic = np.zeros(n)
    analytic[action.table[:, x]] = np.abs(khat) ** 2 / n
    # statevector execution
    amps = np.zeros((n, n), dtype=np.complex128)
    amps[x, 0] = 1.0
    state = ActionState(amps, action)
    state = comp_index(action, state)
    state = ActionState(state.amplitudes * vals[None, :], action)
    state = comp_index_inverse(action, state)
    sv = (np.abs(state.amplitudes) ** 2).sum(axis=1)
    uniform = np.full(n, 1.0 / n)
    tv = 0.5 * float(np.abs(analytic - uniform).sum())
    counts = None
    if shots:
        rng = np.random.default_rng(seed)
        draws = rng.choice(n, size=shots, p=analytic / analytic.sum())
        counts = np.bincount(draws, minlength=n)
    return OrientedSamplingResult(spec.factors, analytic, sv, tv, counts)
