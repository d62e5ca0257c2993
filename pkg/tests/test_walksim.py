"""Walk-simulator tests: QPE rounds, sampler, oracle, deviation, costs."""

import math

import numpy as np
import pytest

from conftest import make_basis
from isospec import walksim as ws
from isospec.errors import (DomainError, EmptyWindow, NotNormalized,
                            UnknownVertex)
from isospec.graphs import build_graph, build_graph_fast, symmetrize
from isospec.arith import Fp2Elem, field
from isospec.spectra import tag_window


def test_initial_state():
    g = build_graph(field(13), 2)
    st = ws.initial_state(g, 0)
    assert st.amplitudes.tolist() == [1.0 + 0.0j]
    st = ws.initial_state(g, Fp2Elem(5, 0))
    assert st.amplitudes[0] == 1.0
    with pytest.raises(UnknownVertex):
        ws.initial_state(g, 5)
    with pytest.raises(UnknownVertex):
        ws.initial_state(g, Fp2Elem(7, 0))


def test_initial_state_parseval_and_perron_coefficient():
    p, ells = 101, (2, 3, 5)
    basis = make_basis(p, ells)
    op = symmetrize(build_graph_fast(p, 2))
    for e0 in range(basis.n):
        alpha = basis.V[e0, :]
        assert abs(np.sum(alpha ** 2) - 1.0) <= 1e-12
        # coefficient on the Perron vector is its e0 entry (both positive)
        assert alpha[basis.perron_index] == pytest.approx(
            op.perron_vector()[e0], abs=1e-9)


def test_vertex_state_norm_enforced():
    g = build_graph(field(13), 2)
    with pytest.raises(NotNormalized):
        ws.VertexState(np.array([0.5]), g.vertices)


def test_qpe_round_on_eigenstate_is_fixed_point():
    p, ells = 101, (2, 3, 5)
    basis = make_basis(p, ells)
    g = build_graph_fast(p, 2)
    cfg = ws.config_for(basis)
    rng = np.random.default_rng(0)
    i = 4
    state = ws.VertexState(basis.V[:, i].astype(complex), g.vertices)
    for k in range(3):
        lam, state = ws.qpe_round(state, basis, k, cfg, rng)
        assert abs(lam - basis.tags[i, k]) <= cfg.eps
        overlap = abs(np.vdot(basis.V[:, i], state.amplitudes))
        assert overlap == pytest.approx(1.0, abs=1e-12)


def test_qpe_round_single_vertex():
    basis = make_basis(13, (2,))
    g = build_graph(field(13), 2)
    cfg = ws.config_for(basis)
    st = ws.initial_state(g, 0)
    for mode_cfg in (cfg, ws.QPEConfig("kernel", 8, cfg.c, 1)):
        lam, post = ws.qpe_round(st, basis, 0, mode_cfg, np.random.default_rng(1))
        assert np.allclose(np.abs(post.amplitudes), [1.0])
        target = 3 / math.sqrt(2)
        if mode_cfg.mode == "ideal":
            assert abs(lam - target) <= cfg.eps
        else:
            assert abs(lam - target) <= 2 * math.pi / (1 << 8)


def test_kernel_amplitudes_exact_on_grid():
    # eigenphase exactly on the m-bit grid: probability 1 on that outcome
    bits = 5
    tags = np.array([2 * math.pi * 3 / (1 << bits)])
    amp = ws._kernel_amplitudes(tags, bits)
    probs = np.abs(amp[0]) ** 2
    assert probs[3] == pytest.approx(1.0, abs=1e-12)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_kernel_amplitudes_complete():
    tags = np.linspace(-2, 2, 7)
    amp = ws._kernel_amplitudes(tags, 6)
    assert np.allclose((np.abs(amp) ** 2).sum(axis=1), 1.0, atol=1e-12)


def test_qpe_config_validation():
    with pytest.raises(DomainError):
        ws.QPEConfig("kernel", 0, 0.25, 4)
    with pytest.raises(DomainError):
        ws.QPEConfig("kernel", 3, 0.25, 4)  # below ceil(log2(4/eps))
    with pytest.raises(DomainError):
        ws.QPEConfig("nonsense", 0, 0.25, 4)


def test_run_sampler_single_vertex_graph():
    res = ws.run_sampler(13, shots=100, seed=7)
    assert all(t.j == "5+0*t" for t in res.traces)
    assert res.counts.sum() == 100
    assert all(t.b in (0, 1) for t in res.traces)


def test_run_sampler_determinism():
    a = ws.run_sampler(101, shots=200, seed=11)
    b = ws.run_sampler(101, shots=200, seed=11)
    assert a.to_json_dict() == b.to_json_dict()
    c = ws.run_sampler(101, shots=200, seed=12)
    assert a.to_json_dict() != c.to_json_dict()


def test_run_sampler_kernel_mode_matches_oracle_loosely():
    graph, basis, e0 = ws.prepare(101, seed=0)
    cfg = ws.config_for(basis, mode="kernel", bits=8)
    res = ws.run_sampler(101, shots=4000, config=cfg, seed=5)
    oracle = ws.oracle_distribution(basis, e0)
    assert ws.total_variation(res.empirical(), oracle) <= 0.08
    assert res.wrapped_collisions == []
    assert len(res.traces[0].lambdas) == len(basis.primes)


def test_oracle_distribution():
    basis = make_basis(13, (2,))
    assert ws.oracle_distribution(basis, 0).tolist() == [1.0]
    for p in (101, 389):
        basis = make_basis(p, (2, 3, 5))
        for e0 in (0, basis.n - 1):
            q = ws.oracle_distribution(basis, e0)
            assert abs(q.sum() - 1.0) <= 1e-12
            assert q.min() > 0.0


def test_cascade_exact_equals_oracle():
    for p in (11, 101, 199):
        graph, basis, e0 = ws.prepare(p, seed=0)
        cfg = ws.config_for(basis)
        tv = ws.total_variation(
            ws.cascade_exact_distribution(basis, e0, cfg),
            ws.oracle_distribution(basis, e0))
        assert tv <= 1e-10


def test_cascade_groups_are_singletons_at_101():
    graph, basis, e0 = ws.prepare(101, seed=0)
    groups, _ = ws.cascade_groups(basis, ws.config_for(basis))
    assert all(len(g) == 1 for g in groups)


def test_montecarlo_tv():
    graph, basis, e0 = ws.prepare(101, seed=0)
    oracle = ws.oracle_distribution(basis, e0)
    res = ws.run_sampler(101, shots=20_000, seed=3)
    assert ws.total_variation(res.empirical(), oracle) <= 0.05


def test_kernel_exact_converges_to_oracle():
    graph, basis, e0 = ws.prepare(101, seed=0)
    cfg = ws.config_for(basis)
    oracle = ws.oracle_distribution(basis, e0)
    tvs = []
    for m in (6, 8, 10, 12):
        kd = ws.kernel_exact_distribution(
            basis, e0, ws.QPEConfig("kernel", m, cfg.c, len(basis.primes)))
        assert abs(kd.sum() - 1.0) <= 1e-9
        tvs.append(ws.total_variation(kd, oracle))
    for a, b in zip(tvs, tvs[1:]):
        assert b <= a + 1e-12
    assert tvs[-1] <= 1e-4


def test_wrapped_tag_collision_detection():
    tags = np.array([0.3, 0.3 + 2 * math.pi])
    assert ws.wrapped_tag_collisions(tags, 6) == [(0, 1)]
    clean = np.array([0.3, 1.1])
    assert ws.wrapped_tag_collisions(clean, 6) == []


def test_deviation_check():
    basis = make_basis(13, (2,))
    rep = ws.deviation_check(basis)
    assert rep.max_prob == pytest.approx(1.0, abs=1e-12)
    assert rep.identity_max_err <= 1e-12
    for p in (101, 389):
        basis = make_basis(p, tuple(tag_window(p)))
        rep = ws.deviation_check(basis)
        assert rep.identity_max_err <= 1e-10
        assert rep.cauchy_schwarz_ok
        assert rep.alpha == pytest.approx(rep.n * rep.max_prob, rel=1e-12)
        row = ws.deviation_check(basis, e0=0)
        assert row.identity_max_err <= 1e-10


def test_qpe_cost_examples():
    ce = ws.qpe_cost(2, 0.1, 0.01)
    assert ce.kappa == pytest.approx(3 / math.sqrt(2), rel=1e-15)
    half = ws.qpe_cost(2, 0.05, 0.01)
    assert half.leading / ce.leading == pytest.approx(2 ** 1.5, rel=1e-12)
    sq = ws.qpe_cost(2, 0.1, 0.0001)
    assert sq.leading / ce.leading == pytest.approx(2.0, rel=1e-12)
    assert ce.total == pytest.approx(ce.leading + ce.secondary, rel=1e-15)


def test_qpe_cost_domain_errors():
    for bad in ((4, 0.1, 0.1), (2, 0.0, 0.1), (2, 1.5, 0.1), (2, 0.1, 0.0),
                (2, 0.1, 1.0)):
        with pytest.raises(DomainError):
            ws.qpe_cost(*bad)


def test_qpe_cost_monotone_in_inverse_eps_and_eta():
    g = np.random.default_rng(2)
    for _ in range(200):
        ell = int(g.choice([2, 3, 5, 7, 11]))
        eps = float(g.uniform(0.005, 0.5))
        eta = float(g.uniform(0.001, 0.5))
        base = ws.qpe_cost(ell, eps, eta).total
        assert ws.qpe_cost(ell, eps * 0.9, eta).total >= base
        assert ws.qpe_cost(ell, eps, eta * 0.9).total >= base


def test_pipeline_cost():
    totals = []
    for p in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
        pc = ws.pipeline_cost(p)
        totals.append(pc.total)
        assert pc.eta == 1.0 / p and pc.c == 0.25
    assert totals == sorted(totals)  # monotone over the decade grid
    ratios = [ws.pipeline_cost(p).total_over_log4p
              for p in (1000, 3163, 10_000, 100_000, 316_228, 1_000_000)]
    assert max(ratios) / min(ratios) < 10.0
    hi = ws.pipeline_cost(1009, "grh")
    lo = ws.pipeline_cost(1009, "heuristic")
    assert hi.total > 100 * lo.total
    assert hi.c == 1.0
    grh_totals = [ws.pipeline_cost(p, "grh").total
                  for p in (10 ** 3, 10 ** 4, 10 ** 5)]
    assert grh_totals == sorted(grh_totals)
    with pytest.raises(EmptyWindow):
        ws.pipeline_cost(5)
    with pytest.raises(DomainError):
        ws.pipeline_cost(1009, "bogus")


def test_run_sampler_validation():
    with pytest.raises(DomainError):
        ws.run_sampler(101, shots=0)
    with pytest.raises(EmptyWindow):
        ws.run_sampler(11, window=[11])  # p excluded leaves nothing
