import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bernoulli_lpp.dtasep import (
    DtasepTrace, blip_identity_check, edge_coupling_probe, recursion_residuals,
    sample_corner_growth, sample_zero_penalty, simulate, tau_by_recursion, tau_from_trace,
)
from bernoulli_lpp.env import BernoulliField, coupled_field, gen_bernoulli_env
from bernoulli_lpp.montecarlo import ks_two_sample
from bernoulli_lpp.seeds import SeedSpec, make_rng

from conftest import ones, zeros


def field(values, P, L):
    return BernoulliField(np.asarray(values, np.uint8).reshape(P + L - 1, L), 2 - L, 0.5)


def random_field(P, L, q, seed):
    return field(make_rng(seed).random((P + L - 1) * L) < q, P, L)


def test_all_zero_field_is_static():
    tr = simulate(field(np.zeros(6 * 4), 3, 4), 3, 4)
    assert np.all(tr.positions == np.arange(1, 4))


def test_all_one_field_is_free_flow():
    P, L = 4, 5
    tr = simulate(field(np.ones((P + L - 1) * L), P, L), P, L)
    expect = np.arange(1, P + 1)[None, :] - np.arange(L + 1)[:, None]
    assert np.array_equal(tr.positions, expect)


def test_blocked_particle():
    P, L = 2, 3
    vals = np.zeros((P + L - 1, L), np.uint8)
    k_lo = 2 - L
    vals[1 - k_lo, :] = 0    # particle 1 sits at 1 and never attempts
    vals[2 - k_lo, :] = 1    # particle 2 attempts at every step
    tr = simulate(BernoulliField(vals, k_lo, 0.5), P, L)
    assert np.all(tr.positions[:, 0] == 1) and np.all(tr.positions[:, 1] == 2)


def test_simulate_checks_coverage():
    f = BernoulliField(np.zeros((2, 2), np.uint8), 1, 0.5)
    with pytest.raises(ValueError):
        simulate(f, 2, 2)


@given(st.integers(1, 12), st.integers(1, 12), st.floats(0.05, 0.95), st.integers(0, 2 ** 32))
def test_trace_invariants(P, L, q, seed):
    tr = simulate(random_field(P, L, q, seed), P, L)
    pos = tr.positions
    assert np.array_equal(pos[0], np.arange(1, P + 1))
    assert np.all(np.isin(np.diff(pos, axis=0), (-1, 0)))
    assert np.all(np.diff(pos, axis=1) > 0)


def test_trace_csv():
    tr = DtasepTrace(np.array([[1, 2], [0, 2]]))
    assert tr.to_csv().splitlines() == ["time,particle,position", "0,1,1", "0,2,2", "1,1,0", "1,2,2"]


def test_tau_free_flow_and_static():
    P, L = 3, 4
    tau = tau_from_trace(simulate(field(np.ones((P + L - 1) * L), P, L), P, L))
    assert np.array_equal(tau.values, np.repeat(np.arange(1, L + 1)[:, None], P, axis=1))
    tau0 = tau_from_trace(simulate(field(np.zeros((P + L - 1) * L), P, L), P, L))
    assert np.all(np.isinf(tau0.values))
    assert tau0[0, 2] == 0 and tau0[2, 0] == 0


def test_tau_residuals_nonnegative_on_traces():
    for seed in range(1000):
        rng = make_rng(seed)
        P, L = (int(v) for v in rng.integers(1, 10, size=2))
        tau = tau_from_trace(simulate(random_field(P, L, float(rng.uniform(0.1, 0.9)), seed), P, L))
        res = recursion_residuals(tau)
        assert np.all(res[~np.isnan(res)] >= 0)
        v = tau.values
        with np.errstate(invalid="ignore"):
            assert np.all((np.diff(v, axis=0) >= 0) | np.isinf(v[1:]))


def test_tau_recursion_examples():
    assert np.array_equal(tau_by_recursion(np.zeros((3, 4), int)).values,
                          np.repeat(np.arange(1, 4)[:, None], 4, axis=1))
    assert tau_by_recursion(np.array([[3]])).values[0, 0] == 4
    with pytest.raises(ValueError):
        tau_by_recursion(np.array([[-1]]))


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2 ** 32))
def test_tau_recursion_residuals_equal_input(I, J, seed):
    zt = make_rng(seed).geometric(0.5, size=(I, J)) - 1
    tau = tau_by_recursion(zt)
    assert np.array_equal(recursion_residuals(tau), zt)


def test_tau_recursion_batch_axes():
    zt = make_rng(1).geometric(0.5, size=(7, 3, 5)) - 1
    batch = tau_by_recursion(zt).values
    for b in range(7):
        assert np.array_equal(batch[b], tau_by_recursion(zt[b]).values)


def test_tau_monotone_coupling():
    for seed in range(200):
        rng = make_rng(seed)
        m, n = (int(v) for v in rng.integers(2, 20, size=2))
        env = gen_bernoulli_env(m, n, 0.5, seed)
        f = coupled_field(env, horizon=n, extra_margin=m, seed=seed)
        tau = tau_from_trace(simulate(f, P=2 * m, L=n), I=n + m)
        vals = [tau[N + n - m, N] for N in range(max(1, m - n + 1), m + 1) if N + n - m <= n + m]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_identity_all_ones():
    for m, n in [(5, 5), (7, 3), (3, 7)]:
        res = blip_identity_check(ones(m, n), seed=1)
        assert res.lhs == min(m, n) and res.match


def test_identity_all_zero_square():
    res = blip_identity_check(zeros(6, 6), seed=2)
    assert res.lhs == 0 and res.rhs == 0 and res.match


def test_identity_random():
    rng = make_rng(77)
    for t in range(500):
        m, n = (int(v) for v in rng.integers(1, 31, size=2))
        p = (0.1, 0.5, 0.9)[t % 3]
        env = gen_bernoulli_env(m, n, p, SeedSpec(77, "env", (t,)))
        res = blip_identity_check(env, SeedSpec(77, "field", (t,)))
        assert res.match, res


def test_identity_report_json():
    res = blip_identity_check(ones(2, 2), seed=SeedSpec(5, "x"))
    assert json.loads(res.to_json()) == {"m": 2, "n": 2, "seed": 5, "lhs": 2, "rhs": 2, "match": True}


def test_identity_needs_independent_env(fig1):
    with pytest.raises(ValueError):
        blip_identity_check(fig1)


def test_samplers_match_direct_dp():
    G = sample_zero_penalty(9, 7, 0.4, 50, SeedSpec(3, "g"), chunk=20)
    assert G.shape == (50,) and G.min() >= 0 and G.max() <= 7
    T = sample_corner_growth(3, 5, 0.5, 200, 4)
    assert T.min() >= 7


def test_edge_probe_degenerate_cases():
    probe = edge_coupling_probe(6, 8, 7, 500, 1)
    assert probe.p_left == 0.0
    assert edge_coupling_probe(6, 8, 0, 10, 1).p_left == 1.0
    with pytest.raises(ValueError):
        edge_coupling_probe(10, 3, 2, 10, 1)
    with pytest.raises(ValueError):
        edge_coupling_probe(4, 4, -1, 10, 1)


@pytest.mark.parametrize("m,n,N", [(20, 30, 2), (12, 8, 6), (12, 8, 5)])
def test_edge_probe_moderate_probabilities(m, n, N):
    probe = edge_coupling_probe(m, n, N, 20000, SeedSpec(9, "probe", (m, n, N)))
    assert 0.1 < probe.p_left < 0.9
    assert abs(probe.p_left - probe.p_right) <= 3 * probe.se


def test_tau_corner_growth_distribution_small():
    q = 0.5
    zt = make_rng(SeedSpec(4, "zeta")).geometric(q, size=(3000, 3, 5)) - 1
    lhs = tau_by_recursion(zt).values[:, 2, 4] + 4
    rhs = sample_corner_growth(3, 5, 0.5, 3000, SeedSpec(4, "cg"))
    assert not ks_two_sample(lhs, rhs).reject_1
    assert math.isclose(lhs.mean(), rhs.mean(), rel_tol=0.05)
