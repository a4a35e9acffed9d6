import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adafw.core import ActiveSet, ContractError, SignedBasis
from adafw.oracles import (
    DegradedLMO,
    L1BallLMO,
    MatchingPursuitLMO,
    NuclearBallLMO,
    SimplexLMO,
    away_oracle,
    l1_ball_lmo,
    mp_lmo,
    nuclear_ball_lmo,
    simplex_lmo,
    support_function,
)

from reference import brute_min, l1_vertices

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_l1_examples():
    ans = l1_ball_lmo(np.array([1.0, -3, 2]), 1.0)
    assert (ans.atom.index, ans.atom.sign, ans.atom.scale) == (1, 1, 1.0)
    assert ans.lmo_value == -3.0
    zero = l1_ball_lmo(np.zeros(3), 5.0)
    np.testing.assert_array_equal(zero.atom.materialize(3), [5, 0, 0])
    assert zero.lmo_value == 0.0
    tie = l1_ball_lmo(np.array([-2.0, -2.0]), 1.0)
    assert (tie.atom.index, tie.atom.sign) == (0, 1)
    assert tie.lmo_value == -2.0


def test_simplex_examples():
    ans = simplex_lmo(np.array([3.0, 1, 2]))
    assert ans.atom.index == 1 and ans.lmo_value == 1.0
    assert simplex_lmo(np.zeros(2)).atom.index == 0
    ans = simplex_lmo(np.array([-1.0, -5]))
    assert ans.atom.index == 1 and ans.lmo_value == -5.0


def test_nuclear_diagonal():
    ans = nuclear_ball_lmo(np.diag([3.0, 1.0]), 1.0)
    assert ans.lmo_value == pytest.approx(-3.0, rel=1e-12)
    np.testing.assert_allclose(ans.atom.materialize((2, 2)), [[-1, 0], [0, 0]], atol=1e-8)


def test_nuclear_zero():
    ans = nuclear_ball_lmo(np.zeros((3, 2)), 1.0)
    assert ans.lmo_value == 0.0
    assert np.linalg.norm(ans.atom.u) == pytest.approx(1.0)


def test_nuclear_random_matches_svd():
    rng = np.random.default_rng(0)
    for _ in range(20):
        G = rng.standard_normal((8, 8))
        ans = nuclear_ball_lmo(G, 2.0, power_iters=200)
        s1 = np.linalg.svd(G, compute_uv=False)[0]
        assert abs(ans.lmo_value) >= 0.99 * 2.0 * s1
        # value is what the atom actually achieves
        assert np.sum(G * ans.atom.materialize(G.shape)) == pytest.approx(ans.lmo_value, rel=1e-10)


def test_nuclear_unconverged_flag():
    rng = np.random.default_rng(1)
    G = rng.standard_normal((80, 70))
    ans = nuclear_ball_lmo(G, 1.0, power_iters=2)
    assert not ans.verified


def test_mp_examples():
    ans = mp_lmo(np.eye(2), np.array([1.0, -3]))
    np.testing.assert_array_equal(ans.atom.materialize(2), [0, 1])
    assert ans.lmo_value == -3.0
    assert mp_lmo(np.eye(2), np.zeros(2)).lmo_value == 0.0
    ans = mp_lmo(np.array([[1.0, 1.0]]) / np.sqrt(2), np.array([1.0, 1.0]))
    np.testing.assert_allclose(ans.atom.materialize(2), -np.ones(2) / np.sqrt(2))
    assert ans.lmo_value == pytest.approx(-np.sqrt(2))


def test_away_examples():
    e0, e1 = SignedBasis(0, 1), SignedBasis(1, 1)
    S = ActiveSet.from_weights([(e0, 0.5), (e1, 0.5)], 2)
    v, val = away_oracle(S, np.array([1.0, -3]))
    assert v == e0 and val == 1.0
    v, _ = away_oracle(ActiveSet(e1, 2), np.array([5.0, 5.0]))
    assert v == e1
    S = ActiveSet.from_weights([(e0, 0.3), (SignedBasis(0, -1), 0.7)], 1)
    v, val = away_oracle(S, np.array([2.0]))
    assert v == e0 and val == 2.0


def test_support_examples():
    assert support_function(L1BallLMO(1.0), np.array([-1.0, 0])) == 1.0
    assert support_function(SimplexLMO(), np.zeros(3)) == 0.0
    assert support_function(NuclearBallLMO(2.0), np.diag([3.0, 1.0])) == pytest.approx(6.0)
    assert NuclearBallLMO(1.0, dense_svd_limit=4).support(np.zeros((5, 5))) is None


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: arrays(float, n, elements=finite)), st.floats(0.1, 10))
def test_l1_matches_enumeration(g, beta):
    ans = l1_ball_lmo(g, beta)
    assert ans.lmo_value == brute_min(g, l1_vertices(g.size, beta))
    assert float(g @ ans.atom.materialize(g.size)) == ans.lmo_value


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: arrays(float, n, elements=finite)))
def test_simplex_matches_enumeration(g):
    assert simplex_lmo(g).lmo_value == brute_min(g, np.eye(g.size))


@settings(max_examples=100, deadline=None)
@given(arrays(float, 6, elements=finite), st.floats(0.1, 10))
def test_lmo_support_duality(g, beta):
    lmo = L1BallLMO(beta)
    assert lmo(g).lmo_value == pytest.approx(-lmo.support(-g))


@settings(max_examples=100, deadline=None)
@given(arrays(float, 5, elements=finite), st.floats(0.01, 100))
def test_l1_scaling_covariance(g, c):
    a, b = l1_ball_lmo(g, 1.0), l1_ball_lmo(c * g, 1.0)
    assert a.atom == b.atom
    assert b.lmo_value == pytest.approx(c * a.lmo_value)


@settings(max_examples=100, deadline=None)
@given(arrays(float, 6, elements=finite), arrays(float, 6, elements=st.floats(0, 1)))
def test_degraded_quality_contract(g, w):
    # x is any point of the simplex; check <g, s' - x> <= delta * min_s <g, s - x>
    x = w / w.sum() if w.sum() > 0 else np.eye(6)[0]
    lmo = DegradedLMO(SimplexLMO(), 0.5)
    ans = lmo(g, x)
    s = ans.atom.materialize(6)
    best = brute_min(g, np.eye(6)) - g @ x
    assert g @ s - g @ x <= 0.5 * best + 1e-9 * (1 + np.abs(g).max())
    assert s.min() >= -1e-12 and s.sum() == pytest.approx(1.0)


def test_degraded_mp_scales_atom():
    lmo = DegradedLMO(MatchingPursuitLMO(1.0), 0.25, matching_pursuit=True)
    ans = lmo(np.array([0.0, -4.0]))
    np.testing.assert_allclose(ans.atom.materialize(2), [0, 0.25])
    assert ans.lmo_value == pytest.approx(-1.0)


def test_degraded_delta_range():
    with pytest.raises(ContractError):
        DegradedLMO(SimplexLMO(), 0.0)


def test_mp_over_nuclear_is_symmetric():
    rng = np.random.default_rng(2)
    G = rng.standard_normal((4, 3))
    lmo = MatchingPursuitLMO(NuclearBallLMO(1.0))
    assert not lmo.finite
    assert lmo.support(G) == pytest.approx(np.linalg.svd(G, compute_uv=False)[0], rel=1e-8)
