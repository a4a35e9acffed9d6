import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adafw.core import ContractError
from adafw.linesearch import (
    LIPSCHITZ_FALLBACK,
    BacktrackingError,
    LineSearchState,
    backtrack_budget,
    candidate_step,
    init_lipschitz,
    step_size,
    surrogate_q,
    warm_start_m,
)
from adafw.objectives import Objective, least_squares, quadratic


class Half(Objective):
    # f(x) = 1/2 x^2 in one dimension
    shape = (1,)
    lipschitz = 1.0

    def value(self, x):
        return 0.5 * float(x[0]) ** 2

    def gradient(self, x):
        return np.array([float(x[0])])


class Linear(Objective):
    shape = (2,)

    def value(self, x):
        return float(x[0] - 2 * x[1])

    def gradient(self, x):
        return np.array([1.0, -2.0])


class Broken(Objective):
    # NaN away from the start point: no trial can ever be accepted
    shape = (1,)

    def value(self, x):
        return 0.5 if float(x[0]) == 1.0 else math.nan

    def gradient(self, x):
        return np.array([1.0])


@pytest.mark.parametrize("args, expected", [
    ((0.5, 1, 1, 1, 1), 0.0),
    ((3, 0, 7, 2, 5), 3.0),
    ((0.5, 2, 1, 0.5, 1), -0.5),
])
def test_surrogate_q(args, expected):
    assert surrogate_q(*args) == expected


@pytest.mark.parametrize("args, expected", [
    ((1, 1, 1, 1), 1.0),
    ((1, 4, 1, 1), 0.25),
    ((5, 1, 1, 0.3), 0.3),
])
def test_candidate_step(args, expected):
    assert candidate_step(*args) == expected


def test_candidate_step_zero_direction():
    with pytest.raises(ContractError):
        candidate_step(1.0, 1.0, 0.0, 1.0)


def test_init_lipschitz_half_square():
    assert init_lipschitz(Half(), np.array([1.0]), np.array([-1.0])) == pytest.approx(1.0, rel=1e-9)


def test_init_lipschitz_linear_falls_back():
    assert init_lipschitz(Linear(), np.array([0.3, 1.0]), np.array([1.0, 1.0])) == LIPSCHITZ_FALLBACK


def test_init_lipschitz_matches_hessian_vector():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 4))
    obj = least_squares(A, np.zeros(6))
    x0, d0 = rng.standard_normal(4), rng.standard_normal(4)
    eps = 1e-3
    # gradient is A'Ax, so the probe is ||A'A(eps d)|| / (eps ||d||)
    expected = np.linalg.norm(A.T @ (A @ (eps * d0))) / (eps * np.linalg.norm(d0))
    assert init_lipschitz(obj, x0, d0, eps) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("decrease, expected", [(0.25, 1.0), (10.0, 0.9), (None, 0.9)])
def test_warm_start(decrease, expected):
    state = LineSearchState(1.0, 2.0, 0.9)
    if decrease is not None:
        state.push_objective(decrease + 1.0)
        state.push_objective(1.0)
    assert warm_start_m(state, 1.0, 1.0) == pytest.approx(expected)


def test_warm_start_disabled():
    state = LineSearchState(1.0, 2.0, 0.9, warm_start=False)
    state.push_objective(1.25)
    state.push_objective(1.0)
    assert warm_start_m(state, 1.0, 1.0) == pytest.approx(0.9)


def test_step_size_accepts_first_trial():
    state = LineSearchState(1.0, 2.0, 1.0)
    gamma, L, evals, f_next = step_size(Half(), np.array([1.0]), np.array([-1.0]), 1.0, state, 1.0)
    assert (gamma, L, evals) == (1.0, 1.0, 1)
    assert f_next == 0.0
    assert state.lipschitz == 1.0


def test_step_size_backtracks_once():
    state = LineSearchState(0.5, 2.0, 1.0)
    gamma, L, evals, _ = step_size(Half(), np.array([1.0]), np.array([-1.0]), 1.0, state, 2.0)
    assert (gamma, L, evals) == (1.0, 1.0, 2)


def test_step_size_is_exact_minimizer_at_true_curvature():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((5, 5))
    obj = quadratic(M @ M.T + np.eye(5), rng.standard_normal(5))
    x, d = rng.standard_normal(5), rng.standard_normal(5)
    g = -float(obj.gradient(x) @ d)
    if g < 0:
        d, g = -d, -g
    curv = float(d @ obj.Q @ d) / float(d @ d)
    state = LineSearchState(curv, 2.0, 1.0, warm_start=False)
    gamma, L, evals, _ = step_size(obj, x, d, g, state, math.inf)
    # exact line minimizer of a quadratic along d
    assert gamma == pytest.approx(g / float(d @ obj.Q @ d), rel=1e-12)
    assert evals == 1


def test_step_size_gives_up_on_broken_objective():
    state = LineSearchState(1e-3, 2.0, 1.0, max_backtracks=20)
    with pytest.raises(BacktrackingError):
        step_size(Broken(), np.array([1.0]), np.array([-1.0]), 1.0, state, 1.5)


def test_step_size_rejects_nonpositive_gap():
    with pytest.raises(ContractError):
        step_size(Half(), np.array([1.0]), np.array([-1.0]), 0.0, LineSearchState(1.0), 1.0)


def test_backtrack_budget_examples():
    t = 7
    assert backtrack_budget(t, 1.0, 2.0, 3.0, 3.0) == pytest.approx(t + 1 + 1)
    bracket = 1 - math.log(0.9) / math.log(2.0)
    assert bracket == pytest.approx(1.152, abs=1e-3) and bracket <= 1.16
    assert backtrack_budget(0, 1.0, 2.0, 1.0, 2.0) == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(
    curv=st.floats(1e-3, 1e3),
    L0=st.floats(1e-4, 1e4),
    eta=st.floats(0.5, 1.0),
    tau=st.floats(1.5, 4.0),
)
def test_accepted_estimate_is_capped(curv, L0, eta, tau):
    # f(x) = curv/2 x^2: sufficient decrease holds for every M >= curv
    class Scaled(Half):
        def value(self, x):
            return 0.5 * curv * float(x[0]) ** 2

        def gradient(self, x):
            return np.array([curv * float(x[0])])

    state = LineSearchState(L0, tau, eta, warm_start=False)
    x, d = np.array([1.0]), np.array([-1.0])
    gamma, L, evals, f_next = step_size(Scaled(), x, d, curv, state, 1.0)
    assert L <= max(tau * curv, eta * L0) * (1 + 1e-12)
    assert f_next <= surrogate_q(0.5 * curv, gamma, curv, L, 1.0) + 1e-12 * curv
    assert evals <= 1 + max(math.ceil(math.log(curv / (eta * L0)) / math.log(tau) - 1e-12), 0) + 1
