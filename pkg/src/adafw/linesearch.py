"""Backtracking step-size selection for Frank-Wolfe type methods.

Each call to :func:`step_size` starts from a Lipschitz estimate ``M`` in
``[eta * L_prev, L_prev]``, takes the minimizer of the quadratic model
``Q(gamma, M)`` on ``[0, gamma_max]`` and multiplies ``M`` by ``tau`` until
the sufficient decrease condition ``f(x + gamma d) <= Q(gamma, M)`` holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import ContractError, norm_sq

# f(x + gamma d) is compared against Q with this relative slack so that
# round-off near convergence cannot stall the loop
DECREASE_RTOL = 1e-13
LIPSCHITZ_FALLBACK = 1e-3


class BacktrackingError(RuntimeError):
    """Sufficient decrease was not reached within the backtracking cap."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass
class LineSearchState:
    lipschitz: float
    tau: float = 2.0
    eta: float = 0.9
    prev_objective: Optional[float] = None
    prev_prev_objective: Optional[float] = None
    warm_start: bool = True
    max_backtracks: int = 100

    def __post_init__(self):
        if not (self.lipschitz > 0 and math.isfinite(self.lipschitz)):
            raise ContractError(f"Lipschitz estimate must be positive and finite, got {self.lipschitz}")

    def push_objective(self, f_current: float) -> None:
        """Record f(x_t) at the start of an iteration."""
        self.prev_prev_objective = self.prev_objective
        self.prev_objective = f_current


class StepSize(NamedTuple):
    gamma: float
    lipschitz: float
    evals: int
    f_next: float


def surrogate_q(f_xt: float, gamma: float, g_t: float, M: float, d_norm_sq: float) -> float:
    return f_xt - gamma * g_t + 0.5 * gamma * gamma * M * d_norm_sq


def candidate_step(g_t: float, M: float, d_norm_sq: float, gamma_max: float) -> float:
    if d_norm_sq <= 0:
        raise ContractError("zero update direction")
    return min(g_t / (M * d_norm_sq), gamma_max)


def init_lipschitz(objective, x0, d0, eps: float = 1e-3) -> float:
    """Finite-difference probe ``||grad(x0) - grad(x0 + eps d0)|| / (eps ||d0||)``."""
    d_norm = math.sqrt(norm_sq(d0))
    if d_norm == 0:
        raise ContractError("zero probe direction")
    diff = objective.gradient(x0) - objective.gradient(x0 + eps * d0)
    L = float(np.linalg.norm(diff)) / (eps * d_norm)
    if not (L > 0 and math.isfinite(L)):
        return LIPSCHITZ_FALLBACK
    return L


def warm_start_m(state: LineSearchState, g_t: float, d_norm_sq: float) -> float:
    """Initial trial ``M`` from a quadratic interpolation of the last decrease.

    ``state.prev_objective`` holds f(x_t) and ``state.prev_prev_objective``
    holds f(x_{t-1}). Without a usable previous decrease the optimistic end
    ``eta * L_prev`` of the admissible interval is returned.
    """
    lo, hi = state.eta * state.lipschitz, state.lipschitz
    if not state.warm_start:
        return lo
    f_prev, f_cur = state.prev_prev_objective, state.prev_objective
    if f_prev is None or f_cur is None:
        return lo
    decrease = f_prev - f_cur
    if not decrease > 0 or d_norm_sq <= 0:
        return lo
    M = g_t * g_t / (2.0 * decrease * d_norm_sq)
    if not math.isfinite(M):
        return lo
    return min(max(M, lo), hi)


def step_size(
    objective,
    x_t,
    d_t,
    g_t: float,
    state: LineSearchState,
    gamma_max: float,
    f_xt: Optional[float] = None,
) -> StepSize:
    """Backtracking line search; updates ``state.lipschitz`` in place."""
    if not g_t > 0:
        raise ContractError(f"step_size needs a positive pairing gap, got {g_t}")
    if not gamma_max > 0:
        raise ContractError(f"gamma_max must be positive, got {gamma_max}")
    if f_xt is None:
        f_xt = state.prev_objective if state.prev_objective is not None else objective.value(x_t)
    d_norm_sq = norm_sq(d_t)
    M = warm_start_m(state, g_t, d_norm_sq)
    evals = 0
    while True:
        gamma = candidate_step(g_t, M, d_norm_sq, gamma_max)
        f_next = objective.value(x_t + gamma * d_t)
        evals += 1
        q = surrogate_q(f_xt, gamma, g_t, M, d_norm_sq)
        if f_next <= q + DECREASE_RTOL * (abs(f_xt) + abs(gamma * g_t)):
            break
        if evals >= state.max_backtracks:
            raise BacktrackingError(
                f"sufficient decrease not met after {evals} evaluations (M={M:.3e})"
            )
        M *= state.tau
    state.lipschitz = M
    return StepSize(gamma, M, evals, f_next)


def backtrack_budget(t: int, eta: float, tau: float, L: float, L_minus1: float) -> float:
    """Upper bound on the cumulative number of sufficient-decrease checks."""
    log_tau = math.log(tau)
    return (1.0 - math.log(eta) / log_tau) * (t + 1) + max(math.log(tau * L / L_minus1), 0.0) / log_tau
