"""Frank-Wolfe variants and matching pursuit with backtracking step sizes.

All solvers share :func:`solve`, which runs the generic loop: compute a
direction and its maximal step, stop when the pairing gap
``g_t = -<grad f(x_t), d_t>`` falls below ``delta * tol``, otherwise pick
``gamma_t`` by backtracking and move. The variants differ only in how the
direction is built and how the active set is maintained.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    ActiveSet,
    ContractError,
    SolverConfig,
    StepOutcome,
    TraceRecord,
    _same_step,
    inner_product,
    norm_sq,
)
from .linesearch import BacktrackingError, LineSearchState, candidate_step, init_lipschitz, step_size
from .oracles import away_oracle

VARIANTS = ("fw", "afw", "pfw", "mp")


@dataclass
class SolverResult:
    x: np.ndarray
    active_set: Optional[ActiveSet]
    trace: list = field(default_factory=list)
    reason: str = "max_iter"
    init_lipschitz: Optional[float] = None

    @property
    def iterations(self) -> int:
        """Number of steps taken."""
        return max(len(self.trace) - 1, 0) if self.trace and self.trace[-1].step_type == "terminal" else len(self.trace)

    @property
    def objective(self) -> float:
        return self.trace[-1].objective

    def bad_steps(self) -> int:
        return sum(r.step_type in ("drop", "swap") for r in self.trace)


class DualGapTracker:
    """Running gradient average ``u_t`` whose dual value certifies suboptimality."""

    def __init__(self, grad0, delta: float = 1.0):
        self.u = np.array(grad0, dtype=float)
        self.good_steps = 0
        self.delta = delta

    def update(self, grad, good: bool) -> None:
        if good:
            xi = 2.0 / (self.delta * self.good_steps + 2.0)
            self.u = (1.0 - xi) * self.u + xi * grad
            self.good_steps += 1

    def dual_objective(self, objective, constraint) -> Optional[float]:
        if not objective.has_conjugate:
            return None
        sigma = constraint.support(-self.u)
        if sigma is None:
            return None
        return -objective.conjugate(self.u) - sigma


def dual_gap(tracker: DualGapTracker, objective, constraint, f_xt: float) -> Optional[float]:
    psi = tracker.dual_objective(objective, constraint)
    return None if psi is None else f_xt - psi


def fw_gap(objective, x, exact_lmo) -> float:
    grad = objective.gradient(x)
    return inner_product(grad, x) - exact_lmo(grad, x).lmo_value


def mp_gap(objective, x, mp_lmo) -> float:
    grad = objective.gradient(x)
    return -mp_lmo(grad, x).lmo_value


def lipschitz_stats(trace):
    """Average and maximum Lipschitz estimate over good steps."""
    L = [r.lipschitz for r in trace if r.step_type == "good"]
    if not L:
        raise ValueError("no good steps in trace")
    return math.fsum(L) / len(L), max(L)


def solve(
    objective,
    lmo,
    config: SolverConfig,
    variant: str = "fw",
    x0=None,
    fixed_lipschitz: Optional[float] = None,
    callback: Optional[Callable] = None,
) -> SolverResult:
    """Run one of the variants ``fw``, ``afw``, ``pfw`` or ``mp``.

    ``x0`` may be an atom (required form for ``afw``/``pfw``) or an array.
    When ``fixed_lipschitz`` is given the step uses that constant and no
    backtracking happens. ``callback(t, x_t, outcome)`` is called after the
    step size is chosen and before the iterate moves.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    shape = tuple(objective.shape)
    delta = config.lmo_quality
    active = None
    if variant in ("afw", "pfw"):
        if not getattr(lmo, "finite", False):
            raise ContractError(f"{variant} needs an oracle over a finite atom set")
        atom0 = lmo.initial_atom(shape) if x0 is None else x0
        if isinstance(atom0, np.ndarray):
            raise ContractError(f"{variant} must start from a single atom")
        active = ActiveSet(atom0, shape)
        x = active.iterate
    elif x0 is None:
        x = np.zeros(shape) if variant == "mp" else lmo.initial_atom(shape).materialize(shape)
    elif isinstance(x0, np.ndarray):
        x = np.array(x0, dtype=float).reshape(shape)
    else:
        x = x0.materialize(shape)

    f, grad = objective.value_and_grad(x)
    tracker = None
    if variant != "mp" and objective.has_conjugate:
        tracker = DualGapTracker(grad, delta)

    result = SolverResult(x, active, [], "max_iter")
    state: Optional[LineSearchState] = None
    n_evals = good = 0
    L_sum, L_max = 0.0, -math.inf
    L_prev = config.init_lipschitz
    start = time.perf_counter()

    for t in range(config.max_iter + 1):
        answer = lmo(grad, x)
        s = answer.atom
        s_dot = answer.lmo_value
        g_dot_x = inner_product(grad, x)
        gap = -s_dot if variant == "mp" else g_dot_x - s_dot

        v = None
        branch = variant
        if variant == "fw":
            d = s.materialize(shape) - x
            gamma_max = 1.0
        elif variant == "mp":
            d = s.materialize(shape)
            gamma_max = math.inf
        elif variant == "afw":
            v, v_dot = away_oracle(active, grad)
            singleton = len(active) == 1
            if singleton or s_dot - g_dot_x <= g_dot_x - v_dot:
                branch = "fw"
                d = s.materialize(shape) - x
                gamma_max = 1.0
            else:
                branch = "away"
                d = x - v.materialize(shape)
                gamma_max = active.away_gamma_max(v)
        else:
            v, _ = away_oracle(active, grad)
            d = s.materialize(shape) - v.materialize(shape)
            gamma_max = active.weight(v)

        g_t = -inner_product(grad, d)
        dgap = dual_gap(tracker, objective, lmo, f) if tracker is not None else None

        stop = None
        if g_t <= delta * config.tol:
            stop = "gap_tolerance"
        elif t == config.max_iter:
            stop = "max_iter"
        if stop is not None:
            result.trace.append(_record(t, start, f, gap, dgap, 0.0, L_prev, "terminal",
                                        n_evals, good, L_sum, L_max, g_t, gamma_max))
            result.reason = stop
            break

        d_norm_sq = norm_sq(d)
        if state is None:
            L0 = config.init_lipschitz or init_lipschitz(objective, x, d)
            state = LineSearchState(L0, config.tau, config.eta, warm_start=config.warm_start,
                                    max_backtracks=config.max_backtracks)
            result.init_lipschitz = L0
        state.push_objective(f)
        if fixed_lipschitz is not None:
            gamma = candidate_step(g_t, fixed_lipschitz, d_norm_sq, gamma_max)
            L_t, evals = float(fixed_lipschitz), 0
            f_next = objective.value(x + gamma * d)
        else:
            try:
                gamma, L_t, evals, f_next = step_size(objective, x, d, g_t, state, gamma_max, f)
            except BacktrackingError as exc:
                result.reason = "backtrack_failure"
                result.x = x
                exc.result = result
                raise
        L_prev = L_t

        hit_max = gamma_max < 1.0 and _same_step(gamma, gamma_max)
        outcome = StepOutcome(d, g_t, gamma, gamma_max, "good", evals, L_t, d_norm_sq, f, f_next)
        if callback is not None:
            callback(t, x, outcome)

        if variant in ("fw", "mp"):
            x = x + gamma * d
            event = "good"
        elif branch == "fw":
            event = active.fw_step(s, gamma)
        elif branch == "away":
            event = active.away_step(v, gamma_max if hit_max else gamma)
        else:
            event = active.pairwise_step(s, v, gamma_max if hit_max else gamma)
        if active is not None:
            x = active.iterate
        is_bad = hit_max and event in ("drop", "swap")
        outcome.classification = event if is_bad else "good"

        if tracker is not None:
            tracker.update(grad, not is_bad)
        n_evals += evals
        if not is_bad:
            good += 1
            L_sum += L_t
            L_max = max(L_max, L_t)
        result.trace.append(_record(t, start, f, gap, dgap, gamma, L_t, outcome.classification,
                                    n_evals, good, L_sum, L_max, g_t, gamma_max))
        f, grad = objective.value_and_grad(x)

    result.x = x
    return result


def _record(t, start, f, gap, dgap, gamma, L, kind, n_evals, good, L_sum, L_max, g_t, gamma_max):
    return TraceRecord(
        iter=t,
        elapsed=time.perf_counter() - start,
        objective=float(f),
        gap=float(gap),
        dual_gap=None if dgap is None else float(dgap),
        step_size=float(gamma),
        lipschitz=float(L) if L is not None else math.nan,
        step_type=kind,
        n_backtracks=n_evals,
        good_steps=good,
        avg_lipschitz=L_sum / good if good else None,
        max_lipschitz=L_max if good else None,
        pairing_gap=float(g_t),
        gamma_max=float(gamma_max),
    )


def run_ada_fw(objective, lmo, config: SolverConfig, **kw) -> SolverResult:
    return solve(objective, lmo, config, "fw", **kw)


def run_ada_afw(objective, finite_lmo, config: SolverConfig, **kw) -> SolverResult:
    return solve(objective, finite_lmo, config, "afw", **kw)


def run_ada_pfw(objective, finite_lmo, config: SolverConfig, **kw) -> SolverResult:
    return solve(objective, finite_lmo, config, "pfw", **kw)


def run_ada_mp(objective, mp_lmo, config: SolverConfig, **kw) -> SolverResult:
    return solve(objective, mp_lmo, config, "mp", **kw)


def run_fixed_step_fw(objective, lmo, config: SolverConfig, known_L: float, variant: str = "fw", **kw) -> SolverResult:
    """Baseline with the step ``min(g_t / (L ||d_t||^2), gamma_max)``."""
    if not known_L > 0:
        raise ContractError("known_L must be positive")
    return solve(objective, lmo, config, variant, fixed_lipschitz=known_L, **kw)
