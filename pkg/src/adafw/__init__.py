"""Frank-Wolfe variants and matching pursuit with backtracking line search."""

from .algorithms import (
    DualGapTracker,
    SolverResult,
    dual_gap,
    fw_gap,
    lipschitz_stats,
    mp_gap,
    run_ada_afw,
    run_ada_fw,
    run_ada_mp,
    run_ada_pfw,
    run_fixed_step_fw,
    solve,
)
from .core import ActiveSet, DenseAtom, RankOne, SignedBasis, SolverConfig, TraceRecord
from .linesearch import BacktrackingError, LineSearchState, backtrack_budget, step_size
from .oracles import (
    DegradedLMO,
    L1BallLMO,
    MatchingPursuitLMO,
    NuclearBallLMO,
    SimplexLMO,
)

__version__ = "0.1.0"
