"""Linear minimization oracles over atom sets.

Every oracle object is callable as ``lmo(grad, x)`` and returns an
:class:`LmoAnswer`. It also exposes ``support(u)`` (the support function of
the convex hull, used by dual gaps), ``initial_atom(shape)`` (the answer on a
zero gradient, used as starting vertex) and a ``finite`` flag telling whether
atoms can be keyed in an active set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ActiveSet, Atom, ContractError, DenseAtom, RankOne, SignedBasis, inner_product

DENSE_SVD_LIMIT = 64


@dataclass
class LmoAnswer:
    atom: Atom
    lmo_value: float
    quality: float = 1.0
    verified: bool = True


def _argmax_abs(g: np.ndarray) -> int:
    # np.argmax returns the first maximizer, giving lowest-index ties
    return int(np.argmax(np.abs(g)))


def l1_ball_lmo(grad, beta: float) -> LmoAnswer:
    if not beta > 0:
        raise ContractError("radius must be positive")
    g = np.asarray(grad, dtype=float).ravel()
    i = _argmax_abs(g)
    if g[i] == 0.0:
        return LmoAnswer(SignedBasis(0, 1, beta), 0.0)
    sign = -1 if g[i] > 0 else 1
    return LmoAnswer(SignedBasis(i, sign, beta), -beta * abs(g[i]))


def simplex_lmo(grad) -> LmoAnswer:
    g = np.asarray(grad, dtype=float).ravel()
    i = int(np.argmin(g))
    return LmoAnswer(SignedBasis(i, 1, 1.0), float(g[i]))


def power_iteration(G: np.ndarray, n_iter: int = 200, tol: float = 1e-12, seed: int = 0):
    """Dominant singular triple of ``G`` by power iteration on ``G^T G``.

    Returns ``(u, sigma, v, converged)``.
    """
    G = np.asarray(G, dtype=float)
    m, n = G.shape
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    converged = False
    for _ in range(n_iter):
        w = G.T @ (G @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v_new = w / nw
        if np.linalg.norm(v_new - v) <= tol:
            v = v_new
            converged = True
            break
        v = v_new
    Gv = G @ v
    sigma = float(np.linalg.norm(Gv))
    if sigma == 0.0:
        u = np.zeros(m)
        u[0] = 1.0
        v = np.zeros(n)
        v[0] = 1.0
        return u, 0.0, v, True
    return Gv / sigma, sigma, v, converged


def operator_norm_sq(A, n_iter: int = 50, seed: int = 0) -> float:
    """Estimate ``||A||_op^2`` with power iteration on ``A^T A`` (A may be sparse)."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(n_iter):
        w = A.T @ (A @ v)
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    Av = A @ v
    return float(np.dot(Av, Av))


def nuclear_ball_lmo(grad, beta: float, power_iters: int = 500, tol: float = 1e-12, seed: int = 0) -> LmoAnswer:
    G = np.asarray(grad, dtype=float)
    if G.ndim != 2:
        raise ContractError("nuclear-norm oracle needs a matrix gradient")
    u, sigma, v, converged = power_iteration(G, power_iters, tol, seed)
    atom = RankOne(-u, v, beta)
    value = -beta * sigma
    quality, verified = 1.0, converged
    if max(G.shape) <= DENSE_SVD_LIMIT:
        s1 = np.linalg.svd(G, compute_uv=False)[0] if G.size else 0.0
        quality = 1.0 if s1 == 0 else sigma / s1
        verified = True
    return LmoAnswer(atom, value, quality, verified)


def mp_lmo(base, grad) -> LmoAnswer:
    """Minimize ``<grad, s>`` over the symmetrized set ``B = A u -A``.

    ``base`` is either a 2-D array whose rows are the atoms or a positive
    float ``beta`` standing for ``{beta * e_i}``.
    """
    g = np.asarray(grad, dtype=float).ravel()
    if np.isscalar(base):
        return l1_ball_lmo(g, float(base))
    atoms = np.asarray(base, dtype=float)
    if atoms.ndim != 2 or atoms.shape[0] == 0:
        raise ContractError("atom dictionary must be a non-empty 2-D array")
    scores = atoms @ g
    i = _argmax_abs(scores)
    sign = -1.0 if scores[i] > 0 else 1.0
    if scores[i] == 0.0:
        sign = 1.0
    return LmoAnswer(DenseAtom(sign * atoms[i]), -abs(float(scores[i])))


def away_oracle(S: ActiveSet, grad):
    """Atom of ``S`` maximizing ``<grad, v>``; ties go to the first atom key."""
    if len(S) == 0:
        raise ContractError("empty active set")
    best, best_val = None, -np.inf
    for atom, _ in S.items():
        val = atom.dot(grad)
        if val > best_val:
            best, best_val = atom, val
    return best, best_val


# ---------------------------------------------------------------------------
# oracle objects
# ---------------------------------------------------------------------------


class L1BallLMO:
    finite = True
    name = "l1_ball"

    def __init__(self, radius: float):
        if not radius > 0:
            raise ContractError("radius must be positive")
        self.radius = float(radius)

    def __call__(self, grad, x=None) -> LmoAnswer:
        return l1_ball_lmo(grad, self.radius)

    def support(self, u) -> float:
        return self.radius * float(np.max(np.abs(u)))

    def initial_atom(self, shape) -> Atom:
        return self(np.zeros(shape)).atom


class SimplexLMO:
    finite = True
    name = "simplex"

    def __call__(self, grad, x=None) -> LmoAnswer:
        return simplex_lmo(grad)

    def support(self, u) -> float:
        return float(np.max(u))

    def initial_atom(self, shape) -> Atom:
        return self(np.zeros(shape)).atom


class NuclearBallLMO:
    finite = False
    name = "nuclear_ball"

    def __init__(self, radius: float, power_iters: int = 500, tol: float = 1e-12, seed: int = 0,
                 dense_svd_limit: int = DENSE_SVD_LIMIT):
        if not radius > 0:
            raise ContractError("radius must be positive")
        self.radius = float(radius)
        self.power_iters = power_iters
        self.tol = tol
        self.seed = seed
        self.dense_svd_limit = dense_svd_limit

    def __call__(self, grad, x=None) -> LmoAnswer:
        return nuclear_ball_lmo(grad, self.radius, self.power_iters, self.tol, self.seed)

    def support(self, u):
        """``radius * sigma_1(u)``, or None above the dense-SVD size limit."""
        u = np.asarray(u, dtype=float)
        if max(u.shape) > self.dense_svd_limit:
            return None
        return self.radius * float(np.linalg.svd(u, compute_uv=False)[0])

    def initial_atom(self, shape) -> Atom:
        return self(np.zeros(shape)).atom


class MatchingPursuitLMO:
    """Oracle over ``A u -A`` for matching pursuit.

    ``base`` is a 2-D array of atoms (rows), a float scale for basis vectors,
    or a symmetric oracle object (for instance a unit nuclear ball).
    """

    finite = True
    name = "matching_pursuit"

    def __init__(self, base=1.0):
        self.base = base
        if hasattr(base, "support"):
            self.finite = bool(getattr(base, "finite", False))

    def __call__(self, grad, x=None) -> LmoAnswer:
        if callable(self.base):
            return self.base(grad, x)
        return mp_lmo(self.base, grad)

    def support(self, u) -> float:
        return -self(np.negative(u)).lmo_value


class DegradedLMO:
    """Wraps an exact oracle and returns an answer of quality exactly ``delta``.

    With exact answer ``s`` and iterate ``x`` the returned atom is the point
    ``x + delta (s - x)``, so ``<g, s' - x> = delta * min_s <g, s - x>``.
    For matching pursuit (``x`` is ignored) the atom is ``delta * s``.
    """

    finite = True

    def __init__(self, inner, delta: float, matching_pursuit: bool = False):
        if not 0 < delta <= 1:
            raise ContractError("delta must lie in (0, 1]")
        self.inner = inner
        self.delta = float(delta)
        self.matching_pursuit = matching_pursuit
        self.name = f"degraded_{getattr(inner, 'name', 'lmo')}"

    def __call__(self, grad, x=None) -> LmoAnswer:
        exact = self.inner(grad, x)
        s = exact.atom.materialize(np.shape(grad))
        if self.matching_pursuit:
            point = self.delta * s
        else:
            if x is None:
                raise ContractError("degraded FW oracle needs the current iterate")
            point = x + self.delta * (s - x)
        return LmoAnswer(DenseAtom(point), inner_product(grad, point), self.delta)

    def support(self, u):
        return self.inner.support(u)

    def initial_atom(self, shape) -> Atom:
        return self.inner.initial_atom(shape)


def support_function(constraint, u):
    """Support function ``sup{<u, a> : a in conv(A)}`` of an oracle's atom set."""
    return constraint.support(u)
