"""Shared domain types: atoms, active sets, solver configuration and traces.

Points are plain numpy arrays (vectors or matrices); every inner product and
norm is taken over the flattened view so matrix iterates need no special
handling. Sparse vectors from :mod:`scipy.sparse` are accepted by
:func:`inner_product`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Optional

import numpy as np
import scipy.sparse as sp

# weights below this after an update are treated as exactly zero
WEIGHT_PRUNE_TOL = 1e-12
# full recomputation cadence for the cached iterate of an active set
RECOMPUTE_EVERY = 1000


class DimensionError(ValueError):
    pass


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


def _flat(a) -> np.ndarray | sp.spmatrix:
    if sp.issparse(a):
        return a.reshape(1, -1) if a.shape[0] != 1 else a
    return np.asarray(a, dtype=float).ravel()


def inner_product(a, b) -> float:
    """Euclidean inner product over the flattened view of ``a`` and ``b``.

    Either argument may be a scipy sparse vector; sparse-dense mixes only
    touch the stored entries so the result is exact.
    """
    fa, fb = _flat(a), _flat(b)
    na = fa.shape[-1] if sp.issparse(fa) else fa.size
    nb = fb.shape[-1] if sp.issparse(fb) else fb.size
    if na != nb:
        raise DimensionError(f"inner product of sizes {na} and {nb}")
    if sp.issparse(fa) and sp.issparse(fb):
        return float(fa.multiply(fb).sum())
    if sp.issparse(fa):
        fa, fb = fb, fa
    if sp.issparse(fb):
        coo = fb.tocoo()
        return float(np.dot(fa[coo.col], coo.data))
    return float(np.dot(fa, fb))


def norm_sq(a) -> float:
    return inner_product(a, a)


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------

_rank_one_ids = itertools.count()


@dataclass(frozen=True, eq=False)
class SignedBasis:
    """The vertex ``scale * sign * e_index``."""

    index: int
    sign: int
    scale: float = 1.0

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ContractError(f"sign must be +1 or -1, got {self.sign}")
        if not self.scale > 0:
            raise ContractError(f"scale must be positive, got {self.scale}")

    @property
    def key(self) -> Hashable:
        return ("basis", self.index, self.sign)

    def materialize(self, shape) -> np.ndarray:
        out = np.zeros(shape)
        self.add_to(out, 1.0)
        return out

    def add_to(self, x: np.ndarray, coef: float) -> None:
        x.flat[self.index] += coef * self.sign * self.scale

    def dot(self, g) -> float:
        return self.sign * self.scale * float(np.asarray(g).flat[self.index])

    def __eq__(self, other):
        return isinstance(other, SignedBasis) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


@dataclass(frozen=True, eq=False)
class RankOne:
    """The matrix ``scale * u v^T`` with unit vectors ``u`` and ``v``.

    Rank-one atoms are never deduplicated: each instance has its own id.
    """

    u: np.ndarray
    v: np.ndarray
    scale: float = 1.0
    uid: int = field(default_factory=lambda: next(_rank_one_ids))

    def __post_init__(self):
        for name, vec in (("u", self.u), ("v", self.v)):
            if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
                raise ContractError(f"{name} must have unit norm")
        if not self.scale > 0:
            raise ContractError(f"scale must be positive, got {self.scale}")

    @property
    def key(self) -> Hashable:
        return ("rank_one", self.uid)

    def materialize(self, shape=None) -> np.ndarray:
        out = self.scale * np.outer(self.u, self.v)
        if shape is not None and out.shape != tuple(shape):
            raise DimensionError(f"rank-one atom of shape {out.shape}, expected {shape}")
        return out

    def add_to(self, x: np.ndarray, coef: float) -> None:
        x += (coef * self.scale) * np.outer(self.u, self.v)

    def dot(self, g) -> float:
        return self.scale * float(self.u @ np.asarray(g) @ self.v)

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return hash(self.key)


@dataclass(frozen=True, eq=False)
class DenseAtom:
    vector: np.ndarray

    @property
    def key(self) -> Hashable:
        return ("dense", self.vector.shape, self.vector.tobytes())

    def materialize(self, shape=None) -> np.ndarray:
        out = np.array(self.vector, dtype=float)
        if shape is not None:
            out = out.reshape(shape)
        return out

    def add_to(self, x: np.ndarray, coef: float) -> None:
        x += coef * self.vector.reshape(x.shape)

    def dot(self, g) -> float:
        return inner_product(self.vector, g)

    def __eq__(self, other):
        return isinstance(other, DenseAtom) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


Atom = SignedBasis | RankOne | DenseAtom


def materialize(atom: Atom, shape) -> np.ndarray:
    return atom.materialize(shape)


# ---------------------------------------------------------------------------
# active sets
# ---------------------------------------------------------------------------


class ActiveSet:
    """Convex decomposition ``x = sum_v alpha_v v`` with a cached iterate.

    The ``*_step`` methods update in place and return a structural event
    (``"good"``, ``"drop"`` or ``"swap"``). The module-level ``apply_*``
    functions are the copying counterparts.
    """

    def __init__(self, atom: Atom, shape):
        self.shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
        self._atoms: dict[Hashable, Atom] = {atom.key: atom}
        self._weights: dict[Hashable, float] = {atom.key: 1.0}
        self.iterate = atom.materialize(self.shape)
        self._updates = 0

    @classmethod
    def from_weights(cls, pairs, shape) -> "ActiveSet":
        pairs = list(pairs)
        S = cls(pairs[0][0], shape)
        S._atoms.clear()
        S._weights.clear()
        for atom, w in pairs:
            S._atoms[atom.key] = atom
            S._weights[atom.key] = S._weights.get(atom.key, 0.0) + float(w)
        S._recompute()
        return S

    def copy(self) -> "ActiveSet":
        new = object.__new__(ActiveSet)
        new.shape = self.shape
        new._atoms = dict(self._atoms)
        new._weights = dict(self._weights)
        new.iterate = self.iterate.copy()
        new._updates = self._updates
        return new

    def __len__(self):
        return len(self._weights)

    def __contains__(self, atom: Atom):
        return atom.key in self._weights

    def weight(self, atom: Atom) -> float:
        return self._weights.get(atom.key, 0.0)

    def items(self):
        """(atom, weight) pairs ordered by atom key."""
        for key in sorted(self._weights):
            yield self._atoms[key], self._weights[key]

    def weights(self) -> dict:
        return dict(self._weights)

    def materialize(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for key, w in self._weights.items():
            self._atoms[key].add_to(out, w)
        return out

    def _recompute(self):
        self.iterate = self.materialize()

    def _tick(self, pruned: bool):
        self._updates += 1
        if pruned or self._updates % RECOMPUTE_EVERY == 0:
            self._recompute()

    def _hygiene(self) -> bool:
        small = [k for k, w in self._weights.items() if w < WEIGHT_PRUNE_TOL]
        for k in small:
            del self._weights[k]
            del self._atoms[k]
        total = math.fsum(self._weights.values())
        if total != 1.0:
            for k in self._weights:
                self._weights[k] /= total
        return bool(small)

    # -- updates -----------------------------------------------------------

    def fw_step(self, s: Atom, gamma: float) -> str:
        if not 0.0 <= gamma <= 1.0:
            raise ContractError(f"FW step size must lie in [0, 1], got {gamma}")
        if gamma == 0.0:
            return "good"
        if gamma == 1.0:
            self._atoms = {s.key: s}
            self._weights = {s.key: 1.0}
            self._recompute()
            return "good"
        for k in self._weights:
            self._weights[k] *= 1.0 - gamma
        self._atoms.setdefault(s.key, s)
        self._weights[s.key] = self._weights.get(s.key, 0.0) + gamma
        self.iterate *= 1.0 - gamma
        s.add_to(self.iterate, gamma)
        self._tick(self._hygiene())
        return "good"

    def away_gamma_max(self, v: Atom) -> float:
        a = self._weights[v.key]
        return math.inf if a >= 1.0 else a / (1.0 - a)

    def away_step(self, v: Atom, gamma: float) -> str:
        if v.key not in self._weights:
            raise ContractError("away atom is not in the active set")
        gamma_max = self.away_gamma_max(v)
        if gamma < 0 or gamma > gamma_max * (1 + 1e-12):
            raise ContractError(f"away step {gamma} outside [0, {gamma_max}]")
        if gamma == 0.0:
            return "good"
        dropped = _same_step(gamma, gamma_max)
        for k in self._weights:
            self._weights[k] *= 1.0 + gamma
        if dropped:
            del self._weights[v.key]
            del self._atoms[v.key]
        else:
            self._weights[v.key] -= gamma
        self.iterate *= 1.0 + gamma
        v.add_to(self.iterate, -gamma)
        pruned = self._hygiene() or dropped
        self._tick(pruned)
        return "drop" if dropped else "good"

    def pairwise_step(self, s: Atom, v: Atom, gamma: float) -> str:
        if v.key not in self._weights:
            raise ContractError("away atom is not in the active set")
        gamma_max = self._weights[v.key]
        if gamma < 0 or gamma > gamma_max * (1 + 1e-12):
            raise ContractError(f"pairwise step {gamma} outside [0, {gamma_max}]")
        if gamma == 0.0 or s.key == v.key:
            return "good"
        was_present = s.key in self._weights
        dropped = _same_step(gamma, gamma_max)
        self._atoms.setdefault(s.key, s)
        self._weights[s.key] = self._weights.get(s.key, 0.0) + gamma
        if dropped:
            del self._weights[v.key]
            del self._atoms[v.key]
        else:
            self._weights[v.key] -= gamma
        s.add_to(self.iterate, gamma)
        v.add_to(self.iterate, -gamma)
        pruned = self._hygiene() or dropped
        self._tick(pruned)
        if not dropped:
            return "good"
        return "drop" if was_present else "swap"


def _same_step(gamma: float, gamma_max: float) -> bool:
    return abs(gamma - gamma_max) <= 1e-12 * max(abs(gamma_max), 1e-300)


def apply_fw_step(S: ActiveSet, s: Atom, gamma: float) -> ActiveSet:
    new = S.copy()
    new.fw_step(s, gamma)
    return new


def apply_away_step(S: ActiveSet, v: Atom, gamma: float, gamma_max: float | None = None):
    """Copying away step; ``gamma_max`` defaults to ``alpha_v / (1 - alpha_v)``."""
    if v not in S:
        raise ContractError("away atom is not in the active set")
    new = S.copy()
    if gamma_max is not None and _same_step(gamma, gamma_max):
        gamma = new.away_gamma_max(v)
    return new, new.away_step(v, gamma)


def apply_pairwise_step(S: ActiveSet, s: Atom, v: Atom, gamma: float):
    new = S.copy()
    return new, new.pairwise_step(s, v, gamma)


# ---------------------------------------------------------------------------
# configuration and traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 1000
    tol: float = 0.0
    lmo_quality: float = 1.0
    tau: float = 2.0
    eta: float = 0.9
    init_lipschitz: Optional[float] = None
    rng_seed: int = 0
    warm_start: bool = True
    max_backtracks: int = 100

    def __post_init__(self):
        if not self.tau > 1:
            raise ContractError(f"tau must be > 1, got {self.tau}")
        if not 0 < self.eta <= 1:
            raise ContractError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0 < self.lmo_quality <= 1:
            raise ContractError(f"lmo_quality must lie in (0, 1], got {self.lmo_quality}")
        if not self.tol >= 0:
            raise ContractError(f"tol must be >= 0, got {self.tol}")
        if self.init_lipschitz is not None and not self.init_lipschitz > 0:
            raise ContractError("init_lipschitz must be positive")
        if self.max_iter < 0:
            raise ContractError("max_iter must be >= 0")


@dataclass
class StepOutcome:
    direction: np.ndarray
    pairing_gap: float
    gamma: float
    gamma_max: float
    classification: str
    backtrack_evals: int
    lipschitz: float
    d_norm_sq: float = 0.0
    f_current: float = math.nan
    f_next: float = math.nan

    @property
    def is_bad(self) -> bool:
        return self.classification in ("drop", "swap")


@dataclass
class TraceRecord:
    iter: int
    elapsed: float
    objective: float
    gap: float
    dual_gap: Optional[float]
    step_size: float
    lipschitz: float
    step_type: str
    n_backtracks: int
    good_steps: int
    avg_lipschitz: Optional[float]
    max_lipschitz: Optional[float]
    pairing_gap: float = math.nan
    gamma_max: float = math.nan
