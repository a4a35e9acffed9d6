"""Smooth objectives with gradients, and conjugates where they are cheap."""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .oracles import operator_norm_sq


class InputError(ValueError):
    pass


class Objective:
    """Base class. Subclasses provide ``value`` and ``gradient``.

    ``lipschitz`` is the known (or estimated) gradient Lipschitz constant, or
    None. ``conjugate`` raises NotImplementedError unless ``has_conjugate``.
    """

    shape: tuple
    lipschitz: Optional[float] = None
    has_conjugate = False

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def value_and_grad(self, x):
        return self.value(x), self.gradient(x)

    def conjugate(self, u) -> float:
        raise NotImplementedError(f"{type(self).__name__} has no closed-form conjugate")


class Quadratic(Objective):
    """``f(x) = 1/2 x^T Q x - b^T x + c``."""

    def __init__(self, Q, b, c: float = 0.0):
        Q = np.asarray(Q, dtype=float)
        b = np.asarray(b, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] != b.size:
            raise InputError(f"incompatible shapes Q{Q.shape}, b{b.shape}")
        if not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise InputError("Q must be symmetric")
        eig = np.linalg.eigvalsh(Q)
        if eig[0] < -1e-10 * max(1.0, abs(eig[-1])):
            raise InputError("Q must be positive semidefinite")
        self.Q, self.b, self.c = Q, b, float(c)
        self.shape = (b.size,)
        self.lipschitz = float(eig[-1])
        self.mu = float(max(eig[0], 0.0))
        self.has_conjugate = eig[0] > 1e-12 * max(1.0, eig[-1])
        self._chol = np.linalg.cholesky(Q) if self.has_conjugate else None

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (self.Q @ x) - self.b @ x + self.c)

    def gradient(self, x) -> np.ndarray:
        return self.Q @ np.asarray(x, dtype=float) - self.b

    def value_and_grad(self, x):
        x = np.asarray(x, dtype=float)
        Qx = self.Q @ x
        return float(0.5 * x @ Qx - self.b @ x + self.c), Qx - self.b

    def conjugate(self, u) -> float:
        if not self.has_conjugate:
            raise NotImplementedError("conjugate needs an invertible Q")
        w = np.asarray(u, dtype=float) + self.b
        y = np.linalg.solve(self._chol, w)
        return float(0.5 * y @ y - self.c)

    def minimizer(self) -> np.ndarray:
        return np.linalg.solve(self.Q, self.b)


def quadratic(Q, b, c: float = 0.0) -> Quadratic:
    return Quadratic(Q, b, c)


class LeastSquares(Objective):
    """``f(x) = 1/2 ||A x - b||^2`` evaluated through the residual."""

    def __init__(self, A, b):
        self.A = A if sp.issparse(A) else np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        if self.A.shape[0] != self.b.size:
            raise InputError("rows of A must match b")
        self.shape = (self.A.shape[1],)
        self.lipschitz = operator_norm_sq(self.A, n_iter=200)

    def value(self, x) -> float:
        r = self.A @ x - self.b
        return 0.5 * float(r @ r)

    def gradient(self, x) -> np.ndarray:
        return self.A.T @ (self.A @ x - self.b)

    def value_and_grad(self, x):
        r = self.A @ x - self.b
        return 0.5 * float(r @ r), self.A.T @ r


def least_squares(A, b) -> LeastSquares:
    return LeastSquares(A, b)


def logistic_loss(z, y):
    """``log(1 + exp(-y z))`` computed without overflow."""
    m = -np.asarray(y, dtype=float) * np.asarray(z, dtype=float)
    return np.log1p(np.exp(-np.abs(m))) + np.maximum(0.0, m)


class LogisticL2(Objective):
    """Mean logistic loss plus ``lam / 2 ||x||^2``; labels in {-1, +1}."""

    def __init__(self, A, b, lam: float):
        b = np.asarray(b, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise InputError("rows of A must match labels")
        if not np.all(np.isin(b, (-1.0, 1.0))):
            raise InputError("labels must be -1 or +1")
        if lam < 0:
            raise InputError("regularization must be non-negative")
        self.A = sp.csr_matrix(A) if sp.issparse(A) else np.asarray(A, dtype=float)
        self.b = b
        self.lam = float(lam)
        self.n = b.size
        self.shape = (A.shape[1],)
        self.lipschitz = operator_norm_sq(self.A) / (4.0 * self.n) + self.lam

    def value(self, x) -> float:
        z = self.A @ x
        return float(np.mean(logistic_loss(z, self.b)) + 0.5 * self.lam * (x @ x))

    def gradient(self, x) -> np.ndarray:
        return self.value_and_grad(x)[1]

    def value_and_grad(self, x):
        z = self.A @ x
        loss = float(np.mean(logistic_loss(z, self.b)) + 0.5 * self.lam * (x @ x))
        r = -self.b * expit(-self.b * z)
        grad = (self.A.T @ r) / self.n + self.lam * x
        return loss, np.asarray(grad).ravel()


def logistic_l2(A, b, lam: float) -> LogisticL2:
    return LogisticL2(A, b, lam)


def huber(a, xi: float = 1.0):
    a = np.asarray(a, dtype=float)
    abs_a = np.abs(a)
    return np.where(abs_a <= xi, 0.5 * a * a, xi * (abs_a - 0.5 * xi))


class HuberMatrix(Objective):
    """Mean Huber loss between observed entries and a matrix iterate."""

    def __init__(self, observed, shape, xi: float = 1.0):
        if not xi > 0:
            raise InputError("Huber threshold must be positive")
        obs = list(observed)
        if not obs:
            raise InputError("no observed entries")
        rows = np.array([o[0] for o in obs], dtype=np.int64)
        cols = np.array([o[1] for o in obs], dtype=np.int64)
        vals = np.array([o[2] for o in obs], dtype=float)
        m, n = shape
        if rows.min() < 0 or cols.min() < 0 or rows.max() >= m or cols.max() >= n:
            raise InputError("observed index outside the matrix shape")
        flat = rows * n + cols
        if np.unique(flat).size != flat.size:
            raise InputError("duplicate observed entries")
        self.rows, self.cols, self.vals = rows, cols, vals
        self.xi = float(xi)
        self.n = vals.size
        self.shape = (m, n)
        self.lipschitz = 1.0 / self.n

    def value(self, X) -> float:
        r = self.vals - X[self.rows, self.cols]
        return float(np.sum(huber(r, self.xi)) / self.n)

    def gradient(self, X) -> np.ndarray:
        r = self.vals - X[self.rows, self.cols]
        G = np.zeros(self.shape)
        G[self.rows, self.cols] = -np.clip(r, -self.xi, self.xi) / self.n
        return G


def huber_matrix(observed, shape, xi: float = 1.0) -> HuberMatrix:
    return HuberMatrix(observed, shape, xi)
