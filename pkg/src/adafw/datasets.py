"""Dataset readers/writers and seeded synthetic problem generators."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .objectives import InputError, huber_matrix, least_squares, logistic_l2, quadratic


class ParseError(ValueError):
    def __init__(self, message, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _label(token: str, lineno: int) -> float:
    try:
        y = float(token)
    except ValueError:
        raise ParseError(f"bad label {token!r}", lineno) from None
    return 1.0 if y > 0 else -1.0


def read_libsvm(path, n_features: Optional[int] = None):
    """Parse ``label idx:val ...`` lines into a CSR matrix and +-1 labels.

    Indices are 1-based in the file. Labels > 0 map to +1, others to -1.
    """
    indptr, indices, data, labels = [0], [], [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            labels.append(_label(tokens[0], lineno))
            last = 0
            for tok in tokens[1:]:
                idx, sep, val = tok.partition(":")
                if not sep:
                    raise ParseError(f"malformed token {tok!r}", lineno)
                try:
                    j, v = int(idx), float(val)
                except ValueError:
                    raise ParseError(f"malformed token {tok!r}", lineno) from None
                if j <= last:
                    raise ParseError(f"index {j} not ascending", lineno)
                last = j
                indices.append(j - 1)
                data.append(v)
            indptr.append(len(indices))
    width = max(indices, default=-1) + 1
    if n_features is not None:
        if n_features < width:
            raise InputError(f"file has {width} features, more than {n_features}")
        width = n_features
    A = sp.csr_matrix(
        (np.array(data, dtype=float), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(labels), width),
    )
    return A, np.array(labels)


def write_libsvm(path, A, b) -> None:
    A = sp.csr_matrix(A)
    A.sort_indices()
    with open(path, "w") as fh:
        for i in range(A.shape[0]):
            lo, hi = A.indptr[i], A.indptr[i + 1]
            parts = ["+1" if b[i] > 0 else "-1"]
            parts += [f"{j + 1}:{float(v)!r}" for j, v in zip(A.indices[lo:hi], A.data[lo:hi])]
            fh.write(" ".join(parts) + "\n")


_SEP = re.compile(r"::|,|\t")


def read_ratings(path):
    """Read ``user,item,rating`` (or ``::``-separated) triplets.

    User and item ids are reindexed to contiguous 0-based ids in sorted order.
    A non-numeric first line is taken as a header.
    """
    users, items, ratings = [], [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = _SEP.split(line)
            if len(parts) < 3:
                raise ParseError(f"expected user, item, rating in {line!r}", lineno)
            try:
                u, i, r = parts[0].strip(), parts[1].strip(), float(parts[2])
            except ValueError:
                if not ratings and lineno == 1:
                    continue
                raise ParseError(f"bad rating in {line!r}", lineno) from None
            users.append(u)
            items.append(i)
            ratings.append(r)
    uid = _reindex(users)
    iid = _reindex(items)
    pairs = set()
    out = []
    for a, b, r in zip(uid, iid, ratings):
        if (a, b) in pairs:
            raise InputError(f"duplicate rating for user {a}, item {b}")
        pairs.add((a, b))
        out.append((a, b, r))
    return out


def _reindex(ids):
    def sort_key(s):
        try:
            return (0, int(s), s)
        except ValueError:
            return (1, 0, s)

    mapping = {k: n for n, k in enumerate(sorted(set(ids), key=sort_key))}
    return [mapping[k] for k in ids]


def ratings_shape(triplets):
    return (max(t[0] for t in triplets) + 1, max(t[1] for t in triplets) + 1)


# ---------------------------------------------------------------------------
# synthetic problems
# ---------------------------------------------------------------------------


@dataclass
class Problem:
    kind: str
    objective: object
    data: dict = field(default_factory=dict)


def synth_problem(kind: str, dim: int = 20, n_samples: int = 100, seed: int = 0, **kw) -> Problem:
    if dim < 2:
        raise InputError("dim must be at least 2")
    rng = np.random.default_rng(seed)
    try:
        make = _MAKERS[kind]
    except KeyError:
        raise InputError(f"unknown problem kind {kind!r}") from None
    return make(rng, dim, n_samples, **kw)


def _l1_logistic(rng, dim, n_samples, support: int | None = None, offset: float = 1.0, noise: float = 0.5):
    # non-centred features give a large ||A||_op, like raw benchmark data
    support = support or max(1, dim // 10)
    A = rng.standard_normal((n_samples, dim)) + offset
    w = np.zeros(dim)
    idx = rng.choice(dim, size=support, replace=False)
    w[idx] = rng.choice([-1.0, 1.0], size=support) * rng.uniform(0.5, 1.5, size=support)
    z = (A - offset) @ w + noise * rng.standard_normal(n_samples)
    b = np.where(z >= 0, 1.0, -1.0)
    obj = logistic_l2(A, b, 1.0 / n_samples)
    return Problem("l1_logistic", obj, {"A": A, "b": b, "planted": w})


def _nuclear_huber(rng, dim, n_samples, rank: int = 3, observed: float = 0.3, noise: float = 0.1):
    m, n = n_samples, dim
    U = rng.standard_normal((m, rank))
    V = rng.standard_normal((n, rank))
    M = U @ V.T / np.sqrt(rank)
    mask = rng.random((m, n)) < observed
    rows, cols = np.nonzero(mask)
    vals = M[rows, cols] + noise * rng.standard_normal(rows.size)
    triplets = list(zip(rows.tolist(), cols.tolist(), vals.tolist()))
    obj = huber_matrix(triplets, (m, n), 1.0)
    return Problem("nuclear_huber", obj, {"planted": M, "observed": triplets})


def _simplex_quadratic(rng, dim, n_samples, face: int | None = None):
    # optimum built from KKT conditions: supported on `face` coordinates,
    # strictly positive multipliers on the rest
    face = face or dim // 2 + 1
    Mx = rng.standard_normal((dim, dim)) / np.sqrt(dim)
    Q = Mx.T @ Mx + 0.1 * np.eye(dim)
    x_star = np.zeros(dim)
    supp = np.sort(rng.choice(dim, size=face, replace=False))
    x_star[supp] = rng.uniform(0.5, 1.5, size=face)
    x_star /= x_star.sum()
    lam = np.zeros(dim)
    off = np.setdiff1d(np.arange(dim), supp)
    lam[off] = rng.uniform(0.2, 1.0, size=off.size)
    nu = rng.standard_normal()
    b = Q @ x_star + nu - lam
    obj = quadratic(Q, b)
    return Problem("simplex_quadratic", obj, {"Q": Q, "b": b, "x_star": x_star, "support": supp})


def _mp_leastsquares(rng, dim, n_samples):
    n = max(n_samples, dim)
    A = rng.standard_normal((n, dim)) / np.sqrt(n)
    x_true = rng.standard_normal(dim)
    b = A @ x_true + 0.1 * rng.standard_normal(n)
    obj = least_squares(A, b)
    return Problem("mp_leastsquares", obj, {"A": A, "b": b, "x_star": np.linalg.lstsq(A, b, rcond=None)[0]})


_MAKERS = {
    "l1_logistic": _l1_logistic,
    "nuclear_huber": _nuclear_huber,
    "simplex_quadratic": _simplex_quadratic,
    "mp_leastsquares": _mp_leastsquares,
}
