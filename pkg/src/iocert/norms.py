"""Norms attached to a measurement problem.

Besides the plain l1/l2 norms this module evaluates

* the M-norm ``||x||_M = ||x|| + ||Mx|| / alpha`` and the M-norm distance to
  a union of subspaces, solved per component by reweighted least squares
  and certified by an explicit dual bound;
* the atomic norm of the k-sparse model, i.e. the cheapest way of writing
  ``x`` as a sum of k-sparse pieces, solved by a primal-dual iteration with a
  duality-gap stopping rule;
* greedy decompositions and the two-sided sandwich around the atomic norm.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._parallel import ordered_map
from .exceptions import (
    ComponentOverflowError,
    ConvergenceError,
    DimensionMismatchError,
    UnsupportedModelError,
)
from .models import (
    MAX_COMPONENTS,
    KSparse,
    LowRank,
    PointCloud,
    enumerate_components,
)

# weight guard for exact fits in the reweighted iterations
IRLS_EPS = 1e-12


@dataclass(frozen=True)
class L2:
    pass


@dataclass(frozen=True)
class L1:
    pass


@dataclass(frozen=True, eq=False)
class MNorm:
    """``||x||_2 + ||Mx||_2 / alpha``."""

    M: np.ndarray
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "M", np.atleast_2d(np.asarray(self.M, dtype=float)))
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


@dataclass(frozen=True, eq=False)
class Atomic:
    model: object
    tol: float = 1e-6


@dataclass(frozen=True, eq=False)
class Task:
    """``inner(A x)``: a seminorm whenever ``A`` has a kernel."""

    A: np.ndarray
    inner: object = L2()

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, dtype=float)))
        if isinstance(self.inner, Atomic) and isinstance(self.inner.model, LowRank):
            raise UnsupportedModelError("the low-rank atomic norm has no exact evaluator")


def _vector(x, n=None):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        x = x.ravel()
    if n is not None and x.size != n:
        raise DimensionMismatchError(f"vector has length {x.size}, expected {n}")
    return x


def eval_norm(x, spec):
    """Evaluate the norm described by ``spec`` at ``x``."""
    x = _vector(x)
    if isinstance(spec, L2):
        return float(np.linalg.norm(x))
    if isinstance(spec, L1):
        return float(np.abs(x).sum())
    if isinstance(spec, MNorm):
        _vector(x, spec.M.shape[1])
        return float(np.linalg.norm(x) + np.linalg.norm(spec.M @ x) / spec.alpha)
    if isinstance(spec, Atomic):
        return atomic_norm(x, spec.model, spec.tol).value
    if isinstance(spec, Task):
        _vector(x, spec.A.shape[1])
        return eval_norm(spec.A @ x, spec.inner)
    raise TypeError(f"unknown norm spec {spec!r}")


def norm_from_dict(d, model=None):
    """Build a norm spec from its JSON form.

    ``{"kind": "mnorm", "M": [[...]], "alpha": 0.7}``, ``{"kind": "atomic"}``
    (needs ``model``), ``{"kind": "task", "A": ..., "inner": {...}}``.
    """
    kind = d.get("kind")
    if kind == "l2":
        return L2()
    if kind == "l1":
        return L1()
    if kind == "mnorm":
        return MNorm(np.asarray(d["M"], dtype=float), float(d["alpha"]))
    if kind == "atomic":
        if model is None:
            raise ValueError("atomic norm needs a model")
        return Atomic(model, float(d.get("tol", 1e-6)))
    if kind == "task":
        inner = norm_from_dict(d.get("inner", {"kind": "l2"}), model)
        return Task(np.asarray(d["A"], dtype=float), inner)
    raise ValueError(f"unknown norm kind {kind!r}")


# ---------------------------------------------------------------------------
# M-norm distance


@dataclass
class MDistance:
    """Result of an M-norm distance computation.

    ``value`` is the certified minimum (within ``gap``), ``lower`` the dual
    bound, ``upper_bound`` the cheap value at the orthogonal projection and
    ``point`` the minimizing model element.
    """

    value: float
    upper_bound: float
    lower: float
    gap: float
    point: np.ndarray
    component: int = None


def _two_term_min(x, Q, M, c, g, tol, max_iter):
    """Minimize ``||x - Qb|| + c ||g - MQb||`` over ``b``.

    Returns ``(value, lower, b, cheap)``. The lower bound comes from the dual
    problem ``max <u, x> + <v, g>`` over ``||u|| <= 1``, ``||v|| <= c``,
    ``Q^T u + (MQ)^T v = 0``; any primal iterate suggests a dual point which
    is projected onto the constraint and rescaled into the balls.
    """
    G = M @ Q
    d = Q.shape[1]

    def f(b):
        return float(np.linalg.norm(x - Q @ b) + c * np.linalg.norm(g - G @ b))

    b0 = Q.T @ x
    cheap = f(b0)
    if d == 0:
        return cheap, cheap, b0, cheap

    # stacked operator [Q; G] and a factorization to project duals onto its
    # left null space
    S = np.vstack([Q, G])
    Sq, _ = np.linalg.qr(S)
    n = x.size
    GtPinv = np.linalg.pinv(G.T)

    def dual(u, v):
        w = np.concatenate([u, v])
        w = w - Sq @ (Sq.T @ w)
        u, v = w[:n], w[n:]
        s = max(float(np.linalg.norm(u)), float(np.linalg.norm(v)) / c, 1.0)
        return float(u @ x + v @ g) / s

    def dual_from(b):
        r1, r2 = x - Q @ b, g - G @ b
        n1, n2 = np.linalg.norm(r1), np.linalg.norm(r2)
        cands = []
        u = r1 / n1 if n1 > 0 else np.zeros(n)
        v = c * r2 / n2 if n2 > 0 else np.zeros(g.size)
        cands.append(dual(u, v))
        if n1 > 0:
            # kink with exact measurement fit: v is the least-norm solution of G^T v = -Q^T u
            cands.append(dual(u, -GtPinv @ (Q.T @ u)))
        if n2 > 0:
            cands.append(dual(-Q @ (G.T @ v), v))
        return max(cands)

    candidates = [b0]
    # kink candidate: fit the measurements exactly, then get closest to x
    _, sg, Vt = np.linalg.svd(G, full_matrices=True)
    rank = int(np.sum(sg > 1e-12 * max(1.0, sg[0] if sg.size else 0.0)))
    bp, *_ = np.linalg.lstsq(G, g, rcond=None)
    Z = Vt[rank:].T
    candidates.append(bp + Z @ (Z.T @ (b0 - bp)))

    best_b = min(candidates, key=f)
    best = f(best_b)
    lower = max(dual_from(b) for b in candidates)

    b = b0.copy()
    for _ in range(max_iter):
        if best - lower <= tol * max(1.0, best):
            break
        r1 = np.linalg.norm(x - Q @ b)
        r2 = np.linalg.norm(g - G @ b)
        w1 = 1.0 / max(r1, IRLS_EPS)
        w2 = c / max(r2, IRLS_EPS)
        H = w1 * np.eye(d) + w2 * (G.T @ G)
        b = np.linalg.solve(H, w1 * (Q.T @ x) + w2 * (G.T @ g))
        val = f(b)
        if val < best:
            best, best_b = val, b.copy()
        lower = max(lower, dual_from(b))
    return best, lower, best_b, cheap


def _m_distance(x, subspaces, M, c, g, tol, max_iter):
    results = ordered_map(
        lambda W: _two_term_min(x, W.basis, M, c, g, tol, max_iter), subspaces
    )
    if not results:
        raise ValueError("model has no components")
    i = min(range(len(results)), key=lambda j: (results[j][0], j))
    value, _, b, _ = results[i]
    lower = min(r[1] for r in results)
    cheap = min(r[3] for r in results)
    gap = value - lower
    if gap > tol * max(1.0, value):
        raise ConvergenceError(
            f"M-norm distance not certified: gap {gap:.3e} > tol {tol:.1e}",
            best_value=value,
            gap=gap,
        )
    return MDistance(value, cheap, lower, max(gap, 0.0), subspaces[i].basis @ b, i)


def _check_m(x, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    x = _vector(x, M.shape[1])
    return x, M


def m_distance_to_subspaces(x, subspaces, M, alpha, tol=1e-8, max_iter=2000):
    """M-norm distance from ``x`` to the union of the given subspaces."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    x, M = _check_m(x, M)
    return _m_distance(x, list(subspaces), M, 1.0 / alpha, M @ x, tol, max_iter)


def _point_cloud_distance(x, model, M, c, g):
    vals = [
        float(np.linalg.norm(x - p) + c * np.linalg.norm(g - M @ p)) for p in model.points
    ]
    i = int(np.argmin(vals))
    return MDistance(vals[i], vals[i], vals[i], 0.0, np.array(model.points[i]), i)


def m_distance_to_model(x, model, M, alpha, tol=1e-8, max_iter=2000, max_count=MAX_COMPONENTS):
    """``min over v in Sigma of ||x - v||_2 + ||M(x - v)||_2 / alpha``.

    Each component is a convex problem in the coordinates of the subspace.
    It is solved by reweighted least squares with weights
    ``1 / max(||r||, 1e-12)`` and stopped once a dual lower bound certifies
    the value to ``tol`` (relative to ``max(1, value)``).

    Raises
    ------
    ConvergenceError
        If the certificate is not reached within ``max_iter`` iterations;
        the exception carries the best value found.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    x, M = _check_m(x, M)
    if isinstance(model, PointCloud):
        return _point_cloud_distance(x, model, M, 1.0 / alpha, M @ x)
    comps = enumerate_components(model, max_count)
    return _m_distance(x, comps, M, 1.0 / alpha, M @ x, tol, max_iter)


def noisy_anchor_bound(x, e, model, M, alpha, tol=1e-8, max_iter=2000, max_count=MAX_COMPONENTS):
    """``min over z in Sigma of ||x - z||_2 + (2/alpha) ||M(x - z) + e||_2``.

    This per-instance bound on the robust decoder error is never larger than
    ``2 d_M(x, Sigma) + (2/alpha) ||e||``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    x, M = _check_m(x, M)
    e = _vector(e, M.shape[0])
    g = M @ x + e
    if isinstance(model, PointCloud):
        return _point_cloud_distance(x, model, M, 2.0 / alpha, g)
    comps = enumerate_components(model, max_count)
    return _m_distance(x, comps, M, 2.0 / alpha, g, tol, max_iter)


# ---------------------------------------------------------------------------
# atomic norm


@dataclass
class Decomposition:
    """``x`` written as a sum of model-cone pieces."""

    pieces: list
    residual: float
    value: float


@dataclass
class AtomicResult:
    value: float
    decomposition: Decomposition
    dual: np.ndarray
    lower: float
    gap: float
    iterations: int = 0


def top_k_norm(w, k):
    """Largest l2 norm of ``w`` restricted to ``k`` coordinates (the dual norm)."""
    a = np.sort(np.abs(np.asarray(w, dtype=float)))[::-1][:k]
    return float(np.linalg.norm(a))


def atomic_norm(x, model, tol=1e-6, max_iter=200_000, check_every=25, max_count=MAX_COMPONENTS):
    """Atomic norm of ``x`` for the k-sparse model.

    Minimizes ``sum_S ||a_S||_2`` over families of vectors ``a_S`` supported
    on the size-k supports ``S`` with ``sum_S a_S = x``. The dual problem
    maximizes ``<x, w>`` subject to every k-subvector of ``w`` having norm at
    most one. Both are tracked by a Chambolle-Pock iteration; the returned
    value is primal feasible and the stopping rule is ``value - <x, w> <= tol``.

    Returns
    -------
    AtomicResult
        ``value``, the decomposition into k-sparse pieces, the dual witness
        ``w`` and the duality gap.
    """
    if isinstance(model, LowRank):
        raise UnsupportedModelError(
            "exact atomic norm is only available for KSparse; use sigma_norm_sandwich"
        )
    if not isinstance(model, KSparse):
        raise UnsupportedModelError(f"atomic norm not implemented for {type(model).__name__}")
    n, k = model.n, model.k
    x = _vector(x, n)
    count = math.comb(n, k)
    if count > max_count:
        raise ComponentOverflowError(count, max_count)

    supports = np.array(list(combinations(range(n), k)), dtype=int)
    L = math.comb(n - 1, k - 1)  # K K^T = L * I

    def K(a):
        out = np.zeros(n)
        np.add.at(out, supports, a)
        return out

    def value_of(a):
        return float(np.linalg.norm(a, axis=1).sum())

    def finish(a, w, it):
        a = a + (x - K(a))[supports] / L
        primal = value_of(a)
        s = top_k_norm(w, k)
        wd = w / s if s > 0 else w
        lower = float(x @ wd) if s > 0 else 0.0
        return a, primal, wd, lower

    if not np.any(x):
        zero = Decomposition([], 0.0, 0.0)
        return AtomicResult(0.0, zero, np.zeros(n), 0.0, 0.0, 0)

    tau = sigma = 0.99 / math.sqrt(L)
    a = np.zeros((len(supports), k))
    w = x / top_k_norm(x, k)
    a_bar = a.copy()
    best = None
    it = 0
    for it in range(1, max_iter + 1):
        # dual ascent on the equality constraint
        w = w + sigma * (x - K(a_bar))
        # primal: block soft threshold
        v = a + tau * w[supports]
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        shrink = np.maximum(0.0, 1.0 - tau / np.maximum(norms, 1e-300))
        a_new = shrink * v
        a_bar = 2.0 * a_new - a
        a = a_new
        if it % check_every == 0 or it == 1:
            af, primal, wd, lower = finish(a, w, it)
            if best is None or primal - lower < best[1] - best[3]:
                best = (af, primal, wd, lower)
            if primal - lower <= tol:
                break
    af, primal, wd, lower = best
    gap = primal - lower
    if gap > tol:
        raise ConvergenceError(
            f"atomic norm gap {gap:.3e} above tol {tol:.1e}", best_value=primal, gap=gap
        )
    pieces = []
    for S, coef in zip(supports, af):
        if np.linalg.norm(coef) > 0:
            p = np.zeros(n)
            p[S] = coef
            pieces.append(p)
    res = float(np.linalg.norm(x - sum(pieces))) if pieces else float(np.linalg.norm(x))
    return AtomicResult(primal, Decomposition(pieces, res, primal), wd, lower, max(gap, 0.0), it)


# ---------------------------------------------------------------------------
# greedy bounds


@dataclass
class GreedyResult:
    """Sorted greedy decomposition.

    ``value`` is the decomposition cost ``sum_j ||x_j||_2``; ``upper_bound``
    is the coarser ``||x_1||_2 + sum_{j>=1} ||x_j||_1 / sqrt(k)`` (nuclear
    norms in the matrix case), which in turn is at most
    ``||x||_2 + ||x||_1 / sqrt(k)``.
    """

    decomposition: Decomposition
    upper_bound: float
    value: float = field(default=0.0)


def _model_sparsity(model):
    if isinstance(model, KSparse):
        return model.k
    if isinstance(model, LowRank):
        return model.r
    raise UnsupportedModelError("greedy bounds need a KSparse or LowRank model")


def greedy_decomposition(x, model):
    """Split ``x`` into blocks of its ``k`` largest entries (singular values)."""
    k = _model_sparsity(model)
    x = _vector(x, model.ambient_dim)
    if isinstance(model, KSparse):
        order = np.argsort(-np.abs(x), kind="stable")
        order = order[np.abs(x[order]) > 0]
        pieces, l1 = [], []
        for start in range(0, order.size, k):
            idx = order[start:start + k]
            p = np.zeros_like(x)
            p[idx] = x[idx]
            pieces.append(p)
            l1.append(float(np.abs(x[idx]).sum()))
    else:
        U, s, Vt = np.linalg.svd(x.reshape(model.n1, model.n2), full_matrices=False)
        s = s[s > 0]
        pieces, l1 = [], []
        for start in range(0, s.size, k):
            sl = slice(start, start + k)
            pieces.append(((U[:, sl] * s[sl]) @ Vt[sl]).ravel())
            l1.append(float(s[sl].sum()))
    if not pieces:
        return GreedyResult(Decomposition([], 0.0, 0.0), 0.0, 0.0)
    norms = [float(np.linalg.norm(p)) for p in pieces]
    bound = norms[0] + sum(l1) / math.sqrt(k)
    res = float(np.linalg.norm(x - np.sum(pieces, axis=0)))
    value = float(sum(norms))
    return GreedyResult(Decomposition(pieces, res, value), bound, value)


def sigma_norm_sandwich(x, model):
    """Interval ``(s/2, s)`` containing the atomic norm, ``s = ||x||_2 + ||x||_1/sqrt(k)``.

    For low-rank models the Frobenius and nuclear norms take the places of
    the l2 and l1 norms.
    """
    k = _model_sparsity(model)
    x = _vector(x, model.ambient_dim)
    if isinstance(model, KSparse):
        s = float(np.linalg.norm(x) + np.abs(x).sum() / math.sqrt(k))
    else:
        sv = np.linalg.svd(x.reshape(model.n1, model.n2), compute_uv=False)
        s = float(np.linalg.norm(sv) + sv.sum() / math.sqrt(k))
    return s / 2.0, s


__all__ = [
    "AtomicResult",
    "Atomic",
    "Decomposition",
    "GreedyResult",
    "L1",
    "L2",
    "MDistance",
    "MNorm",
    "Task",
    "atomic_norm",
    "eval_norm",
    "greedy_decomposition",
    "m_distance_to_model",
    "m_distance_to_subspaces",
    "noisy_anchor_bound",
    "norm_from_dict",
    "sigma_norm_sandwich",
    "top_k_norm",
]
