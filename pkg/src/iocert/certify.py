"""Feasibility certificates for a measurement matrix and a signal model.

The central quantity is the optimal l2/l2 null space constant

    D* = sup 1 / sqrt(1 - <h, z>^2)

over unit ``h`` in ``ker(M)`` and unit ``z`` in the cone generated by
``Sigma - Sigma``. For a finite union of subspaces the inner supremum is a
largest principal correlation, so D* is exact up to factorization error.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .exceptions import DimensionMismatchError
from .linalg import RANK_TOL, Subspace, kernel_basis, numerical_rank, principal_vectors
from .models import (
    MAX_COMPONENTS,
    LowRank,
    difference_table,
    enumerate_components,
)

#: Correlations at or above ``1 - CORRELATION_TOL`` are reported as D* = inf.
CORRELATION_TOL = 1e-12


def _as_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return M


def _check_operator(M, model):
    if M.shape[1] != model.ambient_dim:
        raise DimensionMismatchError(
            f"matrix has {M.shape[1]} columns, model lives in R^{model.ambient_dim}"
        )


def d_star_from_correlation(c, tol=CORRELATION_TOL):
    """``1 / sqrt(1 - c^2)``, or ``inf`` once ``c`` is within ``tol`` of one."""
    if c >= 1.0 - tol:
        return math.inf
    return 1.0 / math.sqrt(1.0 - c * c)


@dataclass
class NspConstant:
    """Optimal l2 NSP constant with the component that attains it.

    ``h`` (unit, in the kernel) and ``z`` (unit, in the worst difference
    component) realize the largest correlation. ``exact`` is False for
    low-rank models, where ``d_star`` is only a lower bound.
    """

    d_star: float
    worst_pair: tuple = None
    correlation: float = 0.0
    exact: bool = True
    h: np.ndarray = None
    z: np.ndarray = None
    component: int = None


def nsp_constant_l2(M, model, max_count=MAX_COMPONENTS, tol=RANK_TOL, restarts=20, seed=0):
    """Optimal l2/l2 NSP constant D* of ``M`` with respect to ``model``.

    By convention D* = 0 when ``ker(M)`` is trivial. Low-rank models are
    delegated to :func:`lowrank_correlation_estimate` and flagged inexact.
    """
    M = _as_matrix(M)
    _check_operator(M, model)
    N = kernel_basis(M, tol)
    if N.dim == 0:
        return NspConstant(0.0)
    if isinstance(model, LowRank):
        est = lowrank_correlation_estimate(
            M, model.n1, model.n2, model.r, restarts=restarts, seed=seed, tol=tol
        )
        return NspConstant(est.d_star, None, est.correlation, False, est.h, est.z)

    table = difference_table(model, max_count)
    results = ordered_map(lambda dc: principal_vectors(N, dc.subspace), table)
    best = max(range(len(results)), key=lambda i: (results[i][0], -i))
    c, h, z = results[best]
    return NspConstant(d_star_from_correlation(c), table[best].pair, c, True, h, z, best)


@dataclass
class RipConstants:
    alpha: float
    beta: float
    exact: bool = True
    on: str = "difference"


def _restricted_extremes(M, W):
    if W.dim == 0:
        return math.inf, 0.0
    s = np.linalg.svd(M @ W.basis, compute_uv=False)
    smin = float(s[-1]) if s.size == W.dim else 0.0
    return smin, float(s[0])


def rip_constants(M, model, on="difference", max_count=MAX_COMPONENTS, restarts=10, seed=0):
    """Tightest ``alpha, beta`` with ``alpha ||z|| <= ||Mz|| <= beta ||z||``.

    Parameters
    ----------
    on : {"difference", "model"}
        Restrict ``z`` to the cone of ``Sigma - Sigma`` or to ``Sigma`` itself.

    Notes
    -----
    For low-rank models the extremes over rank-constrained matrices are
    estimated by projected power iterations: the returned ``alpha`` is an
    upper bound and ``beta`` a lower bound on the true constants, and
    ``exact`` is False.
    """
    if on not in ("difference", "model"):
        raise ValueError("on must be 'difference' or 'model'")
    M = _as_matrix(M)
    _check_operator(M, model)
    if isinstance(model, LowRank):
        rank = model.r if on == "model" else min(2 * model.r, model.n1, model.n2)
        if rank == min(model.n1, model.n2):
            a, b = _restricted_extremes(M, Subspace.full(model.ambient_dim))
            return RipConstants(a, b, True, on)
        a, b = _lowrank_rip(M, model.n1, model.n2, rank, restarts, seed)
        return RipConstants(a, b, False, on)

    if on == "model":
        comps = enumerate_components(model, max_count)
    else:
        comps = [dc.subspace for dc in difference_table(model, max_count)]
    extremes = ordered_map(lambda W: _restricted_extremes(M, W), comps)
    alpha = min(e[0] for e in extremes)
    beta = max(e[1] for e in extremes)
    if math.isinf(alpha):
        alpha = 0.0
    return RipConstants(alpha, beta, True, on)


def _truncate_rank(v, n1, n2, rank):
    U, s, Vt = np.linalg.svd(v.reshape(n1, n2), full_matrices=False)
    return ((U[:, :rank] * s[:rank]) @ Vt[:rank]).ravel()


def _lowrank_rip(M, n1, n2, rank, restarts, seed, iters=300):
    rng = np.random.default_rng(seed)
    G = M.T @ M
    L = float(np.linalg.eigvalsh(G)[-1]) if G.size else 0.0
    shifted = L * np.eye(G.shape[0]) - G
    alpha, beta = math.inf, 0.0
    for _ in range(restarts):
        for target, op in (("beta", G), ("alpha", shifted)):
            z = _truncate_rank(rng.standard_normal(n1 * n2), n1, n2, rank)
            z /= np.linalg.norm(z)
            for _ in range(iters):
                val = float(np.linalg.norm(M @ z))
                if target == "beta":
                    beta = max(beta, val)
                else:
                    alpha = min(alpha, val)
                w = _truncate_rank(op @ z, n1, n2, rank)
                nw = np.linalg.norm(w)
                if nw == 0.0:
                    break
                z = w / nw
    return alpha, beta


def frame_constant(vectors, V=None, unit_tol=1e-9, member_tol=1e-8):
    """Lower frame bound ``K`` of a unit-norm family on the subspace ``V``.

    ``K`` is the smallest eigenvalue of ``sum_i z_i z_i^T`` restricted to
    ``V``, the largest constant with ``sum_i <z_i, x>^2 >= K ||x||^2`` for all
    ``x`` in ``V``. ``V`` defaults to the whole space.
    """
    Z = np.atleast_2d(np.asarray(vectors, dtype=float))
    norms = np.linalg.norm(Z, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > unit_tol)
    if bad.size:
        raise ValueError(f"vectors {bad.tolist()} are not unit-norm")
    if V is None:
        V = Subspace.full(Z.shape[1])
    if V.ambient_dim != Z.shape[1]:
        raise DimensionMismatchError("vectors and subspace live in different spaces")
    coords = Z @ V.basis
    outside = np.linalg.norm(Z - coords @ V.basis.T, axis=1)
    if np.any(outside > member_tol):
        raise ValueError("every vector must lie in V")
    if V.dim == 0:
        return 0.0
    S = coords.T @ coords
    return max(0.0, float(np.linalg.eigvalsh(S)[0]))


def min_measurements(n, K, d_star):
    """Smallest measurement count compatible with NSP constant ``d_star``.

    Evaluates ``ceil(n * (1 - (1 - 1/d_star^2) / K))``, clipped at zero.
    """
    if K <= 0:
        raise ValueError("K must be positive")
    if d_star < 1:
        raise ValueError("d_star must be at least 1")
    inv = 0.0 if math.isinf(d_star) else 1.0 / (d_star * d_star)
    value = n * (1.0 - (1.0 - inv) / K)
    # absorb roundoff such as 1/sqrt(2)^2 = 0.5000000000000001
    return max(0, math.ceil(value - 1e-9))


def io_constant_lower_bound(n, m, K):
    """Smallest possible l2/l2 instance optimality constant with ``m`` measurements."""
    if not 0 < m <= n:
        raise ValueError("need 0 < m <= n")
    if K <= 0:
        raise ValueError("K must be positive")
    t = K * (1.0 - m / n)
    if t >= 1.0:
        return math.inf
    return 1.0 / math.sqrt(1.0 - t)


@dataclass
class NspCheckReport:
    max_ratio: float
    violations: list
    samples: int
    seed: int
    mode: str


def _unit_rows(A):
    norms = np.linalg.norm(A, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return A / norms


def nsp_check(
    M,
    model,
    mode="plain",
    constants=1.0,
    sample_count=10_000,
    seed=0,
    distance=None,
    planted=None,
    max_count=MAX_COMPONENTS,
    atol=1e-9,
):
    """Sampled check of the (robust) null space property.

    ``plain`` tests ``||h|| <= D d(h, Sigma - Sigma)`` for ``h`` in
    ``ker(M)``; ``robust`` tests ``||h|| <= D1 d(h, Sigma - Sigma) + D2 ||Mh||``
    for arbitrary ``h``. Distances to ``Sigma - Sigma`` are computed exactly
    per difference component, in l2 or, when ``distance`` is an
    :class:`~iocert.norms.MNorm`, in the M-norm.

    Random Gaussian directions are complemented by planted worst cases: the
    kernel direction attaining D* and the least-amplified direction of each
    difference component.
    """
    from .norms import L2, MNorm, m_distance_to_subspaces

    M = _as_matrix(M)
    _check_operator(M, model)
    if mode not in ("plain", "robust"):
        raise ValueError("mode must be 'plain' or 'robust'")
    if mode == "plain":
        D1, D2 = float(np.atleast_1d(constants)[0]), 0.0
    else:
        D1, D2 = (float(c) for c in constants)
    if not (math.isfinite(D1) and math.isfinite(D2)):
        raise ValueError("constants must be finite")
    distance = L2() if distance is None else distance

    n = model.ambient_dim
    rng = np.random.default_rng(seed)
    subs = [dc.subspace for dc in difference_table(model, max_count)]
    N = kernel_basis(M)

    if mode == "plain":
        if N.dim == 0:
            return NspCheckReport(0.0, [], 0, seed, mode)
        H = rng.standard_normal((sample_count, N.dim)) @ N.basis.T
    else:
        H = rng.standard_normal((sample_count, n))
    extra = []
    nsp = nsp_constant_l2(M, model, max_count)
    if nsp.h is not None:
        extra.append(nsp.h)
    if mode == "robust":
        for W in subs:
            if W.dim:
                _, _, Vt = np.linalg.svd(M @ W.basis)
                extra.append(W.basis @ Vt[-1][: W.dim] if Vt.shape[0] >= W.dim else W.basis[:, 0])
    if planted is not None:
        extra.extend(np.atleast_2d(np.asarray(planted, dtype=float)))
    if extra:
        H = np.vstack([H, np.vstack(extra)])
    H = _unit_rows(H)

    max_ratio = 0.0
    violations = []
    for h in H:
        if isinstance(distance, MNorm):
            d = m_distance_to_subspaces(h, subs, distance.M, distance.alpha).value
        elif isinstance(distance, L2):
            d = min(W.residual(h) for W in subs) if subs else float(np.linalg.norm(h))
        else:
            raise ValueError("nsp_check supports l2 and M-norm distances")
        lhs = float(np.linalg.norm(h))
        rhs = D1 * d + D2 * float(np.linalg.norm(M @ h))
        ratio = lhs / rhs if rhs > 0 else math.inf
        max_ratio = max(max_ratio, ratio)
        if lhs > rhs + atol:
            violations.append(h.copy())
    return NspCheckReport(max_ratio, violations, len(H), seed, mode)


@dataclass
class CorrelationEstimate:
    """Certified lower bound on ``sup <h, z>`` for a low-rank model.

    ``history`` holds, per restart, the sequence of correlations produced by
    the alternating steps; it is nondecreasing.
    """

    correlation: float
    d_star: float
    h: np.ndarray = None
    z: np.ndarray = None
    history: list = field(default_factory=list)


def lowrank_correlation_estimate(
    M, n1, n2, r, restarts=20, seed=0, max_iter=500, tol=RANK_TOL, callback=None
):
    """Alternating maximization of ``<h, z>`` over ``ker(M)`` and rank-2r matrices.

    Given ``h`` the best unit ``z`` of rank at most ``2r`` is the normalized
    truncated SVD of ``h`` (Eckart-Young); given ``z`` the best unit ``h`` is
    the normalized projection of ``z`` onto the kernel. Every iterate is
    feasible, so the result is a lower bound on the correlation and on D*.

    ``callback(h, z, c)``, if given, sees every iterate.
    """
    M = _as_matrix(M)
    if M.shape[1] != n1 * n2:
        raise DimensionMismatchError(f"matrix needs {n1 * n2} columns, has {M.shape[1]}")
    N = kernel_basis(M, tol)
    if N.dim == 0:
        return CorrelationEstimate(0.0, 0.0)
    rank = min(2 * r, n1, n2)
    rng = np.random.default_rng(seed)
    starts = [N.basis[:, j] for j in range(N.dim)]
    starts += [N.basis @ rng.standard_normal(N.dim) for _ in range(restarts)]

    best = CorrelationEstimate(-1.0, 0.0)
    for h in starts:
        h = h / np.linalg.norm(h)
        trace = []
        c_prev = -1.0
        for _ in range(max_iter):
            z = _truncate_rank(h, n1, n2, rank)
            nz = np.linalg.norm(z)
            if nz == 0.0:
                break
            z /= nz
            c = float(h @ z)
            trace.append(c)
            if callback is not None:
                callback(h, z, c)
            if c > best.correlation:
                best.correlation, best.h, best.z = c, h.copy(), z.copy()
            h_new = N.project(z)
            nh = np.linalg.norm(h_new)
            if nh == 0.0:
                break
            h = h_new / nh
            c = float(h @ z)
            trace.append(c)
            if callback is not None:
                callback(h, z, c)
            if c > best.correlation:
                best.correlation, best.h, best.z = c, h.copy(), z.copy()
            if c - c_prev <= 1e-15:
                break
            c_prev = c
        best.history.append(trace)
    best.correlation = float(np.clip(best.correlation, 0.0, 1.0))
    best.d_star = d_star_from_correlation(best.correlation)
    return best


@dataclass
class CertReport:
    """Everything :func:`certify` learns about ``(M, model)``."""

    d_star: float
    alpha: float
    beta: float
    worst_pair: tuple = None
    frame_K: float = None
    m_lower_bound: int = None
    io_lower_bound: float = None
    rank: int = None
    exact: bool = True
    tolerances: dict = field(default_factory=dict)


def _canonical_frame(model, max_count):
    """Canonical vectors if they all lie in the cone of ``Sigma - Sigma``, else None."""
    n = model.ambient_dim
    if isinstance(model, LowRank):
        return np.eye(n)  # every E_ij has rank one
    subs = [dc.subspace for dc in difference_table(model, max_count)]
    eye = np.eye(n)
    for i in range(n):
        if not any(W.contains(eye[i]) for W in subs):
            return None
    return eye


def certify(M, model, max_count=MAX_COMPONENTS, tol=RANK_TOL, frame_vectors=None, seed=0):
    """Compute D*, RIP constants and the dimension bounds in one report.

    ``alpha`` is the lower RIP constant on ``Sigma - Sigma`` and ``beta`` the
    upper one on ``Sigma``. The frame family defaults to the canonical basis
    when it lies in ``Sigma - Sigma`` (sparse, block-sparse covering all
    coordinates, low-rank).
    """
    M = _as_matrix(M)
    _check_operator(M, model)
    nsp = nsp_constant_l2(M, model, max_count, tol, seed=seed)
    lower = rip_constants(M, model, "difference", max_count, seed=seed)
    upper = rip_constants(M, model, "model", max_count, seed=seed)
    n = model.ambient_dim
    m = numerical_rank(M, tol)

    if frame_vectors is None:
        frame_vectors = _canonical_frame(model, max_count)
    K = frame_constant(frame_vectors) if frame_vectors is not None else None

    m_bound = io_bound = None
    if K is not None and K > 0:
        if nsp.d_star >= 1:
            m_bound = min_measurements(n, K, nsp.d_star)
        if m > 0:
            io_bound = io_constant_lower_bound(n, m, K)
    return CertReport(
        d_star=nsp.d_star,
        alpha=lower.alpha,
        beta=upper.beta,
        worst_pair=nsp.worst_pair,
        frame_K=K,
        m_lower_bound=m_bound,
        io_lower_bound=io_bound,
        rank=m,
        exact=nsp.exact and lower.exact and upper.exact,
        tolerances={"rank": tol, "correlation": CORRELATION_TOL},
    )


__all__ = [
    "CertReport",
    "CorrelationEstimate",
    "NspCheckReport",
    "NspConstant",
    "RipConstants",
    "certify",
    "d_star_from_correlation",
    "frame_constant",
    "io_constant_lower_bound",
    "lowrank_correlation_estimate",
    "min_measurements",
    "nsp_check",
    "nsp_constant_l2",
    "rip_constants",
]
