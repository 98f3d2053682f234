"""Ideal decoders and an empirical instance-optimality harness.

``decode_noiseless`` returns the point of the measurement fiber ``x0 + ker M``
closest to the model. ``decode_robust`` minimizes the measurement misfit over
the model; for the M-norm this is the same as minimizing

    d_M(u, Sigma) + ||Mu - y|| / alpha

over all ``u``. Indeed, for ``v`` in ``Sigma``,

    ||u - v|| + ||M(u - v)|| / alpha + ||Mu - y|| / alpha >= ||Mv - y|| / alpha

by the triangle inequality, with equality at ``u = v``. So the global
minimum is attained on the model and reduces to one least-squares problem
per component.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .exceptions import DimensionMismatchError, NotOntoError, UnsupportedModelError
from .linalg import kernel_basis, nearest_in_affine, numerical_rank
from .models import (
    MAX_COMPONENTS,
    LowRank,
    PointCloud,
    enumerate_components,
    project_model,
    sample_model,
)
from .norms import L2, MNorm, eval_norm, m_distance_to_model, noisy_anchor_bound

TIE_TOL = 1e-12


@dataclass
class DecodeResult:
    """Decoder output.

    ``x_hat`` is the estimate, ``component`` the index of the winning model
    component (point index for point clouds), ``residual`` is
    ``||M x_hat - y||``. For the noiseless decoder ``objective`` is the
    distance from ``x_hat`` to the model and ``model_point`` the nearest model
    element; for the robust decoders ``objective = residual / alpha``.
    """

    x_hat: np.ndarray
    component: int
    objective: float
    residual: float
    delta_slack: float = 0.0
    model_point: np.ndarray = None
    noise_level: float = None


def _setup(y, M, model):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if y.size != M.shape[0]:
        raise DimensionMismatchError(f"y has length {y.size}, M has {M.shape[0]} rows")
    if M.shape[1] != model.ambient_dim:
        raise DimensionMismatchError(
            f"M has {M.shape[1]} columns, model lives in R^{model.ambient_dim}"
        )
    if isinstance(model, LowRank):
        raise UnsupportedModelError("ideal decoders need a finite union of subspaces or points")
    return y, M


def _argmin(values):
    """Index of the smallest value; earlier indices win ties within TIE_TOL."""
    best = 0
    for i, v in enumerate(values):
        if v < values[best] - TIE_TOL:
            best = i
    return best


def decode_noiseless(y, M, model, tol=1e-10, max_count=MAX_COMPONENTS):
    """Point of ``{z : Mz = y}`` closest to the model in l2.

    Raises
    ------
    NotOntoError
        If ``M`` does not have full row rank.
    """
    y, M = _setup(y, M, model)
    if numerical_rank(M, tol) < M.shape[0]:
        raise NotOntoError(f"M has rank {numerical_rank(M, tol)} < {M.shape[0]} rows")
    x0 = np.linalg.pinv(M) @ y
    N = kernel_basis(M, tol)

    if isinstance(model, PointCloud):
        diffs = model.points - x0
        along = (diffs @ N.basis) @ N.basis.T
        dists = np.linalg.norm(diffs - along, axis=1)
        i = _argmin(list(dists))
        z = x0 + along[i]
        point = np.array(model.points[i])
    else:
        comps = enumerate_components(model, max_count)
        fits = ordered_map(lambda V: nearest_in_affine(x0, N, V), comps)
        i = _argmin([d for _, d in fits])
        z, _ = fits[i]
        point = comps[i].project(z)
        dists = [d for _, d in fits]
    return DecodeResult(
        x_hat=z,
        component=i,
        objective=float(dists[i]),
        residual=float(np.linalg.norm(M @ z - y)),
        model_point=point,
    )


def decode_robust(y, M, model, alpha, max_count=MAX_COMPONENTS):
    """Model element with the smallest measurement residual.

    ``alpha`` should be a lower RIP constant of ``M`` on ``Sigma - Sigma``;
    it only scales the reported objective.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    y, M = _setup(y, M, model)
    if isinstance(model, PointCloud):
        cands = list(model.points)
    else:
        comps = enumerate_components(model, max_count)

        def fit(V):
            b, *_ = np.linalg.lstsq(M @ V.basis, y, rcond=None)
            return V.basis @ b

        cands = ordered_map(fit, comps)
    residuals = [float(np.linalg.norm(M @ c - y)) for c in cands]
    i = _argmin(residuals)
    x_hat = np.array(cands[i], dtype=float)
    return DecodeResult(
        x_hat=x_hat,
        component=i,
        objective=residuals[i] / alpha,
        residual=residuals[i],
        model_point=x_hat,
    )


def decode_noise_aware(y, epsilon, M, model, alpha, max_count=MAX_COMPONENTS):
    """Robust decoder that records a declared noise bound ``||e|| <= epsilon``.

    The estimate does not depend on ``epsilon``.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    res = decode_robust(y, M, model, alpha, max_count)
    res.noise_level = float(epsilon)
    return res


# ---------------------------------------------------------------------------
# harness


@dataclass
class IOReport:
    """Outcome of an instance-optimality run.

    Ratios are ``lhs / (rhs + atol)`` so that ``violations`` is empty exactly
    when ``max_ratio <= 1``. ``anchor_*`` fields refer to the per-instance
    bound ``min_z ||x - z|| + (2/alpha)||M(x - z) + e||`` and are only filled
    when ``alpha`` is given.
    """

    trials: int
    max_ratio: float
    bound_constant: tuple
    violations: list
    seed: int
    anchor_max_ratio: float = None
    anchor_violations: list = field(default_factory=list)
    rows: list = field(default_factory=list)


SAMPLERS = ("gaussian", "model", "near")


def draw_signal(model, rng, sampler="gaussian", spread=0.1):
    """Random test signal: Gaussian, on the model, or a noisy model point."""
    n = model.ambient_dim
    if sampler == "gaussian":
        return rng.standard_normal(n)
    if sampler == "model":
        return sample_model(model, rng)
    if sampler == "near":
        return sample_model(model, rng) + spread * rng.standard_normal(n)
    raise ValueError(f"sampler must be one of {SAMPLERS}")


def _model_distance(x, model, spec, tol):
    if isinstance(spec, L2):
        return project_model(x, model).distance
    if isinstance(spec, MNorm):
        return m_distance_to_model(x, model, spec.M, spec.alpha, tol=tol).value
    raise ValueError("model distance must be l2 or an M-norm")


def _decode(decoder, y):
    out = decoder(y)
    return out.x_hat if isinstance(out, DecodeResult) else np.asarray(out, dtype=float)


def _ratio(lhs, rhs, atol):
    return lhs / (rhs + atol) if lhs > 0 else 0.0


def io_harness(
    decoder,
    M,
    model,
    error_norm=None,
    model_distance=None,
    constants=(1.0, 0.0),
    trials=1000,
    noise_scale=0.0,
    seed=0,
    sampler="gaussian",
    alpha=None,
    planted=(),
    delta=0.0,
    atol=1e-9,
    tol=1e-8,
):
    """Check ``||x - decoder(Mx + e)|| <= C1 d(x, Sigma) + C2 ||e|| + delta`` on random trials.

    Parameters
    ----------
    decoder : callable
        Maps ``y`` to a :class:`DecodeResult` or an array.
    error_norm, model_distance : norm specs
        Default to l2. ``model_distance`` may be an :class:`~iocert.norms.MNorm`.
    noise_scale : float or sequence of float
        Standard deviation of Gaussian noise; a sequence cycles through levels.
    planted : iterable of (x, e)
        Extra trials evaluated after the random ones.
    alpha : float, optional
        Also evaluate the per-instance anchor bound with this lower RIP constant.

    Each trial draws from its own generator spawned from ``seed``, so the
    report does not depend on thread scheduling.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    error_norm = L2() if error_norm is None else error_norm
    model_distance = L2() if model_distance is None else model_distance
    C1, C2 = (float(c) for c in constants)
    scales = np.atleast_1d(np.asarray(noise_scale, dtype=float))
    m = M.shape[0]

    children = np.random.SeedSequence(seed).spawn(trials)
    cases = []
    for t, child in enumerate(children):
        rng = np.random.default_rng(child)
        x = draw_signal(model, rng, sampler)
        s = scales[t % scales.size]
        e = s * rng.standard_normal(m) if s > 0 else np.zeros(m)
        cases.append((x, e))
    for x, e in planted:
        cases.append((np.asarray(x, dtype=float), np.asarray(e, dtype=float)))

    def run(case):
        x, e = case
        x_hat = _decode(decoder, M @ x + e)
        lhs = eval_norm(x - x_hat, error_norm)
        d = _model_distance(x, model, model_distance, tol)
        enorm = float(np.linalg.norm(e))
        rhs = C1 * d + C2 * enorm + delta
        anchor = None
        if alpha is not None:
            anchor = noisy_anchor_bound(x, e, model, M, alpha, tol=tol).value + delta
        return lhs, rhs, anchor, d, enorm

    results = ordered_map(run, cases)
    max_ratio, viol = 0.0, []
    anchor_ratio, anchor_viol = (0.0 if alpha is not None else None), []
    rows = []
    for (x, e), (lhs, rhs, anchor, d, enorm) in zip(cases, results):
        max_ratio = max(max_ratio, _ratio(lhs, rhs, atol))
        if lhs > rhs + atol:
            viol.append((x, e, lhs, rhs))
        if anchor is not None:
            anchor_ratio = max(anchor_ratio, _ratio(lhs, anchor, atol))
            if lhs > anchor + atol:
                anchor_viol.append((x, e, lhs, anchor))
        rows.append((lhs, rhs, anchor, d, enorm))
    return IOReport(
        trials=len(cases),
        max_ratio=max_ratio,
        bound_constant=(C1, C2),
        violations=viol,
        seed=seed,
        anchor_max_ratio=anchor_ratio,
        anchor_violations=anchor_viol,
        rows=rows,
    )


@dataclass
class NoiseConstants:
    """Empirical constants of a noise-aware decoder.

    ``C1`` is the largest observed ``error / d(x, Sigma)`` without noise and
    ``C2`` the largest ``(error - C1 d) / epsilon`` over the noisy runs.
    """

    C1: float
    C2: float
    levels: tuple
    trials: int


def _sphere(rng, m, radius):
    v = rng.standard_normal(m)
    return radius * v / np.linalg.norm(v)


def measure_noise_aware_constants(
    M, model, alpha, levels=(0.01, 0.1, 1.0), trials=200, seed=0, sampler="near"
):
    """Measure ``(C1, C2)`` from noise-aware decoding runs.

    Noisy trials use noise of norm exactly ``epsilon`` (the worst case of
    ``||e|| <= epsilon`` for a fixed direction).
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    m = M.shape[0]
    children = np.random.SeedSequence(seed).spawn(trials * (1 + len(levels)))
    draws = [np.random.default_rng(c) for c in children]

    def err(x, e, eps):
        res = decode_noise_aware(M @ x + e, eps, M, model, alpha)
        return float(np.linalg.norm(x - res.x_hat))

    clean = []
    for rng in draws[:trials]:
        x = draw_signal(model, rng, sampler)
        clean.append((err(x, np.zeros(m), 0.0), project_model(x, model).distance))
    C1 = 0.0
    for e_val, d in clean:
        if d > 0:
            C1 = max(C1, e_val / d)
        elif e_val > 1e-9:
            C1 = math.inf

    C2 = 0.0
    rest = draws[trials:]
    for li, eps in enumerate(levels):
        for rng in rest[li * trials:(li + 1) * trials]:
            x = draw_signal(model, rng, sampler)
            e = _sphere(rng, m, eps)
            d = project_model(x, model).distance
            C2 = max(C2, (err(x, e, eps) - C1 * d) / eps)
    return NoiseConstants(C1, C2, tuple(levels), trials)


__all__ = [
    "DecodeResult",
    "IOReport",
    "NoiseConstants",
    "decode_noise_aware",
    "decode_noiseless",
    "decode_robust",
    "draw_signal",
    "io_harness",
    "measure_noise_aware_constants",
]
