"""Explicit witnesses: orthonormal bases inside ``Sigma - Sigma``, decoder-breaking
point quadruples and the hyperbola example where a fiber never attains its
distance to the model.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .certify import nsp_constant_l2
from .exceptions import UnsupportedModelError
from .linalg import kernel_basis
from .models import MAX_COMPONENTS, LowRank, PointCloud, enumerate_components, project_model


@dataclass
class OnbWitness:
    """Orthonormal basis whose elements are differences of model elements.

    ``witness_pairs[i] = (z1, z2)`` with ``z1 - z2 = basis_elements[i]``;
    ``certificates[i]`` holds the per-element checks.
    """

    basis_elements: list
    witness_pairs: list
    certificates: list = field(default_factory=list)

    def gram(self):
        """Gram matrix ``<A, B> = sum conj(A) * B`` of the basis elements."""
        V = np.array([np.ravel(A) for A in self.basis_elements])
        return np.conj(V) @ V.T

    def vectors(self):
        """Basis elements flattened to rows (real part only for real bases)."""
        V = np.array([np.ravel(A) for A in self.basis_elements])
        return V.real if not np.iscomplexobj(V) or not np.any(V.imag) else V


def _nnz(A, tol=0.0):
    return int(np.count_nonzero(np.abs(A) > tol))


def spd_sparse_inverse_onb(n, k=None):
    """Orthonormal basis of symmetric matrices built from SPD matrices with sparse inverses.

    The basis is ``E_ii`` and ``(E_ij + E_ji)/sqrt(2)``. Each diagonal element
    is ``B_i - I`` with ``B_i = I + E_ii``, whose inverse ``I - E_ii/2`` has
    ``n`` nonzeros. Each off-diagonal element is ``(C_ij - 2I)/sqrt(2)`` with
    ``C_ij = 2I + E_ij + E_ji``, whose inverse
    ``I/2 + (E_ii + E_jj)/6 - (E_ij + E_ji)/3`` has ``n + 2`` nonzeros. The
    model of SPD matrices with at most ``k`` nonzeros in the inverse is a
    cone, so the scaled pair ``(C_ij/sqrt(2), sqrt(2) I)`` stays inside it.

    Parameters
    ----------
    n : int
        Matrix size, at least 2.
    k : int, optional
        Sparsity level of the inverse; must be at least ``n + 2`` (default).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    k = n + 2 if k is None else int(k)
    if k < n + 2:
        raise ValueError(f"the construction needs inverse sparsity k >= n + 2 = {n + 2}")
    eye = np.eye(n)
    elements, pairs, certs = [], [], []

    def E(i, j):
        A = np.zeros((n, n))
        A[i, j] = 1.0
        return A

    for i in range(n):
        B = eye + E(i, i)
        B_inv = eye - 0.5 * E(i, i)
        elements.append(E(i, i))
        pairs.append((B, eye.copy()))
        certs.append(
            {
                "kind": "diagonal",
                "index": (i, i),
                "inverse": B_inv,
                "inverse_nnz": _nnz(B_inv),
                "min_eigenvalue": float(np.linalg.eigvalsh(B)[0]),
                "product_error": float(np.max(np.abs(B @ B_inv - eye))),
            }
        )
    s2 = math.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            S = E(i, j) + E(j, i)
            C = 2.0 * eye + S
            C_inv = 0.5 * eye + (E(i, i) + E(j, j)) / 6.0 - S / 3.0
            elements.append(S / s2)
            pairs.append((C / s2, s2 * eye))
            certs.append(
                {
                    "kind": "offdiagonal",
                    "index": (i, j),
                    "inverse": C_inv,
                    "inverse_nnz": _nnz(C_inv),
                    "min_eigenvalue": float(np.linalg.eigvalsh(C)[0]),
                    "product_error": float(np.max(np.abs(C @ C_inv - eye))),
                }
            )
    w = OnbWitness(elements, pairs, certs)
    G = w.gram()
    for row, c in zip(G, certs):
        c["gram_row"] = row
    return w


def fourier_rank1_onb(n1, n2):
    """Rank-one orthonormal basis ``e_k f_l^*`` of ``n1 x n2`` complex matrices.

    ``e_k`` and ``f_l`` are the columns of the unitary DFT matrices. All
    entries have modulus ``1/sqrt(n1 n2)``, so the elements are as incoherent
    as possible; the certificates record the incoherence values against the
    bounds ``sqrt(mu r / n1)``, ``sqrt(mu r / n2)`` and ``sqrt(mu r / (n1 n2))``
    with ``mu = r = 1``.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("n1 and n2 must be positive")
    F1 = np.exp(2j * np.pi * np.outer(np.arange(n1), np.arange(n1)) / n1) / math.sqrt(n1)
    F2 = np.exp(2j * np.pi * np.outer(np.arange(n2), np.arange(n2)) / n2) / math.sqrt(n2)
    elements, pairs, certs = [], [], []
    for k in range(n1):
        for l in range(n2):
            u, v = F1[:, k], F2[:, l]
            A = np.outer(u, np.conj(v))
            elements.append(A)
            pairs.append((A, np.zeros_like(A)))
            certs.append(
                {
                    "index": (k, l),
                    "u_inf": float(np.max(np.abs(u))),
                    "v_inf": float(np.max(np.abs(v))),
                    "uv_inf": float(np.max(np.abs(A))),
                    "u_bound": math.sqrt(1.0 / n1),
                    "v_bound": math.sqrt(1.0 / n2),
                    "uv_bound": math.sqrt(1.0 / (n1 * n2)),
                }
            )
    w = OnbWitness(elements, pairs, certs)
    for row, c in zip(w.gram(), certs):
        c["gram_row"] = row
    return w


@dataclass
class AdversarialPair:
    """Four points defeating every decoder by a factor ``ratio_bound``.

    ``z1, z2`` lie in the model; ``p1, p2`` share one measurement, so any
    decoder returns the same estimate for both.
    """

    p1: np.ndarray
    p2: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    ratio_bound: float
    h: np.ndarray
    z: np.ndarray
    correlation: float


def adversarial_pair(M, model, D, max_count=MAX_COMPONENTS):
    """Build points on which any decoder has error ratio at least ``sqrt(D^2 - 1)``.

    Uses the kernel direction ``h`` and unit difference ``z = z1 - z2`` that
    realize the optimal NSP constant ``D*``; requires ``1 < D < D*``.
    """
    if not D > 1:
        raise ValueError("D must exceed 1")
    if isinstance(model, (LowRank, PointCloud)):
        raise UnsupportedModelError("adversarial pairs need a finite union of subspaces")
    M = np.atleast_2d(np.asarray(M, dtype=float))
    nsp = nsp_constant_l2(M, model, max_count)
    if not D < nsp.d_star:
        raise ValueError(f"D = {D} is not below the optimal NSP constant {nsp.d_star}")
    comps = enumerate_components(model, max_count)
    i, j = nsp.worst_pair
    Qi, Qj = comps[i].basis, comps[j].basis
    z = nsp.z
    coef, *_ = np.linalg.lstsq(np.hstack([Qi, -Qj]), z, rcond=None)
    z1 = Qi @ coef[: Qi.shape[1]]
    z2 = Qj @ coef[Qi.shape[1]:]
    N = kernel_basis(M)
    p = 0.5 * (z1 + z2)
    p1 = p + N.project(z1 - p)
    p2 = p + N.project(z2 - p)
    return AdversarialPair(p1, p2, z1, z2, math.sqrt(D * D - 1.0), nsp.h, z, nsp.correlation)


def decoder_ratios(pair, decoder, M, model, tol=1e-12):
    """Error-to-distance ratios of ``decoder`` on ``(p1, p2, z1, z2)``.

    A point of the model (distance below ``tol``) that is not recovered gets
    ratio ``inf``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    ratios = []
    for x in (pair.p1, pair.p2, pair.z1, pair.z2):
        out = decoder(M @ x)
        x_hat = getattr(out, "x_hat", out)
        err = float(np.linalg.norm(x - x_hat))
        d = project_model(x, model).distance
        if d > tol:
            ratios.append(err / d)
        else:
            ratios.append(math.inf if err > 1e-9 else 0.0)
    return ratios


# ---------------------------------------------------------------------------
# hyperbola


@dataclass
class HyperbolaRow:
    t: float
    distance: float
    vertical_gap: float
    foot: float


def _hyperbola_point_distance(t, x2):
    # stationary points a of (a - t)^2 + (1/a - x2)^2 solve a^4 - t a^3 + x2 a - 1 = 0
    roots = np.roots([1.0, -t, 0.0, x2, -1.0])
    best = (math.inf, math.nan)
    for r in roots:
        if abs(r.imag) > 1e-6 * max(1.0, abs(r)):
            continue
        a = float(r.real)
        for _ in range(3):
            f = a**4 - t * a**3 + x2 * a - 1.0
            fp = 4 * a**3 - 3 * t * a**2 + x2
            if fp == 0:
                break
            a -= f / fp
        if a <= 0:
            continue
        d = math.hypot(a - t, 1.0 / a - x2)
        if d < best[0]:
            best = (d, a)
    return best


def hyperbola_demo(x2=-1.0, t_grid=None):
    """Distance from the truncated line ``{(s, x2) : s <= t}`` to the hyperbola.

    The model is ``{(a, 1/a) : a > 0}`` and the measurement keeps only the
    second coordinate, so the fiber of ``(0, x2)`` is the horizontal line at
    height ``x2``. For ``x2 < 0`` the distance decreases strictly towards
    ``|x2|`` without reaching it, so no exact minimizer exists.

    Returns a list of :class:`HyperbolaRow`; ``vertical_gap`` is ``|1/t - x2|``,
    the distance straight up from ``(t, x2)``, an upper bound.
    """
    if t_grid is None:
        t_grid = [10.0**j for j in range(7)]
    t_grid = [float(t) for t in t_grid]
    if any(t <= 0 for t in t_grid):
        raise ValueError("t values must be positive")
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t values must be increasing")
    rows = []
    for t in t_grid:
        d, a = _hyperbola_point_distance(t, x2)
        # points (a, 1/a) with a <= t are reached vertically from (a, x2)
        vertical = 0.0 if x2 >= 1.0 / t else 1.0 / t - x2
        if vertical < d:
            d, a = vertical, (t if x2 < 1.0 / t else 1.0 / x2)
        rows.append(HyperbolaRow(t, d, abs(1.0 / t - x2), a))
    return rows


def hyperbola_svg(rows, x2, width=640, height=400):
    """Small standalone SVG plot of distance against ``log10 t``."""
    pad = 50
    ts = [math.log10(r.t) for r in rows]
    ds = [r.distance for r in rows]
    lo = min(ds + [abs(x2)])
    hi = max(ds)
    span_t = (max(ts) - min(ts)) or 1.0
    span_d = (hi - lo) or 1.0

    def xy(t, d):
        x = pad + (t - min(ts)) / span_t * (width - 2 * pad)
        y = height - pad - (d - lo) / span_d * (height - 2 * pad)
        return f"{x:.2f},{y:.2f}"

    points = " ".join(xy(t, d) for t, d in zip(ts, ds))
    base = f"{xy(min(ts), abs(x2))} {xy(max(ts), abs(x2))}"
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="100%" height="100%" fill="white"/>\n'
        f'<polyline points="{base}" fill="none" stroke="gray" stroke-dasharray="4 4"/>\n'
        f'<polyline points="{points}" fill="none" stroke="black" stroke-width="2"/>\n'
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">log10 t</text>\n'
        f'<text x="12" y="{height / 2}" transform="rotate(-90 12 {height / 2})" '
        f'text-anchor="middle">distance</text>\n'
        "</svg>\n"
    )


__all__ = [
    "AdversarialPair",
    "HyperbolaRow",
    "OnbWitness",
    "adversarial_pair",
    "decoder_ratios",
    "fourier_rank1_onb",
    "hyperbola_demo",
    "hyperbola_svg",
    "spd_sparse_inverse_onb",
]
