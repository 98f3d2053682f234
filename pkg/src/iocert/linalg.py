"""Dense subspace geometry: orthonormal bases, kernels, principal correlations.

Subspaces of R^n are carried as orthonormal column bases. A zero-dimensional
subspace is an ``(n, 0)`` array, so the trivial subspace flows through every
routine without special cases.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError

#: Default relative rank tolerance (multiplied by the largest singular value).
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^n stored as an orthonormal column basis.

    Parameters
    ----------
    basis : ndarray, shape (n, d)
        Columns must be orthonormal. Use :func:`orthonormalize` to build one
        from arbitrary spanning vectors.
    """

    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2:
            raise ValueError("basis must be a 2-D array of column vectors")
        if not np.all(np.isfinite(basis)):
            raise ValueError("basis entries must be finite")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n):
        return cls(np.eye(n))

    @classmethod
    def coordinate(cls, n, indices):
        """Span of the canonical vectors ``e_i`` for ``i`` in ``indices``."""
        indices = sorted(indices)
        return cls(np.eye(n)[:, indices])

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def project(self, x):
        """Orthogonal projection of ``x`` (vector or columns) onto the subspace."""
        return self.basis @ (self.basis.T @ x)

    def residual(self, x):
        """Euclidean distance from ``x`` to the subspace."""
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol=1e-10):
        x = np.asarray(x, dtype=float)
        return self.residual(x) <= tol * max(1.0, float(np.linalg.norm(x)))

    def contains_subspace(self, other, tol=1e-10):
        _check_same_ambient(self, other)
        if other.dim == 0:
            return True
        gap = other.basis - self.project(other.basis)
        return bool(np.max(np.linalg.norm(gap, axis=0)) <= tol)

    def same_span(self, other, tol=1e-10):
        return (
            self.dim == other.dim
            and self.contains_subspace(other, tol)
            and other.contains_subspace(self, tol)
        )

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _check_same_ambient(U, W):
    if U.ambient_dim != W.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {U.ambient_dim} vs {W.ambient_dim}"
        )


def _fix_signs(Q):
    # Make the largest-magnitude entry of each column positive; SVD signs are
    # otherwise arbitrary and we want bit-stable bases.
    if Q.shape[1] == 0:
        return Q
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(Q.shape[1])])
    signs[signs == 0] = 1.0
    return Q * signs + 0.0  # + 0.0 turns -0.0 into 0.0


def _range_basis(A, tol):
    """Orthonormal basis of the column space of ``A`` with relative rank cutoff."""
    n = A.shape[0]
    if A.size == 0:
        return np.zeros((n, 0))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, 0))
    rank = int(np.sum(s > tol * s[0]))
    return _fix_signs(U[:, :rank])


def orthonormalize(vectors, ambient_dim=None, tol=RANK_TOL):
    """Orthonormal basis for the span of ``vectors``.

    Parameters
    ----------
    vectors : array_like, shape (count, n)
        One vector per row. May be empty if ``ambient_dim`` is given.
    ambient_dim : int, optional
        Required only when ``vectors`` is empty.
    tol : float
        Directions whose singular value falls below ``tol`` times the largest
        singular value are treated as numerically dependent and dropped.

    Returns
    -------
    Subspace
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        rows = vectors.astype(float)
    else:
        vectors = [np.asarray(v, dtype=float).ravel() for v in vectors]
        if not vectors:
            if ambient_dim is None:
                raise ValueError("ambient_dim is required for an empty family")
            return Subspace.zero(ambient_dim)
        lengths = {v.size for v in vectors}
        if len(lengths) != 1:
            raise DimensionMismatchError(f"vectors have differing lengths {sorted(lengths)}")
        rows = np.vstack(vectors)
    if ambient_dim is not None and rows.shape[1] != ambient_dim:
        raise DimensionMismatchError(
            f"vectors live in R^{rows.shape[1]}, expected R^{ambient_dim}"
        )
    return Subspace(_range_basis(rows.T, tol))


def kernel_basis(M, tol=RANK_TOL):
    """Orthonormal basis of ``ker(M)``.

    The numerical rank of ``M`` is the number of singular values above
    ``tol * sigma_max``; the kernel is spanned by the remaining right singular
    vectors.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    m, n = M.shape
    if m == 0 or not np.any(M):
        return Subspace.full(n)
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > tol * s[0]))
    return Subspace(_fix_signs(Vt[rank:].T.copy()))


def numerical_rank(M, tol=RANK_TOL):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def subspace_sum(U, W, tol=RANK_TOL):
    """Orthonormal basis of ``U + W``."""
    _check_same_ambient(U, W)
    stacked = np.hstack([U.basis, W.basis])
    return Subspace(_range_basis(stacked, tol))


def principal_vectors(U, W):
    """Largest principal correlation and a pair of unit vectors attaining it.

    Returns
    -------
    c : float
        Cosine of the smallest principal angle, clipped to ``[0, 1]``.
    u, w : ndarray or None
        Unit vectors ``u`` in ``U`` and ``w`` in ``W`` with ``<u, w> = c``.
        Both are ``None`` when either subspace is trivial.
    """
    _check_same_ambient(U, W)
    if U.dim == 0 or W.dim == 0:
        return 0.0, None, None
    A, s, Bt = np.linalg.svd(U.basis.T @ W.basis)
    c = float(np.clip(s[0], 0.0, 1.0))
    u = U.basis @ A[:, 0]
    w = W.basis @ Bt[0]
    u /= np.linalg.norm(u)
    w /= np.linalg.norm(w)
    return c, u, w


def principal_correlation(U, W):
    """Largest singular value of ``Q_U^T Q_W``, i.e. ``sup <u, w>`` over unit vectors."""
    return principal_vectors(U, W)[0]


def nearest_in_affine(x, N, W):
    """Point of the affine set ``x + N`` closest to the subspace ``W``.

    Solves ``min ||x - f - g||_2`` over ``f`` in ``N`` and ``g`` in ``W`` by
    least squares on the concatenated bases; the minimizer always exists
    because ``N + W`` is closed.

    Returns
    -------
    z : ndarray
        ``x - f``, a point of ``x + N``.
    dist : float
        ``d_2(z, W)``, which equals ``d_2(x + N, W)``.
    """
    x = np.asarray(x, dtype=float)
    _check_same_ambient(N, W)
    if x.shape != (N.ambient_dim,):
        raise DimensionMismatchError(f"x has shape {x.shape}, expected ({N.ambient_dim},)")
    B = np.hstack([N.basis, W.basis])
    if B.shape[1] == 0:
        return x.copy(), float(np.linalg.norm(x))
    coef, *_ = np.linalg.lstsq(B, x, rcond=None)
    f = N.basis @ coef[: N.dim]
    z = x - f
    return z, W.residual(z)
