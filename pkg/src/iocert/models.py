"""Signal models: unions of subspaces, sparse and block-sparse vectors,
low-rank matrices and finite point clouds.

Every model lives in R^n (low-rank matrices are vectorized row-major, so
``n = n1 * n2``). Finite unions of subspaces can be enumerated component by
component, which is what the exhaustive certificates and ideal decoders need.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ComponentOverflowError, DimensionMismatchError, UnsupportedModelError
from .linalg import Subspace, orthonormalize, subspace_sum

MAX_COMPONENTS = 10_000
POINT_TOL = 1e-9


class Model:
    """Base class for signal models. Subclasses are immutable."""

    ambient_dim: int

    def is_union_of_subspaces(self):
        return isinstance(self, (UnionOfSubspaces, KSparse, BlockSparse))


@dataclass(frozen=True, eq=False)
class UnionOfSubspaces(Model):
    """Explicit finite union of subspaces sharing one ambient space."""

    subspaces: tuple

    def __post_init__(self):
        subs = tuple(self.subspaces)
        if not subs:
            raise ValueError("a union of subspaces needs at least one subspace")
        dims = {s.ambient_dim for s in subs}
        if len(dims) != 1:
            raise DimensionMismatchError(f"subspaces live in different spaces: {sorted(dims)}")
        object.__setattr__(self, "subspaces", subs)

    @classmethod
    def from_spanning_sets(cls, sets, ambient_dim=None):
        """Build from lists of spanning vectors (one list per subspace)."""
        return cls(tuple(orthonormalize(vs, ambient_dim=ambient_dim) for vs in sets))

    @property
    def ambient_dim(self):
        return self.subspaces[0].ambient_dim


@dataclass(frozen=True)
class KSparse(Model):
    """Vectors of R^n with at most ``k`` nonzero entries."""

    n: int
    k: int

    def __post_init__(self):
        if not 0 < self.k <= self.n:
            raise ValueError(f"need 0 < k <= n, got n={self.n}, k={self.k}")

    @property
    def ambient_dim(self):
        return self.n


@dataclass(frozen=True)
class BlockSparse(Model):
    """Vectors supported on at most ``k`` of the given disjoint index blocks."""

    n: int
    blocks: tuple
    k: int

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        seen = [i for b in blocks for i in b]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("blocks must be nonempty")
        if len(set(seen)) != len(seen):
            raise ValueError("blocks must be disjoint")
        if seen and (min(seen) < 0 or max(seen) >= self.n):
            raise ValueError(f"block indices must lie in [0, {self.n})")
        if not 0 < self.k <= len(blocks):
            raise ValueError(f"need 0 < k <= number of blocks ({len(blocks)}), got k={self.k}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def ambient_dim(self):
        return self.n


@dataclass(frozen=True)
class LowRank(Model):
    """``n1 x n2`` matrices of rank at most ``r``, vectorized row-major."""

    n1: int
    n2: int
    r: int

    def __post_init__(self):
        if not 1 <= self.r <= min(self.n1, self.n2):
            raise ValueError(f"need 1 <= r <= min(n1, n2), got r={self.r}")

    @property
    def ambient_dim(self):
        return self.n1 * self.n2


@dataclass(frozen=True, eq=False)
class PointCloud(Model):
    """Finite set of points, one per row of ``points``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] == 0:
            raise ValueError("a point cloud needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def ambient_dim(self):
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class DifferenceComponent:
    """One subspace of the cone generated by ``Sigma - Sigma``.

    ``pair = (i, j)`` says the subspace is ``V_i + V_j`` where the indices
    refer to :func:`enumerate_components` order (to point indices for a
    :class:`PointCloud`, where the subspace is the line through
    ``p_i - p_j``).
    """

    subspace: Subspace
    pair: tuple


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    point: np.ndarray
    distance: float
    component: object = None


def _check_count(count, max_count):
    if count > max_count:
        raise ComponentOverflowError(count, max_count)


def _dedupe(subspaces):
    kept = []
    for s in subspaces:
        if not any(s.same_span(t) for t in kept):
            kept.append(s)
    return kept


def enumerate_components(model, max_count=MAX_COMPONENTS):
    """All subspaces whose union is the model (or its cone, for point clouds).

    Sparse supports come out in lexicographic order, which the rest of the
    package relies on when it reports component indices.
    """
    if isinstance(model, UnionOfSubspaces):
        _check_count(len(model.subspaces), max_count)
        return list(model.subspaces)
    if isinstance(model, KSparse):
        _check_count(math.comb(model.n, model.k), max_count)
        return [
            Subspace.coordinate(model.n, S)
            for S in itertools.combinations(range(model.n), model.k)
        ]
    if isinstance(model, BlockSparse):
        _check_count(math.comb(len(model.blocks), model.k), max_count)
        return [
            Subspace.coordinate(model.n, [i for b in chosen for i in model.blocks[b]])
            for chosen in itertools.combinations(range(len(model.blocks)), model.k)
        ]
    if isinstance(model, PointCloud):
        _check_count(len(model.points), max_count)
        return _dedupe([orthonormalize([p]) for p in model.points])
    if isinstance(model, LowRank):
        raise UnsupportedModelError("low-rank models are not a finite union of subspaces")
    raise UnsupportedModelError(f"unknown model type {type(model).__name__}")


def _combination_difference_table(n_items, k, support_of, n, max_count):
    s = min(2 * k, n_items)
    _check_count(math.comb(n_items, k), max_count)
    _check_count(math.comb(n_items, s), max_count)
    index = {c: i for i, c in enumerate(itertools.combinations(range(n_items), k))}
    table = []
    for S in itertools.combinations(range(n_items), s):
        pair = (index[S[:k]], index[S[-k:]])
        table.append(DifferenceComponent(Subspace.coordinate(n, support_of(S)), pair))
    return table


def difference_table(model, max_count=MAX_COMPONENTS):
    """Subspaces covering the cone of ``Sigma - Sigma``, each tagged with its pair.

    For a union ``V_1 ... V_p`` these are the sums ``V_i + V_j``, with
    duplicates and subspaces contained in another one removed.
    """
    if isinstance(model, KSparse):
        return _combination_difference_table(
            model.n, model.k, lambda S: S, model.n, max_count
        )
    if isinstance(model, BlockSparse):
        blocks = model.blocks
        return _combination_difference_table(
            len(blocks), model.k, lambda S: [i for b in S for i in blocks[b]], model.n, max_count
        )
    if isinstance(model, PointCloud):
        L = len(model.points)
        _check_count(L * (L - 1) // 2, max_count)
        table = []
        for i, j in itertools.combinations(range(L), 2):
            d = model.points[i] - model.points[j]
            if np.linalg.norm(d) <= POINT_TOL:
                continue
            line = orthonormalize([d])
            if not any(line.same_span(t.subspace) for t in table):
                table.append(DifferenceComponent(line, (i, j)))
        return table
    if isinstance(model, UnionOfSubspaces):
        comps = model.subspaces
        p = len(comps)
        _check_count(p * (p + 1) // 2, max_count)
        cands = [
            DifferenceComponent(subspace_sum(comps[i], comps[j]), (i, j))
            for i, j in itertools.combinations_with_replacement(range(p), 2)
        ]
        kept = []
        for a, c in enumerate(cands):
            dominated = False
            for b, other in enumerate(cands):
                if a == b or not other.subspace.contains_subspace(c.subspace):
                    continue
                # strictly larger, or an equal span listed earlier
                if other.subspace.dim > c.subspace.dim or b < a:
                    dominated = True
                    break
            if not dominated:
                kept.append(c)
        return kept
    if isinstance(model, LowRank):
        raise UnsupportedModelError("low-rank models are not a finite union of subspaces")
    raise UnsupportedModelError(f"unknown model type {type(model).__name__}")


def difference_components(model, max_count=MAX_COMPONENTS):
    """Subspaces whose union is the cone generated by ``Sigma - Sigma``."""
    return [c.subspace for c in difference_table(model, max_count)]


def _check_vector(x, model):
    x = np.asarray(x, dtype=float).ravel()
    if x.size != model.ambient_dim:
        raise DimensionMismatchError(
            f"vector has length {x.size}, model lives in R^{model.ambient_dim}"
        )
    return x


def project_model(x, model):
    """Exact Euclidean projection of ``x`` onto the model.

    Hard thresholding for sparse kinds (ties go to the lowest index), a
    truncated SVD for low-rank matrices, best component projection for
    explicit unions and the nearest point for point clouds.
    """
    x = _check_vector(x, model)
    if isinstance(model, KSparse):
        order = np.argsort(-np.abs(x), kind="stable")
        support = tuple(sorted(int(i) for i in order[: model.k]))
        point = np.zeros_like(x)
        point[list(support)] = x[list(support)]
        return ProjectionResult(point, float(np.linalg.norm(x - point)), support)
    if isinstance(model, BlockSparse):
        energy = np.array([np.sum(x[list(b)] ** 2) for b in model.blocks])
        order = np.argsort(-energy, kind="stable")
        chosen = tuple(sorted(int(b) for b in order[: model.k]))
        point = np.zeros_like(x)
        for b in chosen:
            idx = list(model.blocks[b])
            point[idx] = x[idx]
        return ProjectionResult(point, float(np.linalg.norm(x - point)), chosen)
    if isinstance(model, LowRank):
        X = x.reshape(model.n1, model.n2)
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
        P = (U[:, : model.r] * s[: model.r]) @ Vt[: model.r]
        point = P.ravel()
        return ProjectionResult(point, float(np.linalg.norm(x - point)), None)
    if isinstance(model, PointCloud):
        dists = np.linalg.norm(model.points - x, axis=1)
        i = int(np.argmin(dists))
        return ProjectionResult(model.points[i].copy(), float(dists[i]), i)
    if isinstance(model, UnionOfSubspaces):
        best = None
        for i, V in enumerate(model.subspaces):
            p = V.project(x)
            d = float(np.linalg.norm(x - p))
            if best is None or d < best.distance - 1e-12:
                best = ProjectionResult(p, d, i)
        return best
    raise UnsupportedModelError(f"unknown model type {type(model).__name__}")


def contains(model, x, tol=1e-10):
    """Membership test for ``x`` in the model, up to ``tol``."""
    x = _check_vector(x, model)
    scale = max(1.0, float(np.linalg.norm(x)))
    if isinstance(model, KSparse):
        return int(np.sum(np.abs(x) > tol * scale)) <= model.k
    if isinstance(model, BlockSparse):
        active = [b for b in model.blocks if np.max(np.abs(x[list(b)])) > tol * scale]
        outside = np.ones(model.n, dtype=bool)
        for b in model.blocks:
            outside[list(b)] = False
        return len(active) <= model.k and not np.any(np.abs(x[outside]) > tol * scale)
    if isinstance(model, LowRank):
        s = np.linalg.svd(x.reshape(model.n1, model.n2), compute_uv=False)
        return int(np.sum(s > tol * scale)) <= model.r
    if isinstance(model, PointCloud):
        return bool(np.min(np.linalg.norm(model.points - x, axis=1)) <= POINT_TOL)
    if isinstance(model, UnionOfSubspaces):
        return any(V.contains(x, tol) for V in model.subspaces)
    raise UnsupportedModelError(f"unknown model type {type(model).__name__}")


def sample_model(model, rng, scale=1.0):
    """Draw one random point of the model with Gaussian coefficients."""
    n = model.ambient_dim
    if isinstance(model, KSparse):
        x = np.zeros(n)
        S = rng.choice(n, size=model.k, replace=False)
        x[S] = scale * rng.standard_normal(model.k)
        return x
    if isinstance(model, BlockSparse):
        x = np.zeros(n)
        chosen = rng.choice(len(model.blocks), size=model.k, replace=False)
        for b in chosen:
            idx = list(model.blocks[b])
            x[idx] = scale * rng.standard_normal(len(idx))
        return x
    if isinstance(model, LowRank):
        L = rng.standard_normal((model.n1, model.r))
        R = rng.standard_normal((model.r, model.n2))
        return scale * (L @ R).ravel() / np.sqrt(model.r)
    if isinstance(model, PointCloud):
        return model.points[rng.integers(len(model.points))].copy()
    if isinstance(model, UnionOfSubspaces):
        V = model.subspaces[rng.integers(len(model.subspaces))]
        return scale * (V.basis @ rng.standard_normal(V.dim))
    raise UnsupportedModelError(f"unknown model type {type(model).__name__}")


def model_from_dict(spec):
    """Parse the JSON model schema, e.g. ``{"kind": "ksparse", "n": 6, "k": 1}``.

    For ``"uos"`` each entry of ``bases`` is a list of spanning vectors of one
    subspace; ``"n"`` may be given to allow zero-dimensional subspaces.
    """
    kind = str(spec["kind"]).lower()
    if kind == "ksparse":
        return KSparse(int(spec["n"]), int(spec["k"]))
    if kind == "blocksparse":
        return BlockSparse(int(spec["n"]), tuple(tuple(b) for b in spec["blocks"]), int(spec["k"]))
    if kind == "lowrank":
        return LowRank(int(spec["n1"]), int(spec["n2"]), int(spec["r"]))
    if kind == "pointcloud":
        return PointCloud(np.asarray(spec["points"], dtype=float))
    if kind == "uos":
        return UnionOfSubspaces.from_spanning_sets(spec["bases"], ambient_dim=spec.get("n"))
    raise ValueError(f"unknown model kind {spec['kind']!r}")


def model_to_dict(model):
    if isinstance(model, KSparse):
        return {"kind": "ksparse", "n": model.n, "k": model.k}
    if isinstance(model, BlockSparse):
        return {"kind": "blocksparse", "n": model.n, "blocks": [list(b) for b in model.blocks], "k": model.k}
    if isinstance(model, LowRank):
        return {"kind": "lowrank", "n1": model.n1, "n2": model.n2, "r": model.r}
    if isinstance(model, PointCloud):
        return {"kind": "pointcloud", "points": model.points.tolist()}
    if isinstance(model, UnionOfSubspaces):
        return {
            "kind": "uos",
            "n": model.ambient_dim,
            "bases": [V.basis.T.tolist() for V in model.subspaces],
        }
    raise UnsupportedModelError(f"unknown model type {type(model).__name__}")
