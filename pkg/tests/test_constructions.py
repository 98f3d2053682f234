import math

import numpy as np
import pytest

from iocert.certify import frame_constant, nsp_constant_l2
from iocert.constructions import (
    adversarial_pair,
    decoder_ratios,
    fourier_rank1_onb,
    hyperbola_demo,
    hyperbola_svg,
    spd_sparse_inverse_onb,
)
from iocert.decoders import decode_noiseless, decode_robust
from iocert.exceptions import UnsupportedModelError
from iocert.linalg import kernel_basis, orthonormalize
from iocert.models import KSparse, LowRank, UnionOfSubspaces, contains


def test_spd_two_by_two():
    w = spd_sparse_inverse_onb(2)
    assert len(w.basis_elements) == 3
    s = 1 / math.sqrt(2)
    expected = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), np.array([[0, s], [s, 0]])]
    for A, B in zip(w.basis_elements, expected):
        np.testing.assert_allclose(A, B, atol=1e-15)
    np.testing.assert_allclose(w.gram(), np.eye(3), atol=1e-12)
    np.testing.assert_allclose(w.certificates[0]["inverse"], np.diag([0.5, 1.0]))


def test_spd_offdiagonal_eigenvalues():
    C = spd_sparse_inverse_onb(2).witness_pairs[2][0] * math.sqrt(2)
    np.testing.assert_allclose(np.linalg.eigvalsh(C), [1.0, 3.0], atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_spd_certificates(n):
    w = spd_sparse_inverse_onb(n)
    assert len(w.basis_elements) == n * (n + 1) // 2
    np.testing.assert_allclose(w.gram(), np.eye(len(w.basis_elements)), atol=1e-12)
    for A, (z1, z2), c in zip(w.basis_elements, w.witness_pairs, w.certificates):
        np.testing.assert_allclose(z1 - z2, A, atol=1e-12)
        np.testing.assert_array_equal(A, A.T)
        for Z in (z1, z2):
            # both witnesses are SPD with inverse sparsity at most n + 2
            assert np.linalg.eigvalsh(Z)[0] > 1e-10
            assert np.count_nonzero(np.abs(np.linalg.inv(Z)) > 1e-12) <= n + 2
        expected = n if c["kind"] == "diagonal" else n + 2
        assert c["inverse_nnz"] == expected
        assert c["min_eigenvalue"] > 1e-10
        assert c["product_error"] <= 1e-12


def test_spd_inverse_formula_independent():
    w = spd_sparse_inverse_onb(4)
    for (z1, _), c in zip(w.witness_pairs, w.certificates):
        scale = 1.0 if c["kind"] == "diagonal" else math.sqrt(2)
        np.testing.assert_allclose(np.linalg.inv(z1 * scale), c["inverse"], atol=1e-12)


def test_spd_rejects_small_inputs():
    with pytest.raises(ValueError):
        spd_sparse_inverse_onb(1)
    with pytest.raises(ValueError):
        spd_sparse_inverse_onb(4, k=5)
    assert len(spd_sparse_inverse_onb(3, k=9).basis_elements) == 6


def test_spd_frame_constant_is_one():
    vecs = spd_sparse_inverse_onb(4).vectors()
    V = orthonormalize(vecs)
    assert frame_constant(vecs, V) == pytest.approx(1.0, abs=1e-10)


def test_fourier_trivial():
    w = fourier_rank1_onb(1, 1)
    assert len(w.basis_elements) == 1
    np.testing.assert_allclose(w.basis_elements[0], [[1.0]])


def test_fourier_two_by_two():
    w = fourier_rank1_onb(2, 2)
    assert len(w.basis_elements) == 4
    for A in w.basis_elements:
        np.testing.assert_allclose(np.abs(A), 0.5, atol=1e-12)
    np.testing.assert_allclose(w.gram(), np.eye(4), atol=1e-12)
    # the two-point DFT is real: columns (1, 1)/sqrt2 and (1, -1)/sqrt2
    np.testing.assert_allclose(w.basis_elements[3], 0.5 * np.array([[1, -1], [-1, 1]]), atol=1e-12)


@pytest.mark.parametrize("n1,n2", [(1, 3), (2, 3), (3, 3), (4, 2), (4, 4)])
def test_fourier_certificates(n1, n2):
    w = fourier_rank1_onb(n1, n2)
    assert len(w.basis_elements) == n1 * n2
    np.testing.assert_allclose(w.gram(), np.eye(n1 * n2), atol=1e-12)
    for A, (z1, z2), c in zip(w.basis_elements, w.witness_pairs, w.certificates):
        np.testing.assert_allclose(np.abs(A), 1 / math.sqrt(n1 * n2), atol=1e-12)
        assert np.linalg.matrix_rank(A) == 1
        np.testing.assert_allclose(z1 - z2, A, atol=1e-12)
        assert c["u_inf"] <= c["u_bound"] + 1e-12
        assert c["v_inf"] <= c["v_bound"] + 1e-12
        assert c["uv_inf"] <= c["uv_bound"] + 1e-12
        assert c["u_inf"] == pytest.approx(1 / math.sqrt(n1))


# adversarial pairs


def _finite_instance(rng):
    while True:
        M = rng.standard_normal((4, 6))
        d = nsp_constant_l2(M, KSparse(6, 1)).d_star
        if np.isfinite(d) and d > 1.5:
            return M, d


def test_adversarial_pair_geometry(rng):
    model = KSparse(6, 1)
    for _ in range(5):
        M, d = _finite_instance(rng)
        D = 0.9 * d
        pair = adversarial_pair(M, model, D)
        assert pair.ratio_bound == pytest.approx(math.sqrt(D * D - 1))
        assert np.linalg.norm(M @ pair.p1 - M @ pair.p2) <= 1e-10
        assert contains(model, pair.z1) and contains(model, pair.z2)
        np.testing.assert_allclose(pair.z1 - pair.z2, pair.z, atol=1e-10)
        assert np.linalg.norm(pair.z) == pytest.approx(1.0)
        assert np.linalg.norm(M @ pair.h) <= 1e-10
        assert (pair.h @ pair.z) ** 2 >= 1 - 1 / D**2
        for decoder in (
            lambda y: decode_noiseless(y, M, model),
            lambda y: decode_robust(y, M, model, 0.5),
        ):
            assert max(decoder_ratios(pair, decoder, M, model)) >= pair.ratio_bound - 1e-6


def test_adversarial_defeats_every_decoder(rng):
    # any map of y: here the decoder that returns the exact p1 when it sees M p1
    M, d = _finite_instance(rng)
    model = KSparse(6, 1)
    pair = adversarial_pair(M, model, 0.9 * d)
    cheat = lambda y: pair.p1  # noqa: E731
    assert max(decoder_ratios(pair, cheat, M, model)) >= pair.ratio_bound - 1e-6


def test_adversarial_two_dimensional_example():
    M = np.array([[1.0, 1.0]])
    model = KSparse(2, 1)
    pair = adversarial_pair(M, model, 2.0)
    assert abs(pair.h @ np.array([1.0, -1.0])) == pytest.approx(math.sqrt(2))
    c = abs(pair.z1).max()
    np.testing.assert_allclose(np.abs(pair.z1), [c, 0.0], atol=1e-12)
    np.testing.assert_allclose(np.abs(pair.z2), [0.0, c], atol=1e-12)
    # the kernel-orthogonal part of z vanishes, so p1 and p2 are z1 and z2
    np.testing.assert_allclose(pair.p1, pair.z1, atol=1e-12)
    np.testing.assert_allclose(pair.p2, pair.z2, atol=1e-12)
    r = decoder_ratios(pair, lambda y: decode_noiseless(y, M, model), M, model)
    assert math.inf in r


def test_adversarial_rejects_bad_levels(rng):
    M, d = _finite_instance(rng)
    model = KSparse(6, 1)
    for D in (0.5, 1.0):
        with pytest.raises(ValueError):
            adversarial_pair(M, model, D)
    with pytest.raises(ValueError):
        adversarial_pair(M, model, d * 1.01)
    with pytest.raises(UnsupportedModelError):
        adversarial_pair(np.ones((2, 4)), LowRank(2, 2, 1), 2.0)


def test_adversarial_on_explicit_union(rng):
    model = UnionOfSubspaces.from_spanning_sets(
        [rng.standard_normal((1, 4)), rng.standard_normal((2, 4)), rng.standard_normal((1, 4))]
    )
    # a 3-dim difference component meets any 2-dim kernel, so take m = 3
    M = rng.standard_normal((3, 4))
    d = nsp_constant_l2(M, model).d_star
    assert np.isfinite(d)
    pair = adversarial_pair(M, model, 0.9 * d)
    N = kernel_basis(M)
    np.testing.assert_allclose(N.project(pair.p1 - pair.p2), pair.p1 - pair.p2, atol=1e-10)
    assert max(decoder_ratios(pair, lambda y: decode_noiseless(y, M, model), M, model)) >= (
        pair.ratio_bound - 1e-6
    )


# hyperbola


def _ray_distance_oracle(t, x2, samples=2_000_001):
    """Sampled distance from the ray {(s, x2): s <= t} to the curve (a, 1/a)."""
    a = np.geomspace(1e-4, max(10 * t, 10.0), samples)
    inv = 1 / a
    d_up = np.abs(inv - x2)
    d_end = np.hypot(a - t, inv - x2)
    return float(np.min(np.where(a <= t, d_up, d_end)))


def test_hyperbola_against_sampling():
    for t in (0.5, 1.0, 3.0, 10.0, 100.0):
        row = hyperbola_demo(-1.0, [t])[0]
        oracle = _ray_distance_oracle(t, -1.0)
        assert row.distance <= oracle + 1e-12
        assert row.distance == pytest.approx(oracle, abs=1e-6)


def test_hyperbola_at_one():
    row = hyperbola_demo(-1.0, [1.0])[0]
    assert row.distance == pytest.approx(math.sqrt(3), abs=1e-12)
    assert row.vertical_gap == pytest.approx(2.0)
    assert row.distance <= row.vertical_gap


def test_hyperbola_decreases_without_reaching_limit():
    rows = hyperbola_demo(-1.0)
    d = [r.distance for r in rows]
    assert [r.t for r in rows] == [10.0**j for j in range(7)]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert all(v > 1.0 for v in d)
    assert d[-1] - 1.0 <= 2e-6


def test_hyperbola_other_heights():
    rows = hyperbola_demo(-0.3, [1, 2, 5, 50])
    d = [r.distance for r in rows]
    assert all(b < a for a, b in zip(d, d[1:])) and min(d) > 0.3
    # the point sits under the curve: the demo still runs
    rows = hyperbola_demo(0.5, [1, 2, 4])
    assert all(np.isfinite(r.distance) and r.distance >= 0 for r in rows)
    assert rows[-1].distance == pytest.approx(0.0, abs=1e-12)


def test_hyperbola_grid_validation():
    with pytest.raises(ValueError):
        hyperbola_demo(-1.0, [1, 1])
    with pytest.raises(ValueError):
        hyperbola_demo(-1.0, [0, 1])


def test_hyperbola_svg():
    svg = hyperbola_svg(hyperbola_demo(-1.0), -1.0)
    assert svg.startswith("<svg") and svg.count("<polyline") == 2
