"""Block-encoding, dilation, and polynomial eigenvalue transform tests.

The transform oracle is a direct eigendecomposition: diagonalise, apply
the polynomial to the eigenvalues with an independent evaluator, and
reassemble.  apply_poly must agree without ever diagonalising itself.
"""

import numpy as np
import pytest

from qsvtsim.blockenc import (BlockEncoding, HermitianOp, MatrixFormatError,
                              apply_poly, dilate, read_matrix,
                              right_probability, shift_and_scale, write_matrix)
from qsvtsim.chebpoly import ChebPoly, StepSpec, build_step_approx


def random_hermitian(rng, n, norm=0.9):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (a + a.conj().T)
    h *= norm / np.max(np.abs(np.linalg.eigvalsh(h)))
    return HermitianOp.from_matrix(h)


def eig_transform(h, poly):
    """Oracle: P applied through the eigendecomposition of h."""
    w, v = np.linalg.eigh(h.matrix)
    return (v * poly.eval(w)) @ v.conj().T


def test_dilate_scalar_zero():
    be = dilate(HermitianOp.from_matrix([[0.0]]), 1.0)
    assert np.allclose(be.unitary, [[0.0, 1.0], [1.0, 0.0]])


def test_dilate_identity():
    be = dilate(HermitianOp.from_matrix(np.eye(2)), 1.0)
    assert np.allclose(be.unitary, np.diag([1.0, 1.0, -1.0, -1.0]))


def test_dilate_random_is_unitary_and_encodes():
    rng = np.random.default_rng(11)
    h = random_hermitian(rng, 4)
    be = dilate(h, 1.0)
    u = be.unitary
    assert np.max(np.abs(u.conj().T @ u - np.eye(8))) <= 1e-10
    assert np.max(np.abs(u[:4, :4] - h.matrix)) <= 1e-10


def test_dilate_rejects_small_gamma():
    h = HermitianOp.from_matrix(np.diag([0.9, -0.4]))
    with pytest.raises(ValueError):
        dilate(h, 0.5)


def test_dilate_with_larger_gamma_scales_block():
    h = HermitianOp.from_matrix(np.diag([0.9, -0.4]))
    be = dilate(h, 2.0)
    assert be.gamma == 2.0
    assert np.allclose(be.gamma * be.unitary[:2, :2], h.matrix)


def test_shift_zero_is_plain_rescale():
    h = HermitianOp.from_matrix(np.diag([0.5, -0.25]))
    hp = shift_and_scale(h, 0.0, 2.0)
    assert np.allclose(hp.matrix, np.diag([0.25, -0.125]))


def test_shift_at_gamma_annihilates_top():
    h = HermitianOp.from_matrix(np.eye(3))
    hp = shift_and_scale(h, 1.0, 1.0)
    assert np.allclose(hp.matrix, np.zeros((3, 3)))


def test_shift_maps_eigenvalues():
    h = HermitianOp.from_matrix(np.diag([0.6, -0.2, 0.1]))
    hp = shift_and_scale(h, 0.25, 1.0)
    expect = (np.array([0.6, -0.2, 0.1]) - 0.25) / 1.25
    assert np.allclose(np.diag(hp.matrix).real, expect)
    assert hp.spectral_norm() <= 1.0


def test_shift_rejects_mu_outside_gamma():
    h = HermitianOp.from_matrix(np.diag([0.5]))
    with pytest.raises(ValueError):
        shift_and_scale(h, 1.5, 1.0)


def test_apply_poly_identity_polynomial():
    h = HermitianOp.from_matrix(np.diag([0.3, -0.7]))
    top = apply_poly(h, ChebPoly.from_coeffs([0.0, 1.0]))
    assert np.allclose(top.matrix, h.matrix)
    assert top.query_count == 1


def test_apply_poly_t2_on_diagonal():
    # T_2(x) = 2x^2 - 1 sends the eigenvalues +-1 of a diagonal sign
    # operator to 1, so the transform is the identity.
    h = HermitianOp.from_matrix(np.diag([1.0, -1.0]))
    top = apply_poly(h, ChebPoly.from_coeffs([0.0, 0.0, 1.0]))
    assert np.allclose(top.matrix, np.eye(2))
    assert top.query_count == 2


def test_apply_poly_matches_eigendecomposition():
    rng = np.random.default_rng(23)
    poly = build_step_approx(StepSpec(0.2, 0.5))
    for n in (2, 3, 5):
        h = random_hermitian(rng, n)
        top = apply_poly(h, poly)
        assert np.max(np.abs(top.matrix - eig_transform(h, poly))) <= 1e-9


def test_apply_poly_is_linear_in_coefficients():
    rng = np.random.default_rng(5)
    h = random_hermitian(rng, 3)
    p1 = ChebPoly.from_coeffs([0.5, 0.25])
    p2 = ChebPoly.from_coeffs([0.0, 0.0, 0.5])
    mix = ChebPoly.from_coeffs([0.25, 0.125, 0.25])
    lhs = apply_poly(h, mix).matrix
    rhs = 0.5 * apply_poly(h, p1).matrix + 0.5 * apply_poly(h, p2).matrix
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_apply_poly_spectral_mapping():
    vals = np.array([0.9, 0.2, -0.5])
    h = HermitianOp.from_matrix(np.diag(vals))
    poly = build_step_approx(StepSpec(0.1, 0.5))
    top = apply_poly(h, poly)
    assert np.allclose(np.sort(np.linalg.eigvalsh(top.matrix)),
                       np.sort(poly.eval(vals)), atol=1e-12)


def test_apply_poly_rejects_large_radius():
    h = HermitianOp.from_matrix(np.diag([1.2]))
    with pytest.raises(ValueError):
        apply_poly(h, ChebPoly.from_coeffs([0.0, 0.5]))


def test_right_probability_on_eigenvector():
    vals = np.array([0.7, -0.3])
    h = HermitianOp.from_matrix(np.diag(vals))
    poly = build_step_approx(StepSpec(0.2, 0.5))
    top = apply_poly(h, poly)
    for i, lam in enumerate(vals):
        e = np.zeros(2)
        e[i] = 1.0
        assert right_probability(top, e) == pytest.approx(poly.eval(lam) ** 2,
                                                          abs=1e-12)


def test_right_probability_ramp_at_top():
    h = HermitianOp.from_matrix(np.diag([1.0]))
    top = apply_poly(h, ChebPoly.from_coeffs([0.5, 0.5]))
    assert right_probability(top, np.array([1.0])) == pytest.approx(1.0)


def test_right_probability_mixture_rule():
    rng = np.random.default_rng(17)
    h = random_hermitian(rng, 4)
    poly = build_step_approx(StepSpec(0.2, 0.5))
    top = apply_poly(h, poly)
    w, v = np.linalg.eigh(h.matrix)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    weights = np.abs(v.conj().T @ psi) ** 2
    expect = float(np.sum(poly.eval(w) ** 2 * weights))
    assert right_probability(top, psi) == pytest.approx(expect, abs=1e-12)


def test_right_probability_plateau_floor():
    """An eigenvector with eigenvalue past +delta succeeds with p >= (1-eta/2)^2."""
    spec = StepSpec(0.15, 0.4)
    poly = build_step_approx(spec)
    for lam in (0.15, 0.3, 0.8, 1.0):
        h = HermitianOp.from_matrix(np.diag([lam]))
        p = right_probability(apply_poly(h, poly), np.array([1.0]))
        assert p >= (1.0 - spec.eta / 2.0) ** 2 - 1e-9


def test_right_probability_band_sides():
    """Left-band eigenvectors land under (eta/2)^2, right-band above."""
    spec = StepSpec(0.1, 0.3)
    poly = build_step_approx(spec)
    h = HermitianOp.from_matrix(np.diag([-0.5, 0.5]))
    top = apply_poly(h, poly)
    assert right_probability(top, np.array([1.0, 0.0])) <= (spec.eta / 2.0) ** 2 + 1e-9
    assert right_probability(top, np.array([0.0, 1.0])) >= (1.0 - spec.eta / 2.0) ** 2 - 1e-9


def test_right_probability_validates_state():
    h = HermitianOp.from_matrix(np.diag([0.5, -0.5]))
    top = apply_poly(h, ChebPoly.from_coeffs([0.5, 0.5]))
    with pytest.raises(ValueError):
        right_probability(top, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        right_probability(top, np.array([1.0, 0.0, 0.0]))


def test_right_probability_stays_in_unit_interval():
    rng = np.random.default_rng(31)
    poly = build_step_approx(StepSpec(0.2, 0.5))
    for _ in range(20):
        h = random_hermitian(rng, 3)
        psi = rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        p = right_probability(apply_poly(h, poly), psi)
        assert 0.0 <= p <= 1.0


def test_hermitian_op_validation():
    with pytest.raises(ValueError):
        HermitianOp.from_matrix([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        HermitianOp.from_matrix(np.zeros((2, 3)))


def test_block_encoding_validation():
    h = HermitianOp.from_matrix(np.diag([0.5]))
    with pytest.raises(ValueError):
        BlockEncoding(unitary=np.eye(2), gamma=1.0, ancillas=1, encoded=h)


def test_matrix_io_round_trip(tmp_path):
    rng = np.random.default_rng(41)
    h = random_hermitian(rng, 3)
    path = tmp_path / "h.mat"
    write_matrix(path, h)
    again = read_matrix(path)
    assert np.max(np.abs(again.matrix - h.matrix)) == 0.0


def test_matrix_io_rejects_bad_files(tmp_path):
    cases = {
        "empty.mat": "",
        "nohead.mat": "2\n1 0\n0 1\n",
        "badn.mat": "dim x\n",
        "shortrows.mat": "dim 2\n1+0j 0+0j\n",
        "shortcols.mat": "dim 2\n1+0j\n0+0j 1+0j\n",
        "badentry.mat": "dim 1\nfoo\n",
    }
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text)
        with pytest.raises(MatrixFormatError):
            read_matrix(path)
