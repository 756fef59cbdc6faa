"""Singular value function, scaled products, cone condition, probe."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from subaffine.errors import (
    DimensionMismatch,
    NegativeT,
    NonContractive,
    SingularMatrix,
)
from subaffine.linalg import (
    ScaledMatrix,
    alpha_bounds,
    check_cone_condition,
    jacobi_eigenvalues,
    log_phi,
    probe_quasimultiplicativity,
    singular_spectrum,
    validate_matrices,
    word_product,
)
from subaffine.symbolic import SubshiftSpec, compile_subshift, full_shift

from conftest import random_contractive


def test_identity_spectrum():
    s = singular_spectrum(np.eye(2))
    assert_allclose(s.log_alphas, [0.0, 0.0], atol=1e-14)
    assert_allclose(s.log_det, 0.0, atol=1e-14)


def test_diagonal_spectrum():
    s = singular_spectrum(np.diag([0.5, 0.25]))
    assert_allclose(s.log_alphas, [math.log(0.5), math.log(0.25)],
                    rtol=1e-14)


def test_shear_power_closed_form():
    # alpha_1(A^n)^2 = n^2 lam^{2n} (1/n^2 + 1/2 + sqrt(1/n^2 + 1/4))
    lam = 0.25
    a = lam * np.array([[1.0, 1.0], [0.0, 1.0]])
    for n in (1, 3, 10, 30, 64):
        prod = word_product((0,) * n, [a, a])
        spec = singular_spectrum(prod)
        expected = (n ** 2 * lam ** (2 * n)
                    * (1 / n ** 2 + 0.5 + math.sqrt(1 / n ** 2 + 0.25)))
        assert_allclose(math.exp(2 * spec.log_alphas[0]), expected,
                        rtol=1e-10)
        assert_allclose(spec.log_alphas.sum(), spec.log_det, rtol=1e-12)


def test_scaled_product_long_chain_accuracy():
    # chains of length 64 keep 12+ digits; oracle is a 60-digit product,
    # since raw double products lose the small singular value entirely
    from mpmath import mp, mpf, matrix, svd_r
    mp.dps = 60
    rng = np.random.default_rng(5)
    for _ in range(3):
        mats = [random_contractive(rng) for _ in range(2)]
        letters = rng.integers(0, 2, 64)
        prod = word_product(tuple(letters), mats)
        assert np.max(np.abs(prod.base)) == pytest.approx(1.0)
        exact = matrix([[mpf(1), mpf(0)], [mpf(0), mpf(1)]])
        for a in letters:
            exact = exact * matrix([[mpf(x) for x in row]
                                    for row in mats[a]])
        sv = svd_r(exact, compute_uv=False)
        spec = singular_spectrum(prod)
        for got, want in zip(spec.log_alphas, sv):
            assert abs(got - float(mp.log(want))) < 1e-12 * abs(got)


def test_deep_product_does_not_underflow():
    # overall scale 0.5^900 ~ 1e-271 would flush raw phi^t to zero
    a = np.diag([0.5, 0.45])
    prod = word_product((0,) * 900, [a, a])
    spec = singular_spectrum(prod)
    assert_allclose(spec.log_alphas[0], 900 * math.log(0.5), rtol=1e-12)
    assert_allclose(spec.log_alphas[1], 900 * math.log(0.45), rtol=1e-12)
    assert_allclose(log_phi(2.0, spec), 900 * math.log(0.225), rtol=1e-12)


def test_extreme_conditioning_raises_singular():
    # the squared, rescaled problem drops below 1e-300 near depth 500+
    a = np.diag([0.5, 0.25])
    prod = word_product((0,) * 900, [a, a])
    with pytest.raises(SingularMatrix):
        singular_spectrum(prod)


def test_log_phi_branches():
    s = singular_spectrum(np.diag([0.5, 0.25]))
    assert log_phi(0.0, s) == 0.0
    assert_allclose(log_phi(2.0, s), math.log(0.125), rtol=1e-12)
    assert_allclose(log_phi(1.5, s), -2 * math.log(2), rtol=1e-12)
    # determinant branch beyond d
    assert_allclose(log_phi(3.0, s), 1.5 * math.log(0.125), rtol=1e-12)
    with pytest.raises(NegativeT):
        log_phi(-0.1, s)


def test_log_phi_piecewise_linear_and_continuous():
    rng = np.random.default_rng(9)
    spec = singular_spectrum(random_contractive(rng, d=3))
    for integer in (1, 2):
        left = log_phi(integer - 1e-9, spec)
        mid = log_phi(float(integer), spec)
        right = log_phi(integer + 1e-9, spec)
        assert abs(left - mid) < 1e-7 and abs(right - mid) < 1e-7
    # linear between integers
    t0, t1 = 1.2, 1.8
    lerp = 0.5 * (log_phi(t0, spec) + log_phi(t1, spec))
    assert_allclose(log_phi(1.5, spec), lerp, rtol=1e-12)


def test_jacobi_matches_characteristic_roots_2x2():
    rng = np.random.default_rng(13)
    for _ in range(50):
        a = random_contractive(rng)
        g = a.T @ a
        eigs = jacobi_eigenvalues(g)
        tr, det = np.trace(g), np.linalg.det(g)
        disc = math.sqrt(max(tr * tr - 4 * det, 0.0))
        roots = np.array([(tr + disc) / 2, (tr - disc) / 2])
        assert_allclose(eigs, roots, rtol=1e-12)


def test_jacobi_matches_lapack_d3_d4():
    rng = np.random.default_rng(17)
    for d in (3, 4):
        for _ in range(20):
            x = rng.standard_normal((d, d))
            g = x.T @ x + 0.1 * np.eye(d)
            assert_allclose(np.sort(jacobi_eigenvalues(g))[::-1],
                            np.sort(np.linalg.eigvalsh(g))[::-1],
                            rtol=1e-10)


def test_singular_matrix_raises():
    with pytest.raises(SingularMatrix):
        singular_spectrum(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(SingularMatrix):
        ScaledMatrix.from_matrix(np.zeros((2, 2)))


def test_validate_matrices_contractivity():
    with pytest.raises(NonContractive):
        validate_matrices([np.diag([1.01, 0.5])], require_contractive=True)
    validate_matrices([np.diag([0.99, 0.5])], require_contractive=True)
    with pytest.raises(DimensionMismatch):
        validate_matrices([np.eye(2), np.eye(3)])


def test_alpha_bounds():
    lo, hi = alpha_bounds([np.diag([0.5, 0.25]), np.diag([0.125, 0.3])])
    assert_allclose([lo, hi], [0.125, 0.5], rtol=1e-12)


def test_submultiplicativity_and_sandwich_quick():
    rng = np.random.default_rng(19)
    mats = [random_contractive(rng) for _ in range(2)]
    lo, hi = alpha_bounds(mats)
    for _ in range(500):
        ni, nj = rng.integers(1, 9, 2)
        wi = tuple(rng.integers(0, 2, ni))
        wj = tuple(rng.integers(0, 2, nj))
        pi, pj = word_product(wi, mats), word_product(wj, mats)
        si, sj = singular_spectrum(pi), singular_spectrum(pj)
        sij = singular_spectrum(pi @ pj)
        t = rng.uniform(0.0, 2.5)
        assert log_phi(t, sij) <= log_phi(t, si) + log_phi(t, sj) + 1e-9
        delta = rng.uniform(0.0, 1.5)
        base = log_phi(t, si)
        upper = base + delta * ni * math.log(hi)
        lower = base + delta * ni * math.log(lo)
        mid = log_phi(t + delta, si)
        assert lower - 1e-9 <= mid <= upper + 1e-9


def test_cone_condition_positive_matrices():
    lam_bar = 1 / 3
    mats = [np.array([[lam_bar - b, t], [b, lam_bar - t]])
            for b, t in ((0.17, 0.13), (0.13, 0.17))]
    theta = np.array([1.0, 1.0]) / math.sqrt(2)
    res = check_cone_condition(mats, theta, math.pi / 2 - 0.01)
    assert res.ok and res.margin > 1e-3


def test_cone_condition_shear_fails():
    shear = 0.25 * np.array([[1.0, 1.0], [0.0, 1.0]])
    theta = np.array([1.0, 1.0]) / math.sqrt(2)
    for beta in (math.pi / 2 - 0.01, math.pi / 2 - 0.05):
        res = check_cone_condition([shear], theta, beta)
        assert not res.ok


def test_cone_condition_scaled_identity_fails_strictness():
    theta = np.array([1.0, 1.0]) / math.sqrt(2)
    res = check_cone_condition([0.5 * np.eye(2)], theta, math.pi / 3)
    assert not res.ok
    assert abs(res.margin) < 1e-9


def test_cone_condition_dimension_check():
    with pytest.raises(DimensionMismatch):
        check_cone_condition([np.eye(3)], np.array([1.0, 0.0]), 1.0)


def test_probe_diagonal_dominant_is_one():
    auto = full_shift(2)
    mats = [np.diag([0.5, 0.25]), np.diag([1 / 3, 0.125])]
    for t in (0.2, 0.5, 1.0):
        assert probe_quasimultiplicativity(t, 6, auto, mats) \
            == pytest.approx(1.0, abs=1e-9)


def test_probe_shear_grows():
    auto = full_shift(2)
    a = 0.25 * np.array([[1.0, 1.0], [0.0, 1.0]])
    ds = [probe_quasimultiplicativity(0.5, m, auto, [a, a])
          for m in (2, 4, 6)]
    assert ds[0] < ds[1] < ds[2]
    # worst split j = k = m gives about sqrt(jk/(j+k)) times a bounded factor
    assert ds[2] > 1.5


def test_probe_single_letter_alphabet():
    auto = compile_subshift(SubshiftSpec(1))
    assert probe_quasimultiplicativity(
        0.7, 4, auto, [np.diag([0.5, 0.25])]) == pytest.approx(1.0, abs=1e-9)


def test_probe_respects_subshift_words():
    auto = compile_subshift(SubshiftSpec(2, ((0, 1), (1, 0))))
    mats = [np.diag([0.5, 0.25]), np.diag([0.25, 0.5])]
    # only constant words exist; mixed concatenations are still probed
    d = probe_quasimultiplicativity(0.5, 3, auto, mats)
    assert d == pytest.approx(2.0 ** 1.5, rel=1e-9)
