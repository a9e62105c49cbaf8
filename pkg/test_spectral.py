#!/usr/bin/env python3
"""
Tests for the spectral layer: coefficients, quartic roots, the 4x4
eigensolver, geometric multiplicities and closed-form eigenvectors.
"""

import math
import sys

import numpy as np

sys.path.append('.')

from errors import GaugeUnavailableError, LocusPreconditionError, MalformedMatrixError, ParameterError, SymmetryViolationError
from model import ModelParams, traceless_matrix
from spectral import (
    Quartic,
    apply_gauge,
    char_poly_coeffs,
    cluster_roots,
    conjugate_partner_residual,
    eig4,
    eigenvector_matrix_det,
    geometric_multiplicity,
    match_roots,
    solve_depressed_quartic,
    special_eigenvectors,
    spectrum_from_quartic,
)

EP4_PARAMS = ModelParams(xi_1=1.0, delta_omega_1=1.0, g=1.0, gamma_1=4.0)
DL3_PARAMS = ModelParams(xi_1=1.0, g=0.0, gamma_1=2.0)


def _parallel(v, w) -> float:
    return abs(np.vdot(v, w)) / (np.linalg.norm(v) * np.linalg.norm(w))


def test_coefficients_match_numpy():
    print("Testing (q, r, s) against numpy.poly...")
    rng = np.random.default_rng(11)
    for _ in range(100):
        p = ModelParams(g=rng.uniform(0, 2), xi_1=rng.uniform(0, 2), xi_2=rng.uniform(0, 1),
                        chi=rng.uniform(0, 1), phi_chi=rng.uniform(-3, 3),
                        gamma_1=rng.uniform(0, 2), gamma_2=rng.uniform(0, 2),
                        delta_omega_1=rng.uniform(-1, 1), delta_omega_2=rng.uniform(-1, 1))
        E = traceless_matrix(p)
        c = char_poly_coeffs(E)
        ref = np.poly(E)
        assert abs(ref[1]) < 1e-10
        assert np.allclose([c.q, c.r, c.s], ref[2:].real, atol=1e-9)
    print("✅ Trace formulas agree with the characteristic polynomial")


def test_coefficient_errors():
    print("Testing coefficient input errors...")
    try:
        char_poly_coeffs(np.diag([1.0, 0, 0, 0]))
        raise AssertionError("non-traceless accepted")
    except MalformedMatrixError:
        pass
    try:
        char_poly_coeffs(np.diag([1 + 1j, -1 - 1j, 0, 0]))
        raise AssertionError("complex coefficients accepted")
    except SymmetryViolationError:
        pass
    try:
        Quartic(float("inf"), 0.0, 0.0)
        raise AssertionError("infinite q accepted")
    except ParameterError:
        pass
    print("✅ Non-traceless and non-symmetric matrices rejected")


def test_quartic_simple_roots():
    roots = solve_depressed_quartic(Quartic(-5.0, 0.0, 4.0))
    assert np.allclose(roots, [-2, -1, 1, 2], atol=1e-12)
    # depressed quartic with roots 1 +- 2i, -1 +- 0.5i
    target = [1 + 2j, 1 - 2j, -1 + 0.5j, -1 - 0.5j]
    coeffs = np.poly(target).real
    roots = solve_depressed_quartic(Quartic(coeffs[2], coeffs[3], coeffs[4]))
    perm, cost = match_roots(target, roots)
    assert cost < 1e-10
    print("✅ Distinct real and complex roots recovered")


def test_quartic_multiple_roots():
    print("Testing multiple roots...")
    el_plus = solve_depressed_quartic(Quartic(2.0, 0.0, 1.0))
    assert max(min(abs(z - 1j), abs(z + 1j)) for z in el_plus) < 1e-8
    spec = spectrum_from_quartic(Quartic(2.0, 0.0, 1.0))
    assert sorted(spec.multiplicities) == [2, 2]

    dl3 = spectrum_from_quartic(Quartic(-1.5, 1.0, -0.1875))
    assert dl3.multiplicities == [1, 3]
    assert abs(dl3.clusters[0].mean + 1.5) < 1e-8
    assert abs(dl3.clusters[1].mean - 0.5) < 1e-6

    ep4 = spectrum_from_quartic(Quartic(0.0, 0.0, 0.0))
    assert ep4.multiplicities == [4]
    assert np.allclose(ep4.roots, 0.0)
    print("✅ Double, triple and quadruple roots cluster correctly")


def test_cluster_roots():
    clusters = cluster_roots([1.0, 1.0 + 1e-9, 2.0, -3.0])
    assert [c.algebraic for c in clusters] == [1, 2, 1]
    assert clusters[1].members == (0, 1)
    print("✅ Clustering within the radius")


def test_eig4_ep4():
    print("Testing EP4 eigenstructure...")
    E = traceless_matrix(EP4_PARAMS)
    spec = eig4(E)
    assert spec.multiplicities == [4]
    assert spec.geometric_multiplicities == [1]
    assert spec.defective == [True]
    v = spec.clusters[0].vectors[0]
    assert _parallel(v, np.array([-1j, -1j, 1, 1])) > 1 - 1e-6
    assert geometric_multiplicity(E, 0.0) == 1

    origin_variant = traceless_matrix(ModelParams(g=1.0, gamma_1=4.0))
    assert eig4(origin_variant).geometric_multiplicities == [2]
    print("✅ One eigenvector at EP4, two when xi_1 = delta_omega_1 = 0")


def test_eig4_dl3():
    print("Testing DL3 eigenstructure...")
    spec = eig4(traceless_matrix(DL3_PARAMS))
    assert spec.multiplicities == [1, 3]
    assert spec.geometric_multiplicities == [1, 3]
    assert abs(spec.clusters[1].mean - 0.5) < 1e-8
    print("✅ Triple root 0.5 is non-defective")


def test_eig4_matches_quartic():
    rng = np.random.default_rng(3)
    for _ in range(100):
        p = ModelParams(g=rng.uniform(0, 2), xi_1=rng.uniform(0, 2), chi=rng.uniform(0, 1),
                        gamma_1=rng.uniform(0, 2), delta_omega_1=rng.uniform(-1, 1),
                        delta_omega_2=rng.uniform(-1, 1))
        E = traceless_matrix(p)
        spec = eig4(E)
        roots = solve_depressed_quartic(char_poly_coeffs(E))
        _, cost = match_roots(spec.roots, roots)
        assert cost < 1e-6, cost
        for lam, v in spec.eigenpairs():
            assert np.linalg.norm(E @ v - lam * v) < 1e-6
    print("✅ Dense eigensolver agrees with the quartic roots")


def test_eigenvector_matrix_det():
    print("Testing eigenvector matrix determinant...")
    E = traceless_matrix(ModelParams(xi_1=1.0))
    det = eigenvector_matrix_det(E, "paper")
    assert abs(abs(det) - 2.0) < 1e-6
    ep4_det = eigenvector_matrix_det(traceless_matrix(EP4_PARAMS), "paper")
    assert abs(ep4_det) < 1e-6
    dl3_det = eigenvector_matrix_det(traceless_matrix(DL3_PARAMS), "paper")
    assert abs(dl3_det - (-2.0)) < 1e-9, dl3_det
    # on the g = 0 diabolical surface |det U| = 2 sqrt(u) / xi_1
    for xi in (0.5, 1.0, 1.5, 2.0):
        for w1 in (0.0, 0.3 * xi, -0.6 * xi):
            p = ModelParams(xi_1=xi, delta_omega_1=w1)
            det = eigenvector_matrix_det(traceless_matrix(p), "paper")
            assert abs(abs(det) - 2.0 * math.sqrt(p.u) / xi) < 1e-8, (xi, w1, det)
    print("✅ |det| = 2 sqrt(u)/xi_1 at g = 0, -gamma_minus/xi_1 at DL3, zero at EP4")


def test_conjugate_partner():
    spec = eig4(traceless_matrix(ModelParams(xi_1=1.0)))
    for cl in spec.clusters:
        if cl.algebraic == 1 and abs(cl.mean.imag) < 1e-12:
            assert conjugate_partner_residual(cl.vectors[0]) < 1e-8

    rng = np.random.default_rng(17)
    n_real = n_complex = 0
    for _ in range(500):
        p = ModelParams.from_gamma_minus(rng.uniform(-2, 2), g=rng.uniform(0.2, 2), xi_1=rng.uniform(0.2, 2),
                                         delta_omega_1=rng.uniform(-1, 1))
        E = traceless_matrix(p)
        spec = eig4(E)
        scale = char_poly_coeffs(E).root_scale
        for cl in spec.clusters:
            others = [abs(cl.mean - o.mean) for o in spec.clusters if o is not cl]
            if cl.algebraic != 1 or min(others) < 0.05 * scale:
                continue
            if abs(cl.mean.imag) <= 1e-9 * scale:
                assert conjugate_partner_residual(cl.vectors[0]) <= 1e-8, (p, cl.mean)
                n_real += 1
            elif abs(cl.mean.imag) >= 0.2 * scale:
                # tau_x v* belongs to conj(lambda), a different eigenvalue
                assert conjugate_partner_residual(cl.vectors[0]) >= 0.1, (p, cl.mean)
                n_complex += 1
    assert n_real > 0 and n_complex > 0
    print(f"✅ {n_real} real eigenvalues with self-conjugate eigenvectors, {n_complex} complex ones without")


def test_gauges():
    v = np.array([1j, 0, 2.0, 0])
    assert np.allclose(apply_gauge(v, "paper"), [0.5j, 0, 1, 0])
    unit = apply_gauge(v, "unit")
    assert math.isclose(np.linalg.norm(unit), 1.0)
    assert unit[0].real > 0 and abs(unit[0].imag) < 1e-15
    try:
        apply_gauge(np.zeros(4), "paper")
        raise AssertionError("zero vector accepted")
    except GaugeUnavailableError:
        pass
    try:
        apply_gauge(v, "other")
        raise AssertionError("unknown gauge accepted")
    except ParameterError:
        pass

    # a2^dag first, then a1^dag in the mode-1 plane, a2 in the mode-2 plane
    assert np.allclose(apply_gauge(np.array([1.0, 2.0, 3.0, 4j]), "paper"), [-0.25j, -0.5j, -0.75j, 1.0])
    assert np.allclose(apply_gauge(np.array([0, 3j, 0, 0]), "paper"), [0, 1, 0, 0])
    for no_component in (np.array([1.0, 1.0, 1.0, 0.0]), np.array([2.0, 0, 0, 0]), np.array([1.0, 0, 1.0, 1e-7])):
        try:
            apply_gauge(no_component, "paper")
            raise AssertionError(f"{no_component} normalised")
        except GaugeUnavailableError:
            pass
    assert np.allclose(apply_gauge(np.array([1.0, 1.0, 1.0, 0.0]), "unit") * math.sqrt(3), [1, 1, 1, 0])
    print("✅ 'paper' and 'unit' gauges")


def _check_pairs(E, pairs):
    for sv in pairs:
        assert np.linalg.norm(E @ sv.vector - sv.eigenvalue * sv.vector) < 1e-10, sv.label


def test_special_eigenvectors():
    print("Testing closed-form eigenvectors...")
    el_i = ModelParams.from_gamma_minus(1.0, xi_1=1.0, delta_omega_1=1.0, g=1.0)
    _check_pairs(traceless_matrix(el_i), special_eigenvectors("EL", el_i))

    el_ii = ModelParams(xi_1=math.sqrt(5.0), delta_omega_1=1.0, g=1.0)
    _check_pairs(traceless_matrix(el_ii), special_eigenvectors("EL", el_ii))

    _check_pairs(traceless_matrix(EP4_PARAMS), special_eigenvectors("EP4", EP4_PARAMS))
    mirrored = ModelParams.from_gamma_minus(-4.0, xi_1=1.0, delta_omega_1=1.0, g=1.0)
    _check_pairs(traceless_matrix(mirrored), special_eigenvectors("EP4", mirrored))
    _check_pairs(traceless_matrix(ModelParams()), special_eigenvectors("EP4", ModelParams()))

    dl3 = special_eigenvectors("DL3", DL3_PARAMS)
    _check_pairs(traceless_matrix(DL3_PARAMS), dl3)
    assert [sv.eigenvalue for sv in dl3[:3]] == [0.5, 0.5, 0.5]
    assert dl3[3].eigenvalue == -1.5
    print("✅ EL(I), EL(II), EP4 and DL3 vectors satisfy E v = lambda v")


def test_special_eigenvector_preconditions():
    for locus, p in (("EP4", ModelParams(xi_1=1.0, g=1.0, gamma_1=4.0)),
                     ("DL3", ModelParams(xi_1=1.0, g=0.5, gamma_1=2.0)),
                     ("EL", ModelParams(xi_1=1.0, g=1.0)),
                     ("EL", ModelParams(xi_1=1.0, delta_omega_1=1.0, g=1.0, delta_omega_2=0.3))):
        try:
            special_eigenvectors(locus, p)
            raise AssertionError(f"{locus} accepted {p}")
        except LocusPreconditionError:
            pass
    try:
        special_eigenvectors("XYZ", ModelParams())
        raise AssertionError("unknown locus accepted")
    except ParameterError:
        pass
    print("✅ Off-locus parameters rejected")


def main():
    print("🔍 Spectral Tests")
    print("=" * 50)

    tests = [
        test_coefficients_match_numpy,
        test_coefficient_errors,
        test_quartic_simple_roots,
        test_quartic_multiple_roots,
        test_cluster_roots,
        test_eig4_ep4,
        test_eig4_dl3,
        test_eig4_matches_quartic,
        test_eigenvector_matrix_det,
        test_conjugate_partner,
        test_gauges,
        test_special_eigenvectors,
        test_special_eigenvector_preconditions,
    ]

    all_passed = True
    for test in tests:
        try:
            test()
        except Exception as e:
            print(f"❌ Test {test.__name__} failed: {e!r}")
            all_passed = False

    print("\n" + "=" * 50)
    if all_passed:
        print("🎉 All spectral tests PASSED!")
    else:
        print("💥 Some spectral tests FAILED!")
    return all_passed


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
