#!/usr/bin/env python3
"""
Tests for discriminant, cubic resolvent, classification and surface sampling.
"""

import sys

import numpy as np

sys.path.append('.')

from catastrophe import (
    Defectiveness,
    Kind,
    classify,
    cubic_resolvent,
    discriminant,
    discriminant_from_roots,
    parallel_map,
    parametric_point,
    resolvent_from_params,
    sample_surface_implicit,
    sample_surface_parametric,
    table_point,
)
from config import DEFAULT_CONFIG
from errors import ArgumentError, InputMismatchError, ParameterError
from model import ModelParams, traceless_matrix
from parammap import forward_map
from spectral import Quartic, char_poly_coeffs, solve_depressed_quartic


def test_discriminant_values():
    print("Testing discriminant...")
    # D(2, 0, s) = 256 s (s - 1)^2
    for s in (-1.0, 0.0, 0.5, 1.0, 2.0, 3.5):
        assert np.isclose(discriminant(Quartic(2.0, 0.0, s)), 256.0 * s * (s - 1.0) ** 2)
    assert cubic_resolvent(Quartic(2.0, 0.0, 1.0)) == 0.0
    assert cubic_resolvent(Quartic(-1.5, 1.0, -0.1875)) == 0.0
    print("✅ Closed-form values")


def test_discriminant_from_roots():
    rng = np.random.default_rng(5)
    for _ in range(200):
        c = Quartic(*rng.uniform(-3, 3, size=3))
        D = discriminant(c)
        D_roots = discriminant_from_roots(solve_depressed_quartic(c))
        assert abs(D - D_roots) <= 1e-7 * max(1.0, abs(D), c.scale ** 6), (c, D, D_roots)
    print("✅ Discriminant equals the product of squared root differences")


def test_resolvent_from_params():
    print("Testing resolvent in Hamiltonian parameters...")
    rng = np.random.default_rng(9)
    for _ in range(200):
        p = ModelParams.from_gamma_minus(rng.uniform(-3, 3), xi_1=rng.uniform(0, 2),
                                         g=rng.uniform(0, 2), delta_omega_1=rng.uniform(-2, 2))
        L = cubic_resolvent(forward_map(p))
        assert np.isclose(resolvent_from_params(p), L, rtol=1e-9, atol=1e-9)
    try:
        resolvent_from_params(ModelParams(xi_1=1.0, delta_omega_2=0.5))
        raise AssertionError("delta_omega_2 != 0 accepted")
    except ParameterError:
        pass
    print("✅ L(u, g, gamma_minus) agrees with L(q, r, s)")


def test_table_points():
    print("Testing stratum table points...")
    el_i = ModelParams.from_gamma_minus(1.0, xi_1=1.0, delta_omega_1=1.0, g=1.0)
    el_ii = ModelParams(xi_1=2.0, g=1.0)
    dl3 = ModelParams(xi_1=1.0, gamma_1=2.0)
    ep4 = ModelParams(xi_1=1.0, delta_omega_1=1.0, g=1.0, gamma_1=4.0)
    cases = (("EL-I", el_i, 1.0, 1.0), ("EL-II", el_ii, 0.0, 1.0), ("DL3", dl3, 2.0, 0.0), ("EP4", ep4, 4.0, 1.0))
    for kind, params, gm, g in cases:
        expected = table_point(kind, gamma_minus=gm, g=g)
        got = char_poly_coeffs(traceless_matrix(params))
        assert np.allclose(got.as_tuple(), expected.as_tuple(), atol=1e-12), (kind, got, expected)
    try:
        table_point("EL-III")
        raise AssertionError("unknown stratum accepted")
    except ArgumentError:
        pass
    print("✅ EL(I), EL(II), DL3 and EP4 table points match the matrices")


def test_classify_strata():
    print("Testing classification of each stratum...")
    cases = [
        (Quartic(-5.0, 0.0, 4.0), Kind.REGULAR),
        (Quartic(-2.25, 0.5, 0.75), Kind.S1),
        (Quartic(1.0, 0.0, 0.0), Kind.S2),
        (Quartic(-2.0, 0.0, 1.0), Kind.EL_MINUS),
        (Quartic(2.0, 0.0, 1.0), Kind.EL_PLUS),
        (Quartic(-1.5, 1.0, -0.1875), Kind.DL3),
        (Quartic(0.0, 0.0, 0.0), Kind.EP4),
    ]
    for c, kind in cases:
        res = classify(c)
        assert res.kind == kind, (c, res.kind)
        assert res.defectiveness == Defectiveness.UNKNOWN
        assert not res.boundary
    print("✅ Regular, S1, S2, EL(-), EL(+), DL3 and EP4")


def test_classify_scaled():
    # classes are invariant under lambda -> t lambda
    for t in (1e-3, 1e3):
        assert classify(Quartic(2.0 * t ** 2, 0.0, t ** 4)).kind == Kind.EL_PLUS
        assert classify(Quartic(-1.5 * t ** 2, t ** 3, -0.1875 * t ** 4)).kind == Kind.DL3
    assert classify(Quartic(-5e6, 0.0, 4e12)).kind == Kind.REGULAR
    w = classify(Quartic(2e6, 0.0, 1e12)).witnesses
    assert np.isclose(w["eps_r"], DEFAULT_CONFIG.zero_tol * w["scale"] ** 1.5)
    assert np.isclose(w["eps_D"], DEFAULT_CONFIG.zero_tol * w["scale"] ** 6)
    print("✅ Thresholds follow the quasi-homogeneous scale")


def test_classify_defectiveness():
    print("Testing defectiveness from matrices...")
    cases = [
        (ModelParams(xi_1=1.0, delta_omega_1=1.0, g=1.0, gamma_1=4.0), Kind.EP4, Defectiveness.EXCEPTIONAL),
        (ModelParams(g=1.0, gamma_1=4.0), Kind.EP4, Defectiveness.MIXED),
        (ModelParams(xi_1=1.0, gamma_1=2.0), Kind.DL3, Defectiveness.DIABOLICAL),
        (ModelParams(xi_1=1.0), Kind.S1, Defectiveness.DIABOLICAL),
        (ModelParams(xi_1=1.5, g=0.3, gamma_1=0.7), Kind.REGULAR, Defectiveness.NOT_APPLICABLE),
    ]
    for params, kind, defect in cases:
        E = traceless_matrix(params)
        res = classify(char_poly_coeffs(E), E)
        assert res.kind == kind, (params, res.kind)
        assert res.defectiveness == defect, (params, res.defectiveness)
    print("✅ Exceptional, mixed, diabolical and not-applicable")


def test_classify_mismatch():
    E = traceless_matrix(ModelParams(xi_1=1.0, delta_omega_1=1.0, g=1.0, gamma_1=4.0))
    try:
        classify(Quartic(1.0, 0.0, 0.0), E)
        raise AssertionError("mismatched matrix accepted")
    except InputMismatchError:
        pass
    print("✅ Mismatched (q, r, s) and matrix rejected")


def test_classify_to_dict():
    d = classify(Quartic(2.0, 0.0, 1.0)).to_dict()
    assert d["kind"] == "ELplus"
    assert d["defectiveness"] == "Unknown"
    assert sorted(d["multiplicities"]) == [2, 2]
    assert "D" in d["witnesses"] and "L" in d["witnesses"]
    print("✅ Classification serializes")


def test_parametric_points_on_surface():
    print("Testing parametric families...")
    for a, c in ((0.3, 0.4), (-0.7, 0.2), (0.5, -1.0)):
        quartic, _ = parametric_point("double-real", a=a, c=c)
        assert abs(discriminant(quartic)) < 1e-12
    quartic, _ = parametric_point("double-complex", a=0.0, b=1.0)
    assert quartic.as_tuple() == (1.0, 0.0, 0.0)
    assert classify(quartic).kind == Kind.S2
    quartic, params = parametric_point("g-zero-diabolical", u=-1.5, gamma_minus=0.8)
    assert params.delta_omega_1 > 0 and params.xi_1 == 0.0
    assert abs(discriminant(quartic)) < 1e-10
    assert parametric_point("g-offset-exceptional", u=-1.0, gamma_minus=0.5) == (None, None)
    try:
        parametric_point("spiral", a=1.0)
        raise AssertionError("unknown mode accepted")
    except ArgumentError:
        pass
    print("✅ Every family stays on D = 0")


def test_sample_surface_parametric():
    print("Testing parametric surface sampling...")
    mesh = sample_surface_parametric("double-real", resolution=6)
    assert len(mesh) > 0
    for point in mesh.points:
        c = Quartic(*point)
        assert abs(discriminant(c)) <= DEFAULT_CONFIG.mesh_tol * c.scale ** 6
    assert set(mesh.labels) <= {"S1", "ELminus", "DL3", "EP4"}
    assert set(mesh.defectiveness) == {"Unknown"}

    with_matrix = sample_surface_parametric("g-offset-exceptional", {"u": (0.5, 2.0), "gamma_minus": (-1.0, 1.0)},
                                            resolution=3, with_matrix=True)
    assert len(with_matrix) > 0
    assert "Unknown" not in with_matrix.defectiveness
    assert len(with_matrix.parameters) == len(with_matrix)
    try:
        sample_surface_parametric("double-real", {"b": (0.0, 1.0)})
        raise AssertionError("foreign axis accepted")
    except ArgumentError:
        pass
    print("✅ Points on the surface, labels and defectiveness reported")


def test_sample_surface_implicit():
    print("Testing implicit surface scan...")
    box = {"q": (1.0, 3.0), "r": (-1.0, 1.0), "s": (0.5, 1.5)}
    mesh = sample_surface_implicit(box, resolution={"q": 3, "r": 3, "s": 5})
    hits = [i for i, p in enumerate(mesh.points) if np.allclose(p, (2.0, 0.0, 1.0), atol=1e-8)]
    assert hits, "tangential root at s = 1 not found"
    assert mesh.labels[hits[0]] == "ELplus"

    empty = sample_surface_implicit({"q": (0.9, 1.1), "r": (-0.1, 0.1), "s": (0.9, 1.1)}, resolution=5)
    assert len(empty) == 0
    assert empty.rows() == []
    print("✅ Tangential root found, empty box gives an empty mesh")


def test_implicit_points_are_on_swallowtail():
    print("Testing labels of implicit surface points...")
    box = {"q": (-3.0, 3.0), "r": (-2.0, 2.0), "s": (-1.0, 3.0)}
    mesh = sample_surface_implicit(box, resolution={"q": 5, "r": 5, "s": 20})
    assert len(mesh) > 0
    for point, kind in zip(mesh.points, mesh.labels):
        c = Quartic(*point)
        assert abs(discriminant(c)) <= DEFAULT_CONFIG.mesh_tol * c.scale ** 6
        assert kind != Kind.REGULAR.value, (point, discriminant(c))
    # a bisected crossing away from the tangential ones
    c = Quartic(*min(mesh.points, key=lambda p: abs(p[0] + 1.5) + abs(p[1] + 2.0) + abs(p[2] - 2.55)))
    assert abs(c.s - 2.55) < 0.01
    assert classify(c).kind != Kind.REGULAR
    print(f"✅ {len(mesh)} implicit points, none labelled Regular")


def _real_root_count(point) -> int:
    c = Quartic(*point)
    roots = np.roots([1.0, 0.0, c.q, c.r, c.s])
    return int(np.sum(np.abs(roots.imag) <= 1e-4 * c.root_scale))


def test_parametric_real_root_counts():
    print("Testing real roots on S1 and S2...")
    real = sample_surface_parametric("double-real", resolution=11)
    s1 = [p for p, kind in zip(real.points, real.labels) if kind == Kind.S1.value]
    assert s1
    assert all(_real_root_count(p) == 4 for p in s1)

    complex_pair = sample_surface_parametric("double-complex", {"b": (0.25, 1.0)}, resolution=6)
    s2 = [p for p, kind in zip(complex_pair.points, complex_pair.labels) if kind == Kind.S2.value]
    assert s2
    assert all(_real_root_count(p) == 2 for p in s2)
    assert Kind.S1.value not in complex_pair.labels
    print(f"✅ {len(s1)} S1 points with 4 real roots, {len(s2)} S2 points with 2")


def test_range_errors():
    for bad in ({"q": (1.0, 1.0), "r": (0.0, 1.0), "s": (0.0, 1.0)},
                {"q": (0.0, 1.0), "r": (0.0, 1.0)}):
        try:
            sample_surface_implicit(bad, resolution=3)
            raise AssertionError(f"{bad} accepted")
        except ArgumentError:
            pass
    try:
        sample_surface_implicit({"q": (0, 1), "r": (0, 1), "s": (0, 1)}, resolution=1)
        raise AssertionError("resolution 1 accepted")
    except ArgumentError:
        pass
    print("✅ Empty ranges, missing axes and resolution < 2 rejected")


def test_parallel_map_threads():
    items = list(range(50))
    assert parallel_map(lambda x: x * x, items, 4) == [x * x for x in items]
    a = sample_surface_parametric("double-complex", resolution=5)
    b = sample_surface_parametric("double-complex", resolution=5, cfg=DEFAULT_CONFIG.with_overrides(threads=3))
    assert a.points == b.points and a.labels == b.labels
    print("✅ Threaded runs give identical output")


def main():
    print("🔍 Catastrophe Tests")
    print("=" * 50)

    tests = [
        test_discriminant_values,
        test_discriminant_from_roots,
        test_resolvent_from_params,
        test_table_points,
        test_classify_strata,
        test_classify_scaled,
        test_classify_defectiveness,
        test_classify_mismatch,
        test_classify_to_dict,
        test_parametric_points_on_surface,
        test_sample_surface_parametric,
        test_sample_surface_implicit,
        test_implicit_points_are_on_swallowtail,
        test_parametric_real_root_counts,
        test_range_errors,
        test_parallel_map_threads,
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
        print("🎉 All catastrophe tests PASSED!")
    else:
        print("💥 Some catastrophe tests FAILED!")
    return all_passed


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
