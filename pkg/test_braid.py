#!/usr/bin/env python3
"""
Tests for eigenvalue tracking, permutations and braid words.
"""

import cmath
import math
import os
import sys

import numpy as np

sys.path.append('.')

from braid import (
    braid_invariants,
    braid_loop,
    extract_braid_word,
    extract_permutation,
    free_reduce,
    permutation_cycles,
    track_eigenvalues,
)
from errors import ArgumentError, LoopTouchesDegeneracyError
from loops import LoopSpec

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "configs")

# only the sample grid of this spec is used by the synthetic root functions below
GRID_SPEC = LoopSpec(a_xi=1.0, m_xi=0.0, a_g=1.0, m_g=0.0, a_gamma=1.0, m_gamma=0.0, n_samples=64)


def _exchange(phi: float) -> np.ndarray:
    """The inner pair +-e^{i phi/2} swaps places once per loop; +-3 stay put."""
    w = cmath.exp(0.5j * phi)
    return np.array([w, -w, 3.0, -3.0], dtype=complex)


def _collision(phi: float) -> np.ndarray:
    x = math.cos(phi)
    return np.array([x, -x, 3.0, -3.0], dtype=complex)


def test_word_algebra():
    print("Testing word reduction and invariants...")
    assert free_reduce([1, -1, 2, 3, -3]) == [2]
    assert free_reduce([1, 3, -1]) == [1, 3, -1]
    assert free_reduce([1, 3, -1], commuting=True) == [3]
    assert free_reduce([1, 2, -1], commuting=True) == [1, 2, -1]
    assert free_reduce([1, -3, -1, 3], commuting=True) == []

    perm, exponent_sum = braid_invariants([-1, 3])
    assert perm == (1, 0, 3, 2) and exponent_sum == 0
    assert permutation_cycles(perm) == [(1, 2), (3, 4)]
    assert braid_invariants([]) == ((0, 1, 2, 3), 0)
    perm, exponent_sum = braid_invariants([1, 2])
    assert perm == (2, 0, 1, 3) and exponent_sum == 2
    try:
        braid_invariants([4])
        raise AssertionError("sigma_4 accepted in B4")
    except ArgumentError:
        pass
    print("✅ Free and commuting reduction, permutation and exponent sum")


def test_synthetic_exchange():
    print("Testing a synthetic exchange...")
    strands = track_eigenvalues(GRID_SPEC, projection="real", roots_at=_exchange)
    assert strands.values.shape == (65, 4)
    assert np.allclose(strands.values[0], [-3, -1, 1, 3])
    perm = extract_permutation(strands)
    assert perm == (0, 2, 1, 3)
    word = free_reduce(extract_braid_word(strands, roots_at=_exchange), commuting=True)
    assert len(word) == 1 and abs(word[0]) == 2
    assert braid_invariants(word)[0] == perm

    rows = strands.rows()
    assert len(rows) == 65 * 4
    assert rows[0]["strand"] == 1 and rows[3]["strand"] == 4
    print("✅ One sigma_2 exchange, permutation (2 3)")


def test_degenerate_loop():
    try:
        track_eigenvalues(GRID_SPEC, roots_at=_collision)
        raise AssertionError("collision not detected")
    except LoopTouchesDegeneracyError as e:
        assert e.min_gap < 1e-6
        assert e.phi is not None
    print("✅ Loop through a degeneracy raises with the gap")


def test_bad_projection():
    try:
        track_eigenvalues(GRID_SPEC, projection="diagonal", roots_at=_exchange)
        raise AssertionError("unknown projection accepted")
    except ArgumentError:
        pass
    print("✅ Unknown projection rejected")


def test_trivial_loop():
    print("Testing loop L1...")
    spec = LoopSpec.from_json_file(os.path.join(CONFIG_DIR, "l1.json"))
    res = braid_loop(spec)
    assert res.word == []
    assert res.permutation == (0, 1, 2, 3)
    assert res.exponent_sum == 0
    assert res.min_gap > 0
    print("✅ L1 gives the trivial braid")


def test_exceptional_line_loop():
    print("Testing loop L2...")
    spec = LoopSpec.from_json_file(os.path.join(CONFIG_DIR, "l2.json"))
    res = braid_loop(spec)
    assert len(res.word) == 2, res.word
    assert res.exponent_sum == 0
    cycles = permutation_cycles(res.permutation)
    assert len(cycles) == 2 and all(len(c) == 2 for c in cycles)
    assert braid_invariants(res.word)[0] == res.permutation
    d = res.to_dict()
    assert d["letters"] == 2 and sorted(d["permutation"]) == [1, 2, 3, 4]
    assert d["projection"] == "imag" and d["n_samples"] == 1024
    print(f"✅ L2 gives {res.word} with permutation {cycles}")


def _conjugate_pairing(vals: np.ndarray) -> list:
    """Strand j whose value is the conjugate of strand k, for every k."""
    return [int(np.argmin(np.abs(vals - np.conj(z)))) for z in vals]


def test_strands_conjugation_equivariant():
    print("Testing conjugate pairing along L2...")
    spec = LoopSpec.from_json_file(os.path.join(CONFIG_DIR, "l2.json"))
    res = braid_loop(spec)
    values = res.strands.values
    tau = _conjugate_pairing(values[0])
    assert sorted(tau) == [0, 1, 2, 3]
    assert all(tau[tau[k]] == k for k in range(4))
    tol = 1e-8 * res.strands.scale
    for row in values:
        for k in range(4):
            assert abs(row[tau[k]] - np.conj(row[k])) <= tol, (row, tau)
    # the pairing is fixed along the loop, so the monodromy respects it
    perm = res.permutation
    assert all(perm[tau[k]] == tau[perm[k]] for k in range(4))
    print(f"✅ Pairing {tau} holds on every sample and commutes with {perm}")


def test_refinement_stability():
    print("Testing L2 at twice the samples...")
    spec = LoopSpec.from_json_file(os.path.join(CONFIG_DIR, "l2.json"))
    coarse = braid_loop(spec)
    fine = braid_loop(spec.with_overrides(n_samples=2 * spec.n_samples))
    assert fine.permutation == coarse.permutation
    assert fine.exponent_sum == coarse.exponent_sum
    assert sorted(fine.word) == sorted(coarse.word)
    print(f"✅ {coarse.word} at {spec.n_samples} and {2 * spec.n_samples} samples")


def main():
    print("🔍 Braid Tests")
    print("=" * 50)

    tests = [
        test_word_algebra,
        test_synthetic_exchange,
        test_degenerate_loop,
        test_bad_projection,
        test_trivial_loop,
        test_exceptional_line_loop,
        test_strands_conjugation_equivariant,
        test_refinement_stability,
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
        print("🎉 All braid tests PASSED!")
    else:
        print("💥 Some braid tests FAILED!")
    return all_passed


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
