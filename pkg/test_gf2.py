#!/usr/bin/env python3
"""GF(2) linear algebra and the subgroup lattice."""

import numpy as np

from algebra.gf2 import (
    Subgroup,
    bitmatrix,
    bits_to_int,
    bits_to_symbol,
    hamming_distance,
    int_to_bits,
    is_invertible,
    matmul,
    project_solution_subgroup,
    rank,
    row_reduce,
    solve_affine,
    subgroup_index,
    subgroups,
    symbol_to_bits,
)
from errors import GF2Error, UnsupportedWidthError


def raises(exc_type, fn, *args):
    try:
        fn(*args)
    except exc_type:
        return True
    return False


def test_rank_of_f_kron_f():
    F = bitmatrix([[1, 0], [1, 1]])
    assert rank(np.kron(F, F)) == 4
    assert is_invertible(np.kron(F, F))


def test_rank_deficient():
    M = bitmatrix([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert rank(M) == 2
    assert not is_invertible(M)
    assert rank(np.zeros((0, 3), dtype=np.uint8)) == 0


def test_row_reduce_pivots():
    R, pivots = row_reduce(bitmatrix([[0, 1, 1], [1, 1, 0]]))
    assert pivots == [0, 1]
    assert R.tolist() == [[1, 0, 1], [0, 1, 1]]


def test_bits_and_symbols():
    assert bits_to_int((1, 0, 1)) == 5
    assert int_to_bits(5, 3) == (1, 0, 1)
    # First bit of a group is the least significant
    assert symbol_to_bits(1, 2) == (1, 0)
    assert symbol_to_bits(2, 2) == (0, 1)
    assert bits_to_symbol((1, 1)) == 3
    for s in range(4):
        assert bits_to_symbol(symbol_to_bits(s, 2)) == s


def test_matmul_and_distance():
    G = bitmatrix([[1, 0], [1, 1]])
    assert matmul([1, 1], G).tolist() == [0, 1]
    assert matmul([[1, 0], [0, 1]], G).tolist() == [[1, 0], [1, 1]]
    assert hamming_distance(np.array([1, 0, 1]), np.array([0, 0, 1])) == 1
    assert raises(GF2Error, hamming_distance, np.zeros(2), np.zeros(3))


def test_solve_affine_unique():
    # F = [[1,0],[1,1]]: xF = (0,1) has the single solution x = (1,1)
    sol = solve_affine(bitmatrix([[1, 0], [1, 1]]), [0, 1])
    assert sol is not None
    assert sol.dimension == 0
    assert sol.particular.tolist() == [1, 1]


def test_solve_affine_with_free_coordinate():
    # Only the sum x1 + x2 is observed
    A = bitmatrix([[1], [1]])
    sol = solve_affine(A, [1])
    assert sol.dimension == 1
    assert sol.size == 2
    assert sol.contains([1, 0]) and sol.contains([0, 1])
    assert not sol.contains([1, 1])


def test_solve_affine_inconsistent_and_mismatch():
    A = bitmatrix([[1, 1]])
    assert solve_affine(A, [1, 0]) is None
    assert raises(GF2Error, solve_affine, A, [1, 0, 0])


def test_solve_affine_no_observations():
    sol = solve_affine(np.zeros((3, 0), dtype=np.uint8), np.zeros(0, dtype=np.uint8))
    assert sol.dimension == 3


def test_project_solution_subgroup():
    sol = solve_affine(bitmatrix([[1], [1], [0]]), [0])
    # Solutions: x1 = x2, x3 free
    h12 = project_solution_subgroup(sol, (0, 2))
    assert h12.elements() == [(0, 0), (1, 1)]
    h3 = project_solution_subgroup(sol, (2, 1))
    assert h3.order == 2
    assert raises(GF2Error, project_solution_subgroup, None, (0, 1))
    assert raises(GF2Error, project_solution_subgroup, sol, (2, 2))


def test_subgroup_lattice_sizes():
    assert len(subgroups(0)) == 1
    assert len(subgroups(1)) == 2
    assert len(subgroups(2)) == 5
    lattice = subgroups(2)
    assert lattice[0].is_trivial
    assert lattice[-1].order == 4
    for i, h in enumerate(lattice):
        assert subgroup_index(h) == i


def test_unsupported_width():
    assert raises(UnsupportedWidthError, subgroups, 3)
    assert raises(UnsupportedWidthError, subgroups, -1)


def test_subgroup_canonical_equality():
    a = Subgroup.from_generators(2, [[1, 1], [0, 1]])
    b = Subgroup.from_generators(2, [[1, 0], [0, 1]])
    assert a == b
    assert hash(a) == hash(b)


def test_contains_symbol_uses_lsb_first():
    h = Subgroup.from_generators(2, [[1, 0]])
    assert h.contains_symbol(0)
    assert h.contains_symbol(1)
    assert not h.contains_symbol(2)


def test_annihilator():
    for h in subgroups(2):
        ann = h.annihilator()
        for v in [(0, 0), (0, 1), (1, 0), (1, 1)]:
            inside = not (np.asarray(v) @ ann % 2).any()
            assert inside == h.contains(v)


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in list(globals().items()) if name.startswith("test_")]
    print("=" * 60)
    print(f"Running {len(tests)} GF(2) tests")
    print("=" * 60)
    for name, fn in tests:
        fn()
        print(f"  ok  {name}")
    print("All passed.")
