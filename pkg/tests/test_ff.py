import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdl.errors import ModulusMismatch, NotPrime, ZeroInverse, ZeroPolynomial
from tdl.ff import (
    FpElem, FpMatrix, FpPoly, batch_det, batch_eigen1, batch_matmul, charpoly, companion,
    decode_indices, distinct_root_counts, encode_matrices, field_inv, inv_mod, is_prime,
    mat_det, prime_pi, primes_up_to, substitute_power,
)

SMALL_PRIMES = [2, 3, 5, 7, 11, 13]


def P(coeffs, ell):
    return FpPoly(tuple(coeffs), ell)


def test_primes():
    assert primes_up_to(20) == [2, 3, 5, 7, 11, 13, 17, 19]
    assert prime_pi(20) == 8
    assert prime_pi(10**4) == 1229
    assert [n for n in range(30) if is_prime(n)] == primes_up_to(29)


def test_field_inv_examples():
    assert field_inv(FpElem(2, 5)).value == 3
    assert field_inv(FpElem(1, 7)).value == 1
    with pytest.raises(ZeroInverse):
        field_inv(FpElem(0, 3))


def test_elem_arithmetic():
    a, b = FpElem(3, 7), FpElem(5, 7)
    assert (a + b).value == 1
    assert (a - b).value == 5
    assert (a * b).value == 1
    assert (a / b).value == 3 * inv_mod(5, 7) % 7
    with pytest.raises(ModulusMismatch):
        a + FpElem(1, 5)
    with pytest.raises(NotPrime):
        FpElem(1, 4)


@given(st.sampled_from(SMALL_PRIMES), st.integers(1, 10**6))
def test_inverse_property(ell, a):
    if a % ell:
        assert (FpElem(a % ell, ell) * field_inv(FpElem(a % ell, ell))).value == 1


def test_det_examples():
    assert mat_det(FpMatrix.identity(2, 5)).value == 1
    assert mat_det(FpMatrix(((0, 1), (1, 0)), 2)).value == 1
    assert mat_det(FpMatrix(((1, 2), (3, 4)), 7)).value == 5


def test_charpoly_examples():
    assert charpoly(FpMatrix.diag([1, 2], 5)) == P([2, 2, 1], 5)
    assert charpoly(FpMatrix.identity(2, 3)) == P([1, 1, 1], 3)
    assert charpoly(FpMatrix(((0, 1), (1, 1)), 2)) == P([1, 1, 1], 2)


def test_distinct_root_examples():
    assert distinct_root_counts(P([-1, 0, 1], 5)) == (2, 2)
    assert distinct_root_counts(P([1, -2, 1], 3)) == (1, 1)
    assert distinct_root_counts(P([3, 0, 1], 7)) == (2, 2)
    with pytest.raises(ZeroPolynomial):
        distinct_root_counts(P([0], 5))


def test_distinct_roots_multiplicity_divisible_by_ell():
    # (x - 1)^3 over F_3 = x^3 - 1 has derivative 0
    assert distinct_root_counts(P([-1, 0, 0, 1], 3)) == (1, 1)
    # x^2 + x + 1 over F_2 is irreducible: no roots in F_2, two over the closure
    assert distinct_root_counts(P([1, 1, 1], 2)) == (0, 2)
    # (x^2 + x + 1)^2 = x^4 + x^2 + 1 over F_2
    assert distinct_root_counts(P([1, 0, 1, 0, 1], 2)) == (0, 2)


def test_substitute_power_examples():
    assert substitute_power(P([2, -1, 1], 7), 1) == P([2, -1, 1], 7)
    assert substitute_power(P([-1, 1], 5), 3) == P([-1, 0, 0, 1], 5)
    assert substitute_power(P([3, 0, 1], 7), 2) == P([3, 0, 0, 0, 1], 7)


@settings(max_examples=60)
@given(st.sampled_from([2, 3, 5, 7]), st.lists(st.integers(0, 6), min_size=1, max_size=5))
def test_closure_count_matches_product_of_linear_factors(ell, roots):
    f = P([1], ell)
    for r in roots:
        f = f * P([-r, 1], ell)
    distinct = len({r % ell for r in roots})
    assert distinct_root_counts(f) == (distinct, distinct)


@settings(max_examples=60)
@given(st.sampled_from([3, 5, 7]), st.lists(st.integers(0, 6), min_size=1, max_size=6),
       st.lists(st.integers(0, 6), min_size=1, max_size=4))
def test_divmod_identity(ell, a, b):
    fa, fb = P(a, ell), P(b, ell)
    if fb.is_zero:
        return
    q, r = divmod(fa, fb)
    assert q * fb + r == fa
    assert r.degree < fb.degree


def test_eval_all_matches_call():
    f = P([3, 1, 0, 2], 11)
    assert list(f.eval_all()) == [f(x) for x in range(11)]


def test_matrix_inverse_and_power():
    M = FpMatrix(((1, 2), (3, 4)), 7)
    assert M @ M.inverse() == FpMatrix.identity(2, 7)
    assert M**3 == M @ M @ M
    assert M**-1 == M.inverse()
    with pytest.raises(ZeroInverse):
        FpMatrix(((1, 2), (2, 4)), 7).inverse()


def test_cayley_hamilton_companion():
    f = P([1, 2, 0, 1], 5)
    C = companion(f)
    assert charpoly(C) == f


@pytest.mark.parametrize("ell", [2, 3])
def test_batch_det_matches_scalar(ell):
    idx = np.arange(ell**4)
    arr = decode_indices(idx, 2, ell)
    dets = batch_det(arr, ell)
    for k in range(0, ell**4, 7):
        M = FpMatrix.from_flat(arr[k].ravel().tolist(), 2, ell)
        assert dets[k] == mat_det(M).value
        assert M.key() == k
    assert np.array_equal(encode_matrices(arr, ell), idx)


def test_batch_det_3x3_and_eigen1():
    rng = np.random.default_rng(1)
    arr = rng.integers(0, 5, size=(200, 3, 3))
    dets = batch_det(arr, 5)
    e1 = batch_eigen1(arr, 5)
    for k in range(200):
        M = FpMatrix(tuple(map(tuple, arr[k].tolist())), 5)
        assert dets[k] == mat_det(M).value
        assert e1[k] == (charpoly(M)(1) == 0)


def test_batch_matmul():
    rng = np.random.default_rng(2)
    a, b = rng.integers(0, 7, size=(2, 50, 2, 2))
    c = batch_matmul(a, b, 7)
    for k in range(50):
        A = FpMatrix(tuple(map(tuple, a[k].tolist())), 7)
        B = FpMatrix(tuple(map(tuple, b[k].tolist())), 7)
        assert (A @ B).rows == tuple(map(tuple, c[k].tolist()))
