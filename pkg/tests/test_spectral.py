import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from d2count.oracles import max_abs_eigenvalue_hp
from d2count.poly import frobenius_sq
from d2count.spectral import (
    PAIR,
    SMALL,
    approximate_largest_eigen,
    deflate,
    iteration_count,
    power_iterate,
)


def check_pair(A, eps, eta, res):
    lam_max = max_abs_eigenvalue_hp(A)
    fro_sq = frobenius_sq(A)
    lam = float(res.lambda_tilde)
    assert (1 - float(eta)) * float(lam_max) <= lam <= float(lam_max) * (1 + 2.0**-100)
    B = deflate(A, res.signed_lambda, res.w_tilde)
    Bw = B.dot(np.array(res.w_tilde, dtype=object))
    assert sum(v * v for v in Bw) < eta * eta * fro_sq
    assert frobenius_sq(B) <= (1 - eps * eps / 40) ** 2 * fro_sq


def test_diagonal_example():
    A = np.diag([5, 1])
    res = approximate_largest_eigen(A, Fraction(1, 10), Fraction(1, 100))
    assert res.kind == PAIR
    assert Fraction(495, 100) <= res.lambda_tilde <= 5
    w = res.w_float()
    assert abs(w[0]) >= 1 - 1e-4
    check_pair(A, Fraction(1, 10), Fraction(1, 100), res)


def test_swap_matrix_example():
    A = np.array([[0, 1], [1, 0]])
    eta = Fraction(1, 100)
    res = approximate_largest_eigen(A, Fraction(1, 10), eta)
    assert res.kind == PAIR and Fraction(99, 100) <= res.lambda_tilde <= 1
    check_pair(A, Fraction(1, 10), eta, res)


def test_identity_may_report_small():
    res = approximate_largest_eigen(np.eye(10, dtype=int), Fraction(9, 10), Fraction(1, 100))
    assert res.kind in (PAIR, SMALL)
    if res.kind == PAIR:
        check_pair(np.eye(10, dtype=int), Fraction(9, 10), Fraction(1, 100), res)


def test_negative_dominant_eigenvalue_is_found():
    A = np.diag([-7, 2, 1])
    res = approximate_largest_eigen(A, Fraction(1, 4), Fraction(1, 50))
    assert res.kind == PAIR and res.sign == -1
    check_pair(A, Fraction(1, 4), Fraction(1, 50), res)


def test_power_iterate_examples():
    A = np.diag([2.0, 1.0])
    mu, v = power_iterate(A, 0, 5)
    assert mu == pytest.approx(4) and np.allclose(v, [1, 0])
    mu, v = power_iterate(A, 1, 5)
    assert mu == pytest.approx(1) and np.allclose(np.abs(v), [0, 1])
    mu, v = power_iterate(np.array([[1.0, 1.0], [1.0, 1.0]]) + 2 * np.eye(2), 0, 40)
    assert np.allclose(v, [2**-0.5, 2**-0.5], atol=1e-6)


def test_deflate_examples():
    assert (deflate(np.array([[1]]), 1, [1]) == 0).all()
    B = deflate(np.diag([5, 1]), 5, [1, 0])
    assert frobenius_sq(B) == 1


@given(st.lists(st.integers(-9, 9), min_size=9, max_size=9), st.fractions(-3, 3, max_denominator=4))
def test_deflation_trace_identity(vals, lam):
    A = np.array(vals, dtype=object).reshape(3, 3)
    A = A + A.T
    w = [Fraction(3, 5), Fraction(4, 5), Fraction(0)]
    B = deflate(A, lam, w)
    W = np.outer(np.array(w, dtype=object), np.array(w, dtype=object))
    tr = sum(A[i, j] * W[j, i] for i in range(3) for j in range(3))
    assert frobenius_sq(B) == frobenius_sq(A) + lam * lam - 2 * lam * tr


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_random_symmetric_pairs_meet_guarantees(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.integers(-9, 10, size=(n, n))
    A = (M + M.T).astype(object)
    if not A.any():
        return
    eps, eta = Fraction(1, 2), Fraction(1, 20)
    res = approximate_largest_eigen(A, eps, eta)
    if res.kind == PAIR:
        check_pair(A, eps, eta, res)
    else:
        assert float(max_abs_eigenvalue_hp(A)) ** 2 <= float(eps) ** 2 * float(frobenius_sq(A))


def test_iteration_count_is_finite_for_tiny_delta():
    k = iteration_count(50, Fraction(1, 10**40))
    assert k > 10**39 and math.isfinite(float(k))


def test_rejects_zero_matrix():
    with pytest.raises(ValueError):
        approximate_largest_eigen(np.zeros((3, 3), dtype=int), Fraction(1, 2), Fraction(1, 2))
