import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from d2count.oracles import brute_force_abs_moment, hypercube_distribution, mc_gaussian, OracleConfig
from d2count.poly import (
    Degree2Polynomial,
    LinearForm,
    Restriction,
    graph_cut_poly,
    graph_induced_poly,
    influences,
    integer_scale,
    is_regular,
    mean_boolean,
    mean_gaussian,
    quadratic_matrix,
    raw_moment_exact,
    residue,
    restrict,
    ss,
    substitute_decomposition,
    variance_boolean,
    variance_gaussian,
)

from conftest import full_polys, multilinear_polys

TRIANGLE = [(0, 1), (1, 2), (0, 2)]


def x1x2_plus_x1():
    return Degree2Polynomial(2, {(0, 1): 1}, {0: 1}, 0, multilinear=True)


def test_variance_examples():
    assert variance_gaussian(Degree2Polynomial(3, constant=7)) == 0
    assert variance_gaussian(x1x2_plus_x1()) == 2
    assert variance_boolean(x1x2_plus_x1()) == 2
    assert variance_boolean(Degree2Polynomial(1, lin={0: 3})) == 9
    assert variance_boolean(Degree2Polynomial(2, constant=5)) == 0


def test_gaussian_variance_matches_monte_carlo():
    p = x1x2_plus_x1()
    cfg = OracleConfig(mc_samples=400_000)
    rng = np.random.default_rng(cfg.mc_seed)
    X = rng.standard_normal((cfg.mc_samples, 2))
    assert abs(np.var(p.evaluate_many(X)) - 2) < 0.05


def test_gaussian_variance_counts_squares():
    # Var(x^2) = 2 under N(0, 1)
    assert variance_gaussian(Degree2Polynomial(1, {(0, 0): 1})) == 2
    assert mean_gaussian(Degree2Polynomial(1, {(0, 0): 3}, constant=1)) == 4


def test_ss_and_influences():
    assert ss(x1x2_plus_x1()) == 2
    assert ss(Degree2Polynomial(4)) == 0
    p = Degree2Polynomial(2, {(0, 1): 1}, {0: 3}, multilinear=True)
    assert influences(p) == [10, 1]
    assert influences(Degree2Polynomial(3, constant=4)) == [0, 0, 0]
    q = Degree2Polynomial(2, {(0, 1): 1}, multilinear=True)
    assert influences(q) == [1, 1] and sum(influences(q)) == 2 * ss(q)


def test_is_regular_examples():
    p = Degree2Polynomial(100, lin={i: 1 for i in range(100)}, multilinear=True)
    assert is_regular(p, Fraction(1, 100))
    assert not is_regular(Degree2Polynomial(1, lin={0: 1}), Fraction(1, 2))
    assert is_regular(Degree2Polynomial(3, constant=2), Fraction(1, 10))


def test_quadratic_matrix_examples():
    A = quadratic_matrix(Degree2Polynomial(2, {(0, 1): 1}))
    assert A.tolist() == [[0, Fraction(1, 2)], [Fraction(1, 2), 0]]
    assert quadratic_matrix(Degree2Polynomial(1, {(0, 0): 1})).tolist() == [[1]]


def test_residue_examples():
    lin_only = Degree2Polynomial(2, lin={0: 1, 1: 2})
    assert residue(lin_only, LinearForm((1, 0))).is_constant
    assert residue(Degree2Polynomial(1, {(0, 0): 1}), LinearForm((1,))).is_constant
    r = residue(Degree2Polynomial(2, {(0, 1): 1}), LinearForm((1, 0)))
    assert variance_gaussian(r) == 1


def test_substitute_decomposition_examples():
    p = Degree2Polynomial(2, {(0, 1): 1}, {0: 2}, 3)
    q = substitute_decomposition(p, LinearForm((1, 0)))
    assert q.quad.get((0, 2)) == 1 and q.lin.get(0) == 2 and q.constant == 3
    s = 1 / math.sqrt(2)
    q2 = substitute_decomposition(Degree2Polynomial(2, {(0, 1): 1}), LinearForm((s, s)))
    assert abs(q2.quad[(0, 0)] - Fraction(1, 2)) < 1e-15


@given(full_polys(max_n=4), st.lists(st.integers(-5, 5), min_size=4, max_size=4))
def test_substitution_preserves_gaussian_moments(p, raw):
    w = [Fraction(v) for v in raw[: p.n]]
    if not any(w):
        w = [Fraction(1)] + [Fraction(0)] * (p.n - 1)
    norm = math.sqrt(sum(float(v) ** 2 for v in w))
    q = substitute_decomposition(p, LinearForm(tuple(float(v) / norm for v in w)))
    assert mean_gaussian(q) == mean_gaussian(p)
    assert variance_gaussian(q) == variance_gaussian(p)


def test_restrict_examples():
    p = Degree2Polynomial(2, {(0, 1): 1}, {1: 1}, multilinear=True)
    assert restrict(p, {0: -1}).is_constant and restrict(p, {0: -1}).constant == 0
    assert restrict(p, Restriction({})) == p
    assert restrict(p, {0: 1, 1: -1}).constant == p([1, -1])
    with pytest.raises(ValueError):
        Restriction({0: 0})


@given(multilinear_polys(max_n=6), st.data())
def test_restriction_agrees_with_evaluation(p, data):
    fixed = data.draw(st.dictionaries(st.integers(0, p.n - 1), st.sampled_from([-1, 1])))
    r = restrict(p, fixed)
    assert not any(i in fixed for e in r.quad for i in e) and not any(i in fixed for i in r.lin)
    for x in itertools.product([-1, 1], repeat=p.n):
        if all(x[i] == v for i, v in fixed.items()):
            assert r(list(x)) == p(list(x))


def test_graph_polynomials():
    cut = graph_cut_poly(TRIANGLE, 3)
    assert cut([1, 1, 1]) == 0 and cut([1, 1, -1]) == 2
    assert graph_cut_poly([(0, 1)], 2)([1, -1]) == 1
    ind = graph_induced_poly(TRIANGLE, 3)
    assert ind([1, 1, 1]) == 3 and ind([-1, -1, -1]) == 0 and ind([1, 1, -1]) == 1


@given(st.integers(2, 7), st.data())
def test_graph_polynomials_count_edges(n, data):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = data.draw(st.lists(st.sampled_from(pairs), unique=True))
    cut, ind = graph_cut_poly(edges, n), graph_induced_poly(edges, n)
    for x in itertools.product([-1, 1], repeat=n):
        assert cut(list(x)) == sum(x[u] != x[v] for u, v in edges)
        assert ind(list(x)) == sum(x[u] == 1 and x[v] == 1 for u, v in edges)


def test_raw_moment_examples():
    x1 = Degree2Polynomial(1, lin={0: 1})
    assert raw_moment_exact(x1, 2) == 1 and raw_moment_exact(x1, 3) == 0
    assert raw_moment_exact(x1x2_plus_x1(), 2) == 2


@given(multilinear_polys(max_n=6), st.integers(1, 4))
def test_raw_moment_matches_enumeration(p, k):
    dist = hypercube_distribution(p)
    assert raw_moment_exact(p, k) == sum((v**k * w for v, w in dist.items()), Fraction(0))


@given(multilinear_polys(max_n=6))
def test_second_moment_is_variance_plus_mean_squared(p):
    assert raw_moment_exact(p, 2) == variance_boolean(p) + mean_boolean(p) ** 2


@given(full_polys(max_n=5))
def test_integer_scale_clears_denominators(p):
    s = integer_scale(p)
    q = p.scaled(s)
    assert all(v.denominator == 1 for v in (*q.quad.values(), *q.lin.values(), q.constant))


def test_multilinear_guard():
    with pytest.raises(ValueError):
        Degree2Polynomial(2, {(0, 0): 1}, multilinear=True)
    with pytest.raises(ValueError):
        influences(Degree2Polynomial(2, {(0, 0): 1}))
