import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from d2count.decouple import (
    LOW_VARIANCE,
    SMALL,
    SPLIT,
    JuntaParams,
    approximate_decompose,
    construct_junta,
    critical_index,
)
from d2count.errors import PreconditionError
from d2count.oracles import OracleConfig, max_abs_eigenvalue_hp, mc_gaussian
from d2count.poly import Degree2Polynomial, mean_gaussian, quadratic_matrix, split_residue, variance_gaussian

from conftest import random_full


def test_critical_index_examples():
    assert critical_index([1, 1, 1], [0, 0, 0], Fraction(1, 2)) == 0
    assert critical_index([8, 1, 1], [0, 0, 0], Fraction(1, 2)) == 1
    assert critical_index([4, 1], [0, 4], Fraction(1, 2)) == 0
    assert critical_index([0, 0], [0, 0], Fraction(1, 2)) == 0
    assert critical_index([100, 1], [0, 0], Fraction(1, 1000)) == math.inf
    with pytest.raises(ValueError):
        critical_index([1, 2], [0, 0], Fraction(1, 2))


@given(st.lists(st.integers(0, 50), min_size=1, max_size=8), st.data())
def test_critical_index_definition(main, data):
    main = sorted(main, reverse=True)
    aux = data.draw(st.lists(st.integers(0, 50), min_size=len(main), max_size=len(main)))
    tau = data.draw(st.fractions(Fraction(1, 100), 1, max_denominator=100))
    i = critical_index(main, aux, tau)
    tails = [sum(main[j:]) + sum(aux[j:]) for j in range(len(main))]
    if not any(main) and not any(aux):
        assert i == 0
        return
    hits = [j for j in range(len(main)) if main[j] <= tau * tails[j]]
    assert i == (hits[0] if hits else math.inf)


def test_decompose_linear_is_small():
    res = approximate_decompose(Degree2Polynomial(1, lin={0: 1}), Fraction(3, 10), Fraction(1, 100))
    assert res.kind == SMALL


def test_decompose_square():
    p = Degree2Polynomial(1, {(0, 0): 1})
    eps = Fraction(3, 10)
    res = approximate_decompose(p, eps, Fraction(1, 100))
    assert res.kind == SPLIT and Fraction(99, 100) <= res.lambda1 <= 1
    assert variance_gaussian(res.r) <= (1 - eps**4 / 40) * 2


def test_decompose_product_matches_moments_exactly():
    p = Degree2Polynomial(2, {(0, 1): 1})
    res = approximate_decompose(p, Fraction(3, 10), Fraction(1, 100))
    assert res.is_split and abs(float(res.lambda1) - 0.5) < 1e-6
    whole = res.decoupled_part()
    assert mean_gaussian(whole) == mean_gaussian(p)
    assert variance_gaussian(whole) == variance_gaussian(p)


def test_decompose_preconditions():
    with pytest.raises(PreconditionError):
        approximate_decompose(Degree2Polynomial(2, {(0, 1): 1}, constant=1), Fraction(1, 2), Fraction(1, 10))
    with pytest.raises(PreconditionError):
        approximate_decompose(Degree2Polynomial(2), Fraction(1, 2), Fraction(1, 10))


def check_decompose(p, eps, eta):
    res = approximate_decompose(p, eps, eta)
    var = variance_gaussian(p)
    if res.kind == SPLIT:
        whole = res.decoupled_part()
        assert mean_gaussian(whole) == mean_gaussian(p)
        assert variance_gaussian(whole) == var
        cross, _ = split_residue(res.r)
        assert variance_gaussian(cross) <= 4 * eta * eta * var
        assert variance_gaussian(res.r) <= (1 - eps**4 / 40) * var
    else:
        lam = max_abs_eigenvalue_hp(quadratic_matrix(p)) if p.quad else 0
        assert float(lam) ** 2 <= float(eps * eps * var) * (1 + 1e-12)
    return res


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_decompose_contracts_random(n, seed):
    import random

    p = random_full(random.Random(seed), n).homogeneous
    if variance_gaussian(p) == 0:
        return
    check_decompose(p, Fraction(1, 2), Fraction(1, 10))


def test_junta_constant():
    q, trace = construct_junta(Degree2Polynomial(4, constant=3), Fraction(1, 10))
    assert q.K == 0 and q.constant == 3 and trace.exit == LOW_VARIANCE


def test_junta_regular_linear():
    n = 50
    p = Degree2Polynomial(n, lin={i: Fraction(1) for i in range(n)})
    eps = Fraction(1, 4)
    q, trace = construct_junta(p, eps)
    assert trace.exit == SMALL and len(trace.steps) == 1
    assert q.K == 1 and q.lambdas == (0,)
    alpha = trace.params["alpha"]
    beta = trace.head_mus[0]
    assert 1 - eps * Fraction(alpha) <= beta * beta <= 1


def check_junta_trace(trace, eps):
    K = trace.params["K"]
    rate = 1 - eps**4 / 40
    assert len(trace.steps) <= K + 1
    for st_ in trace.steps:
        if st_.branch != SPLIT:
            continue
        i = st_.index
        assert st_.var_next <= rate**i
        assert st_.var_next + st_.var_head >= (1 - float(eps) / K) ** i


def test_junta_dominant_square_then_stops():
    quad = {(0, 0): Fraction(1)}
    quad.update({(i, i + 29): Fraction(1, 100) for i in range(1, 30)})
    p = Degree2Polynomial(60, quad)
    eps = Fraction(1, 4)
    q, trace = construct_junta(p, eps)
    assert trace.steps[0].branch == SPLIT
    check_junta_trace(trace, eps)
    # undo the dyadic normalization and the integer rescaling, then compare CDFs
    factor = q.lambdas[0] / trace.head_lambdas[0] * trace.scale
    qq = q.to_polynomial()
    cfg = OracleConfig(mc_samples=200_000)
    for t in (Fraction(-1, 2), Fraction(1, 2), Fraction(3, 2)):
        ep, sp = mc_gaussian(p - t, cfg=cfg)
        eq, sq = mc_gaussian(qq - t * factor, cfg=cfg)
        assert abs(ep - eq) <= 0.1 + 3 * (sp + sq)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_junta_invariants_random(n, seed):
    import random

    p = random_full(random.Random(seed), n)
    eps = Fraction(1, 2)
    q, trace = construct_junta(p, eps)
    check_junta_trace(trace, eps)
    assert q.K == len(trace.head_lambdas)
    assert all(v.denominator == 1 for v in (*q.lambdas, *q.mus, q.constant))


def test_junta_params_derive():
    d = JuntaParams().derive(Fraction(1, 10), 20)
    assert d["K"] > 0 and 0 < d["alpha"] < 1 and d["eta"] > 0
    with pytest.raises(ValueError):
        JuntaParams().derive(Fraction(3, 2), 5)
