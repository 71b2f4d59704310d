import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from d2count.boolcount import (
    FAIL,
    MINUS,
    PLUS,
    REGULAR,
    BooleanParams,
    RegularityParams,
    RegularityTree,
    construct_tree,
    count_boolean,
    count_boolean_regular,
    solve_tau_tilde,
)
from d2count.errors import FeasibilityError, PreconditionError
from d2count.oracles import brute_force_boolean
from d2count.poly import Degree2Polynomial, graph_cut_poly, is_regular

from conftest import multilinear_polys, random_multilinear

# trees with these settings stop early and produce every kind of leaf at small n
SHALLOW = [
    RegularityParams(Fraction(1, 5), c_alpha=1e-4),
    RegularityParams(Fraction(1, 3)),
    RegularityParams(Fraction(1, 1000)),
]


def disagreement(leaf, n):
    free = [i for i in range(n) if i not in leaf.restriction]
    bad = 0
    want = 1 if leaf.label == PLUS else -1
    for bits in itertools.product([-1, 1], repeat=len(free)):
        x = [0] * n
        for i, s in leaf.restriction.items():
            x[i] = s
        for i, s in zip(free, bits):
            x[i] = s
        bad += (1 if leaf.poly(x) >= 0 else -1) != want
    return Fraction(bad, 1 << len(free))


def test_parameters_are_consistent():
    for tau in (Fraction(1, 3), Fraction(1, 100), Fraction(1, 10**6)):
        rp = RegularityParams(tau)
        assert 0 < rp.tau_tilde <= float(tau)
        assert rp.alpha_node > 0 and rp.expansion_cap > 0 and rp.depth_cap > 0
        assert rp.t_star == Fraction(1, 2 * rp.C**2)
    assert solve_tau_tilde(1e-3) < 1e-3


def test_regular_polynomial_is_a_single_leaf():
    n = 12
    p = Degree2Polynomial(n, lin={i: 1 for i in range(n)}, multilinear=True)
    tree = construct_tree(p, Fraction(1, 10))
    leaves = list(tree.leaves())
    assert len(leaves) == 1 and leaves[0].label == REGULAR and leaves[0].depth == 0


def test_single_dominant_variable_splits_at_root():
    p = Degree2Polynomial(3, lin={0: 1}, multilinear=True)
    leaves = list(construct_tree(p, Fraction(1, 10)).leaves())
    assert len(leaves) == 2
    assert {lf.label for lf in leaves} == {PLUS, MINUS}
    assert all(lf.depth == 1 and set(lf.restriction) == {0} for lf in leaves)
    for lf in leaves:
        assert lf.label == (PLUS if lf.restriction[0] == 1 else MINUS)


@pytest.mark.parametrize("params", SHALLOW, ids=["c_alpha", "third", "milli"])
def test_tree_properties(params):
    rng = random.Random(11)
    for _ in range(6):
        n = rng.randint(4, 11)
        p = random_multilinear(rng, n)
        tree = RegularityTree(p, params)
        theta = Fraction(rng.randint(-6, 6), rng.choice([1, 2]))
        leaves = list(tree.leaves(theta))
        assert sum(lf.weight for lf in leaves) == 1
        fail = Fraction(0)
        for lf in leaves:
            assert len(lf.restriction) == lf.depth
            if lf.label == REGULAR:
                assert lf.poly.is_constant or is_regular(lf.poly, params.tau)
            elif lf.label in (PLUS, MINUS):
                assert disagreement(lf, n) <= params.tau
            else:
                assert lf.label == FAIL
                fail += lf.weight
        assert fail <= params.tau
        # every input reaches a leaf whose polynomial agrees with p - theta
        for _ in range(40):
            x = [rng.choice([-1, 1]) for _ in range(n)]
            assert tree.route(x, theta).poly(x) == p(x) - theta


@given(multilinear_polys(max_n=7), st.fractions(-5, 5, max_denominator=3))
def test_leaf_restrictions_partition_the_cube(p, theta):
    tree = RegularityTree(p, SHALLOW[0])
    hits = np.zeros(1 << p.n, dtype=int)
    for lf in tree.leaves(theta):
        for idx, x in enumerate(itertools.product([-1, 1], repeat=p.n)):
            if all(x[i] == s for i, s in lf.restriction.items()):
                hits[idx] += 1
                assert lf.poly(list(x)) == p(list(x)) - theta
    assert (hits == 1).all()


def test_count_many_matches_count():
    rng = random.Random(4)
    for _ in range(3):
        p = random_multilinear(rng, rng.randint(4, 9))
        thetas = [Fraction(rng.randint(-40, 40), rng.choice([1, 2, 3])) for _ in range(10)]
        for params in SHALLOW[:2]:
            a = RegularityTree(p, params).count_many(thetas, Fraction(1, 5), block=4)
            b = [RegularityTree(p, params).count(t, Fraction(1, 5)) for t in thetas]
            assert a == b


def test_count_boolean_examples():
    eps = Fraction(15, 100)
    p = Degree2Polynomial(3, lin={0: 1, 1: 1, 2: 1}, multilinear=True)
    assert abs(count_boolean(p, eps) - Fraction(1, 2)) <= eps
    cut_at_least_two = graph_cut_poly([(0, 1), (1, 2), (0, 2)], 3).scaled(2) - 3
    assert abs(count_boolean(cut_at_least_two, eps) - Fraction(3, 4)) <= eps


def test_count_boolean_random_vs_enumeration():
    rng = random.Random(14)
    for _ in range(4):
        p = random_multilinear(rng, 14)
        v = count_boolean(p, Fraction(15, 100))
        assert abs(v - brute_force_boolean(p)) <= Fraction(15, 100)


def test_count_boolean_reports_leaf_statistics():
    info = {}
    p = random_multilinear(random.Random(2), 8)
    count_boolean(p, Fraction(1, 5), info=info)
    assert isinstance(info.pop("tree"), RegularityTree)
    assert {"plus_leaves", "minus_leaves", "fail_leaves", "regular_leaves"} <= set(info)


def test_regular_fast_path():
    n = 40
    p = Degree2Polynomial(n, lin={i: 1 for i in range(n)}, multilinear=True)
    assert abs(count_boolean_regular(p, Fraction(1, 10), tau=Fraction(1, 20)) - Fraction(1, 2)) <= Fraction(1, 10)
    n = 14
    sym = Degree2Polynomial(n, {(i, j): 1 for i in range(n) for j in range(i + 1, n)}, multilinear=True)
    v = count_boolean_regular(sym, Fraction(1, 10), tau=Fraction(1, 10))
    assert abs(v - brute_force_boolean(sym)) <= Fraction(1, 10)
    with pytest.raises(PreconditionError):
        count_boolean_regular(Degree2Polynomial(3, lin={0: 5, 1: 1}, multilinear=True), Fraction(1, 10))


def test_preconditions_and_budget():
    with pytest.raises(PreconditionError):
        RegularityTree(Degree2Polynomial(2, {(0, 0): 1}), SHALLOW[0])
    with pytest.raises(ValueError):
        count_boolean(Degree2Polynomial(2, lin={0: 1}, multilinear=True), Fraction(0))
    rng = random.Random(8)
    p = random_multilinear(rng, 16)
    tiny = BooleanParams(max_leaves=64)
    with pytest.raises(FeasibilityError):
        count_boolean(p, Fraction(15, 100), tiny)


def test_dump_rows():
    p = random_multilinear(random.Random(3), 6)
    tree = RegularityTree(p, SHALLOW[1])
    rows = tree.dump(Fraction(1, 2))
    assert len(rows) == len(list(tree.leaves(Fraction(1, 2))))
    for r in rows:
        assert r["label"] in (PLUS, MINUS, FAIL, REGULAR)
        assert all(1 <= v <= p.n for H, _ in r["path"] for v in H)
        assert isinstance(r["digest"], str) and r["digest"]
