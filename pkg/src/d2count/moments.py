"""Absolute moments E|q(x)|^k over the hypercube for q = p / ||p||_2.

The line is cut into buckets of width Delta. Each bucket's probability mass
is a difference of two hypercube threshold counts, weighted by the larger
endpoint's magnitude to the k-th power. Buckets within k/tau of zero and
beyond M are dropped; the tail bound for degree-2 polynomials makes both
contributions small.

Because D * p takes integer values, the threshold count at t only depends on
the integer ceil(t * D * ||p||). The sum over buckets is therefore regrouped
over the integers v in range: bucket differences telescope into terms
(c(v) - c(v+1)) with c(v) the count for D * p >= v, each weighted by the
bucket that contains v.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .boolcount import BooleanParams, RegularityTree
from .errors import FeasibilityError, PreconditionError
from .gausscount import CountParams
from .poly import Degree2Polynomial, as_fraction, integer_scale, raw_moment_exact


@dataclass(frozen=True)
class MomentParams:
    c_M: float = 2.0
    k_cap: int = 5
    eps_floor: float = 0.02
    max_thresholds: int = 1 << 16

    def derive(self, k: int, eps) -> dict:
        eps = as_fraction(eps)
        M = math.ceil(self.c_M * k * max(1.0, math.log(k)) * math.log(1 / float(eps)))
        M = max(M, 1)
        tau = eps / (4 * Fraction(M) ** k)
        # largest Delta = 1/2^r with Delta^k <= (eps/4) (tau/k)^k, an exact test
        bound = (eps / 4) * (tau / k) ** k
        r = 0
        while Fraction(1, 1 << r) ** k > bound:
            r += 1
        delta = Fraction(1, 1 << r)
        j_lo = math.ceil(k / tau) - 1
        j_hi = M * (1 << r)
        return {
            "M": M,
            "tau": tau,
            "delta": delta,
            "j_lo": j_lo,
            "j_hi": j_hi,
            "buckets": 2 * max(0, j_hi - j_lo + 1),
            "bucket_accuracy": tau / 4,
        }


def _floor_ratio_sqrt(num_sq: Fraction) -> int:
    """floor(sqrt(x)) for a nonnegative rational x."""
    if num_sq <= 0:
        return 0
    p, q = num_sq.numerator, num_sq.denominator
    r = math.isqrt(p // q)
    while (r + 1) * (r + 1) * q <= p:
        r += 1
    while r * r * q > p:
        r -= 1
    return r


def _ceil_ratio_sqrt(x: Fraction) -> int:
    r = _floor_ratio_sqrt(x)
    return r if r * r == x else r + 1


def _norm_sq(p: Degree2Polynomial) -> Fraction:
    return raw_moment_exact(p, 2)


def _tree_for(p: Degree2Polynomial, accuracy: Fraction, bparams: BooleanParams) -> RegularityTree:
    # each bucket is a difference of two counts at half the bucket accuracy
    per_count = accuracy / 2
    return RegularityTree(p, bparams.regularity(per_count))


def interval_prob(p: Degree2Polynomial, delta, j: int, accuracy, bparams: BooleanParams = BooleanParams(),
                  count_params: CountParams = CountParams(), closed: bool = True) -> Fraction:
    """Estimate of Pr[q(x) in [(j-1) delta, j delta]] for q = p / ||p||_2.

    ``closed=False`` drops the right endpoint, matching the buckets of
    :func:`absolute_moment`.
    """
    delta, accuracy = as_fraction(delta), as_fraction(accuracy)
    S = _norm_sq(p)
    if S == 0:
        raise PreconditionError("polynomial is identically zero")
    D = integer_scale(p)
    tree = _tree_for(p, accuracy, bparams)
    lo = _threshold(j - 1, delta, D, S)
    hi = _floor_threshold(j, delta, D, S) + 1 if closed else _threshold(j, delta, D, S)
    c = tree.count_many([Fraction(lo, D), Fraction(hi, D)], accuracy / 2, count_params)
    return c[0] - c[1]


def _threshold(j: int, delta: Fraction, D: int, S: Fraction) -> int:
    """ceil(j * delta * D * sqrt(S)) exactly."""
    x = (j * delta * D) ** 2 * S
    return _ceil_ratio_sqrt(x) if j >= 0 else -_floor_ratio_sqrt(x)


def _floor_threshold(j: int, delta: Fraction, D: int, S: Fraction) -> int:
    """floor(j * delta * D * sqrt(S)) exactly."""
    x = (j * delta * D) ** 2 * S
    return _floor_ratio_sqrt(x) if j >= 0 else -_ceil_ratio_sqrt(x)


@dataclass
class MomentResult:
    value: Fraction
    plus: Fraction
    minus: Fraction
    norm_sq: Fraction
    params: dict
    thresholds: int
    buckets: list

    @property
    def unnormalized(self) -> float:
        """Estimate of E|p|^k = ||p||^k * E|q|^k."""
        k = self.params["k"]
        return float(self.value) * float(self.norm_sq) ** (k / 2)


def absolute_moment(p: Degree2Polynomial, k: int, eps, params: MomentParams = MomentParams(),
                    bparams: BooleanParams = BooleanParams(), count_params: CountParams = CountParams(),
                    detail: bool = False) -> MomentResult:
    """Additive-eps estimate of E|q(x)|^k over the hypercube, q = p / ||p||_2."""
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if k < 1:
        raise ValueError("k must be a positive integer")
    if any(i == j for i, j in p.quad):
        raise PreconditionError("moments need a multilinear polynomial")
    d = params.derive(k, eps)
    if k > params.k_cap:
        raise FeasibilityError(
            f"k={k} exceeds the cap {params.k_cap}; it would need {d['buckets']} buckets"
        )
    if eps < as_fraction(params.eps_floor):
        raise FeasibilityError(f"eps={float(eps)} is below the floor {params.eps_floor}")
    S = _norm_sq(p)
    if S == 0:
        raise PreconditionError("polynomial is identically zero")
    D = integer_scale(p)
    delta, j_lo, j_hi = d["delta"], d["j_lo"], d["j_hi"]
    acc = d["bucket_accuracy"]
    scale_sq = (delta * D) ** 2 * S  # (Delta * D * ||p||)^2

    # integer v with (j_lo - 1) Delta s <= v <= j_hi Delta s, s = D ||p||
    v_lo = _threshold(j_lo - 1, delta, D, S)
    v_hi = _floor_ratio_sqrt(Fraction(j_hi) ** 2 * scale_sq)
    if 2 * (v_hi - v_lo + 2) > params.max_thresholds:
        raise FeasibilityError(f"moment needs {2 * (v_hi - v_lo + 2)} threshold counts")
    pos_v = list(range(v_lo, v_hi + 1))
    neg_v = list(range(-v_hi, -v_lo + 1))
    grid = sorted(set(pos_v) | {v + 1 for v in pos_v} | set(neg_v) | {v + 1 for v in neg_v})
    tree = _tree_for(p, acc, bparams)
    counts = dict(zip(grid, tree.count_many([Fraction(v, D) for v in grid], acc / 2, count_params)))

    buckets: dict[int, Fraction] = {}
    for v in pos_v:
        # bucket m holds q in [(m-1) Delta, m Delta); the last bucket is closed
        m = min(_floor_ratio_sqrt(Fraction(v * v) / scale_sq) + 1, j_hi)
        buckets[m] = buckets.get(m, Fraction(0)) + counts[v] - counts[v + 1]
    plus = sum(((m * delta) ** k * w for m, w in buckets.items()), Fraction(0))
    neg_buckets: dict[int, Fraction] = {}
    for v in neg_v:
        # bucket m holds q in [-m Delta, -(m-1) Delta)
        m = _ceil_ratio_sqrt(Fraction(v * v) / scale_sq)
        if v == 0 or m < j_lo:
            continue
        neg_buckets[m] = neg_buckets.get(m, Fraction(0)) + counts[v] - counts[v + 1]
    minus = sum(((m * delta) ** k * w for m, w in neg_buckets.items()), Fraction(0))
    rows = []
    if detail:
        rows = [{"side": "+", "j": m, "mass": str(w)} for m, w in sorted(buckets.items())]
        rows += [{"side": "-", "j": m, "mass": str(w)} for m, w in sorted(neg_buckets.items())]
    snap = {k_: (str(v) if isinstance(v, Fraction) else v) for k_, v in d.items()}
    snap["k"] = k
    return MomentResult(plus + minus, plus, minus, S, snap, len(grid), rows)
