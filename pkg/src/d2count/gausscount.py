"""Counting for decoupled juntas over Gaussians and the end-to-end Gaussian counter.

A decoupled junta sum_i (l_i y_i^2 + m_i y_i) + C is a sum of independent
one-dimensional variables. Each coordinate is replaced by the image of a
discrete cover of N(0,1) under t -> l t^2 + m t, and the probability that the
resulting independent sum clears the threshold is computed exactly by a
dynamic program over integer grid points.

The dynamic program stores a whole layer as one big integer whose W-bit
slots hold the outcome counts (Kronecker substitution), so a layer update is
a single big-integer product.
"""
from __future__ import annotations

import bisect
import functools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np
from scipy import special, stats

from .decouple import JuntaParams, construct_junta
from .errors import FeasibilityError, PreconditionError
from .poly import DecoupledPolynomial, Degree2Polynomial, as_fraction, variance_gaussian
from .spectral import SpectralParams


def _binary_reciprocal_exponent(x) -> int:
    x = as_fraction(x)
    if x <= 0 or x.numerator != 1 or x.denominator & (x.denominator - 1):
        raise PreconditionError(f"{x} is not of the form 1/2^j")
    return x.denominator.bit_length() - 1


@dataclass(frozen=True)
class NormalCover:
    """Uniform distribution on ``numerators / denominator`` approximating N(0,1)."""

    numerators: tuple[int, ...]
    denominator: int
    eps_star: Fraction
    binomial_n: int
    deviation: float

    @property
    def points(self) -> list[Fraction]:
        return [Fraction(a, self.denominator) for a in self.numerators]

    def __len__(self) -> int:
        return len(self.numerators)


def _round_half_toward_zero(x: Fraction) -> int:
    f = math.floor(x)
    r = x - f
    if r > Fraction(1, 2):
        return f + 1
    if r < Fraction(1, 2):
        return f
    return f + 1 if x < 0 else f


def cover_deviation(numerators: Sequence[int], denominator: int) -> float:
    """sup_t |F_T(t) - Phi(t)| for the uniform distribution on the given points."""
    vals, counts = np.unique(np.asarray(numerators, dtype=np.int64), return_counts=True)
    cdf_hi = np.cumsum(counts) / len(numerators)
    cdf_lo = cdf_hi - counts / len(numerators)
    phi = special.ndtr(vals / denominator)
    return float(max(np.max(np.abs(cdf_hi - phi)), np.max(np.abs(cdf_lo - phi))))


def normal_cover(eps_star, binomial_constant: int = 100) -> NormalCover:
    return _normal_cover(as_fraction(eps_star), binomial_constant)


@functools.lru_cache(maxsize=32)
def _normal_cover(eps_star: Fraction, binomial_constant: int) -> NormalCover:
    """4/eps_star equally weighted points whose CDF is within eps_star of Phi.

    Built from a standardized Binomial(n, 1/2) with n an odd perfect square of
    order 1/eps_star^2: the binomial is collapsed to 2/eps_star quantile points,
    each value is rounded to a multiple of eps_star/4 and every point is
    duplicated.
    """
    j = _binary_reciprocal_exponent(eps_star)
    eps_star = Fraction(1, 1 << j)
    m = math.isqrt(binomial_constant * 4**j - 1) + 1  # m^2 >= constant / eps*^2
    if m % 2 == 0:
        m += 1
    n = m * m
    mid = (n + 1) // 2
    half_width = 6 * m  # 12 standard deviations
    ks = np.arange(max(0, mid - half_width), min(n, mid + half_width) + 1)
    cdf = stats.binom.cdf(ks, n, 0.5)
    slots = 2 << j  # 2 / eps*
    levels = (np.arange(1, slots + 1) - 0.5) / slots
    idx = np.searchsorted(cdf, levels, side="left")
    grid = 4 << j  # values become multiples of eps*/4 = 1/grid
    nums = []
    for k in ks[idx]:
        z = Fraction(2 * int(k) - n, m)  # (k - n/2) / (sqrt(n)/2)
        a = _round_half_toward_zero(z * grid)
        nums.extend((a, a))
    nums.sort()
    dev = cover_deviation(nums, grid)
    if dev > float(eps_star):
        raise ArithmeticError(f"cover deviation {dev} exceeds {float(eps_star)}")
    return NormalCover(tuple(nums), grid, eps_star, n, dev)


@dataclass(frozen=True)
class DiscreteSupport:
    """Uniform distribution on the multiset ``{a * scale : a in numerators}``."""

    numerators: tuple[int, ...]
    scale: Fraction

    def __post_init__(self):
        object.__setattr__(self, "numerators", tuple(int(a) for a in self.numerators))
        object.__setattr__(self, "scale", as_fraction(self.scale))
        if not self.numerators:
            raise ValueError("support must be nonempty")

    @property
    def values(self) -> list[Fraction]:
        return [a * self.scale for a in self.numerators]

    @property
    def R(self) -> int:
        return len(self.numerators)

    @classmethod
    def from_values(cls, values: Sequence, scale) -> "DiscreteSupport":
        scale = as_fraction(scale)
        nums = []
        for v in values:
            a = as_fraction(v) / scale
            if a.denominator != 1:
                raise PreconditionError(f"value {v} is not on the grid {scale}")
            nums.append(a.numerator)
        return cls(tuple(nums), scale)


def discretize(ell: int, m: int, eps_star, cover: NormalCover | None = None) -> DiscreteSupport:
    """Image of the normal cover under t -> ell t^2 + m t."""
    if cover is None:
        cover = normal_cover(eps_star)
    elif as_fraction(eps_star) != cover.eps_star:
        raise ValueError("cover was built for a different eps_star")
    G = cover.denominator
    ell, m = int(ell), int(m)
    nums = tuple(ell * a * a + m * a * G for a in cover.numerators)
    return DiscreteSupport(nums, Fraction(1, G * G))


# dynamic program ------------------------------------------------------------

PACKED_SLOT_LIMIT = 1 << 22


def _histograms(supports: Sequence[DiscreteSupport]):
    out = []
    for s in supports:
        c = Counter(s.numerators)
        lo = min(c)
        out.append((lo, max(c) - lo, sorted((v - lo, k) for v, k in c.items())))
    return out


def _pack(hist, slots: int, width_bytes: int) -> gmpy2.mpz:
    arr = np.zeros((slots, width_bytes), dtype=np.uint8)
    offs = np.array([o for o, _ in hist], dtype=np.int64)
    counts = np.array([k for _, k in hist], dtype="<u8").view(np.uint8).reshape(-1, 8)
    arr[offs, :8] = counts
    return gmpy2.mpz(int.from_bytes(arr.tobytes(), "little"))


def dp_count(supports: Sequence[DiscreteSupport], tau) -> Fraction:
    """Exact Pr[X_1 + ... + X_K + tau >= 0] for independent uniform X_i on the supports."""
    tau = as_fraction(tau)
    if not supports:
        return Fraction(int(tau >= 0))
    scale = supports[0].scale
    if any(s.scale != scale for s in supports):
        raise PreconditionError("supports are not on a common grid")
    need = math.ceil(-tau / scale)  # sum of numerators must reach this
    hists = _histograms(supports)
    total = math.prod(s.R for s in supports)
    base = sum(lo for lo, _, _ in hists)
    span = sum(sp for _, sp, _ in hists)
    target = need - base  # threshold on the sum of offsets
    if target <= 0:
        return Fraction(1)
    if target > span:
        return Fraction(0)
    if span + 1 <= PACKED_SLOT_LIMIT:
        count = _packed_count(hists, total, span, target)
    else:
        count = _sparse_count(hists, target)
    return Fraction(count, total)


def _packed_count(hists, total: int, span: int, target: int) -> int:
    width_bytes = max(8, (total.bit_length() + 1 + 7) // 8)
    W = 8 * width_bytes
    acc = gmpy2.mpz(1)
    for _, sp, h in hists:
        acc *= _pack(h, sp + 1, width_bytes)
    tail = acc >> (W * target)
    return int(tail % ((gmpy2.mpz(1) << W) - 1))


def _layer(hists) -> dict[int, int]:
    layer = {0: 1}
    for _, _, h in hists:
        nxt: dict[int, int] = {}
        for s, c in layer.items():
            for o, k in h:
                nxt[s + o] = nxt.get(s + o, 0) + c * k
        layer = nxt
    return layer


def _sparse_count(hists, target: int) -> int:
    """Meet in the middle: exact sum distributions of two halves, joined by a suffix count."""
    half = len(hists) // 2
    left, right = _layer(hists[:half]), _layer(hists[half:])
    rv = sorted(right)
    suffix = [0] * (len(rv) + 1)
    for i in range(len(rv) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + right[rv[i]]
    lim = 1 << 62
    small = abs(target) + max(map(abs, left), default=0) < lim and max(abs(rv[0]), abs(rv[-1])) < lim
    if not small or len(left) * len(rv) < 1 << 12:
        return sum(c * suffix[bisect.bisect_left(rv, target - s)] for s, c in left.items())
    lv = np.fromiter(left, dtype=object, count=len(left))
    lc = np.fromiter(left.values(), dtype=object, count=len(left))
    idx = np.searchsorted(np.array(rv, dtype=np.int64), np.array(target - lv, dtype=np.int64), side="left")
    suf = np.array(suffix, dtype=object)
    return int(np.dot(lc, suf[idx]))


def dp_distribution(supports: Sequence[DiscreteSupport]) -> dict[Fraction, Fraction]:
    """Full exact distribution of the independent sum (small instances only)."""
    if not supports:
        return {Fraction(0): Fraction(1)}
    scale = supports[0].scale
    if any(s.scale != scale for s in supports):
        raise PreconditionError("supports are not on a common grid")
    layer = {0: 1}
    for s in supports:
        c = Counter(s.numerators)
        nxt: dict[int, int] = {}
        for v, w in layer.items():
            for a, k in c.items():
                nxt[v + a] = nxt.get(v + a, 0) + w * k
        layer = nxt
    total = math.prod(s.R for s in supports)
    return {v * scale: Fraction(w, total) for v, w in sorted(layer.items())}


# junta counting ---------------------------------------------------------------

def _pow2_floor(x: float) -> Fraction:
    _, e = math.frexp(x)
    return Fraction(2) ** (e - 1)


@dataclass(frozen=True)
class CountParams:
    c1: float = 1.0
    c2: float = 0.5
    dp_states: int = 1 << 15
    max_cover_points: int = 1 << 16
    binomial_constant: int = 100
    junta_fraction: float = 0.25

    def derive(self, eps, K: int) -> dict:
        eps = float(eps)
        polylog = math.log(1 / eps) ** 2
        return {
            "eps_prime": _pow2_floor(self.c1 * eps**6 / polylog),
            "eps_star": _pow2_floor(self.c2 * eps / max(K, 1)),
        }


def _round_half_even_div(a: int, h: int) -> int:
    q, r = divmod(a, h)
    twice = 2 * r
    if twice > h or (twice == h and q % 2 == 1):
        q += 1
    return q


def round_to_lattice(supports: Sequence[DiscreteSupport], states: int):
    """Snap all supports to a common coarser lattice when the exact sum has too many states.

    Returns the new supports and the lattice step (in units of the old grid).
    """
    distinct = 1
    span = 0
    for s in supports:
        distinct = min(distinct * len(set(s.numerators)), 1 << 62)
        span += max(s.numerators) - min(s.numerators)
    if min(distinct, span + 1) <= states:
        return list(supports), 1
    h = 1
    while span // h > states:
        h <<= 1
    out = []
    for s in supports:
        out.append(DiscreteSupport(tuple(_round_half_even_div(a, h) for a in s.numerators), s.scale * h))
    return out, h


def count_junta(q: DecoupledPolynomial, eps, params: CountParams = CountParams(), info: dict | None = None) -> Fraction:
    """Approximate Pr_{y ~ N(0, I_K)}[q(y) >= 0] to within eps."""
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    K = q.K
    coeffs = [abs(v) for v in (*q.lambdas, *q.mus)]
    M = max(coeffs, default=Fraction(0))
    if K == 0 or M == 0:
        return Fraction(int(q.constant >= 0))
    d = CountParams.derive(params, eps, K)
    eps_prime, eps_star = d["eps_prime"], d["eps_star"]
    if 4 / eps_star > params.max_cover_points:
        raise FeasibilityError(
            f"normal cover needs {int(4 / eps_star)} points, above the budget {params.max_cover_points}"
        )
    # step 1: relative rounding to integers of magnitude <= 2/eps'
    e = 0
    while Fraction(2) ** e < M:
        e += 1
    while e > -10**6 and Fraction(2) ** (e - 1) >= M:
        e -= 1
    unit = Fraction(2) ** e * eps_prime / 2
    lam = [round(v / unit) for v in q.lambdas]
    mu = [round(v / unit) for v in q.mus]
    tau = round(q.constant / unit)
    # step 2: discretize every coordinate over one shared cover
    cover = normal_cover(eps_star, params.binomial_constant)
    supports = [discretize(l, m, eps_star, cover) for l, m in zip(lam, mu)]
    supports, h = round_to_lattice(supports, params.dp_states)
    # step 3: exact count
    value = dp_count(supports, tau)
    if info is not None:
        info.update(
            eps_prime=str(eps_prime),
            eps_star=str(eps_star),
            cover_points=len(cover),
            lattice_step=h,
            K=K,
        )
    return value


def count_gaussian(
    p: Degree2Polynomial,
    eps,
    count: CountParams = CountParams(),
    junta: JuntaParams = JuntaParams(),
    spectral: SpectralParams = SpectralParams(),
    info: dict | None = None,
) -> Fraction:
    """Approximate Pr_{x ~ N(0, I_n)}[p(x) >= 0] to within eps, deterministically."""
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if variance_gaussian(p) == 0:
        return Fraction(int(p.constant >= 0))
    eps_junta = eps * as_fraction(count.junta_fraction)
    q, trace = construct_junta(p, eps_junta, junta, spectral)
    sub: dict = {}
    value = count_junta(q, eps / 2, count, sub)
    if info is not None:
        info.update(junta_exit=trace.exit, junta_K=q.K, iterations=len(trace.steps), **sub)
        info["trace"] = trace
    return value
