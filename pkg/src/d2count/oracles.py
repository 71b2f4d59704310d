"""Independent reference computations used to check the counters.

None of these share code paths with the algorithms they check: hypercube
probabilities come from exhaustive enumeration, Gaussian probabilities from
seeded Monte Carlo, the normal CDF and eigenvalues from mpmath.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np
from scipy import special

from .errors import PreconditionError
from .poly import Degree2Polynomial, integer_scale, quadratic_matrix

ENUM_CAP_MAX = 24


@dataclass(frozen=True)
class OracleConfig:
    mc_seed: int = 0x5EED_D2C0
    mc_samples: int = 10**6
    enum_cap: int = 20
    cdf_precision: int = 64
    chunk: int = 1 << 17

    def __post_init__(self):
        if not 0 < self.enum_cap <= ENUM_CAP_MAX:
            raise ValueError(f"enum_cap must lie in 1..{ENUM_CAP_MAX}")


def _integer_form(p: Degree2Polynomial):
    D = integer_scale(p)
    n = p.n
    A = np.zeros((n, n), dtype=np.int64)
    for (i, j), a in p.quad.items():
        A[i, j] = int(a * D)
    b = np.zeros(n, dtype=np.int64)
    for i, v in p.lin.items():
        b[i] = int(v * D)
    return A, b, int(p.constant * D), D


def hypercube_values(p: Degree2Polynomial, cfg: OracleConfig = OracleConfig()):
    """Yield exact integer values of D * p over {-1,1}^n in chunks, with D."""
    if p.n > cfg.enum_cap:
        raise PreconditionError(f"n={p.n} exceeds the enumeration cap {cfg.enum_cap}")
    if any(i == j for i, j in p.quad):
        raise PreconditionError("enumeration expects a multilinear polynomial")
    A, b, c, D = _integer_form(p)
    bound = abs(c) + int(np.abs(A).sum()) + int(np.abs(b).sum())
    if bound >= 1 << 62:
        raise PreconditionError("coefficients too large for exact enumeration")
    n = p.n
    total = 1 << n
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, cfg.chunk):
        idx = np.arange(start, min(total, start + cfg.chunk), dtype=np.int64)
        X = 2 * ((idx[:, None] >> shifts[None, :]) & 1) - 1
        vals = c + X @ b + np.sum((X @ A) * X, axis=1)
        yield vals, D


def brute_force_boolean(p: Degree2Polynomial, predicate: Callable | None = None,
                        cfg: OracleConfig = OracleConfig()) -> Fraction:
    """Exact fraction of x in {-1,1}^n with predicate(values, D) true; default p(x) >= 0.

    ``values`` holds D * p(x) as int64 for a common positive integer D.
    """
    hits = 0
    for vals, D in hypercube_values(p, cfg):
        mask = vals >= 0 if predicate is None else predicate(vals, D)
        hits += int(np.count_nonzero(mask))
    return Fraction(hits, 1 << p.n)


def hypercube_distribution(p: Degree2Polynomial, cfg: OracleConfig = OracleConfig()) -> dict[Fraction, Fraction]:
    counts: Counter = Counter()
    D = 1
    for vals, D in hypercube_values(p, cfg):
        u, c = np.unique(vals, return_counts=True)
        for a, k in zip(u.tolist(), c.tolist()):
            counts[a] += k
    total = 1 << p.n
    return {Fraction(v, D): Fraction(k, total) for v, k in sorted(counts.items())}


def brute_force_abs_moment(p: Degree2Polynomial, k: int, normalize: bool = True,
                           cfg: OracleConfig = OracleConfig(), dps: int = 40):
    """E|p|^k (or E|p/||p||_2|^k) over the hypercube, as an mpmath number."""
    dist = hypercube_distribution(p, cfg)
    with mpmath.workdps(dps):
        total = mpmath.mpf(0)
        for v, w in dist.items():
            total += abs(mpmath.mpf(v.numerator) / v.denominator) ** k * (mpmath.mpf(w.numerator) / w.denominator)
        if normalize:
            S = sum((v * v * w for v, w in dist.items()), Fraction(0))
            total /= (mpmath.mpf(S.numerator) / S.denominator) ** (mpmath.mpf(k) / 2)
        return +total


def mc_gaussian(p: Degree2Polynomial, predicate: Callable | None = None,
                cfg: OracleConfig = OracleConfig()) -> tuple[float, float]:
    """Seeded Monte Carlo estimate of Pr_{x ~ N(0,I)}[predicate(p(x))] with its standard error.

    Normals come from inverse-CDF transformation of PCG64 uniforms, so the
    stream is fixed by the seed alone.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.mc_seed))
    A = np.array(quadratic_matrix(p), dtype=float) if p.n else np.zeros((0, 0))
    b = np.array([float(p.lin.get(i, 0)) for i in range(p.n)])
    c = float(p.constant)
    hits = 0
    done = 0
    while done < cfg.mc_samples:
        m = min(cfg.chunk, cfg.mc_samples - done)
        U = rng.random((m, p.n))
        # map [0,1) into the open interval so ndtri stays finite
        X = special.ndtri((U + 0.5 / 2**53) * (1 - 2.0**-53))
        vals = np.sum((X @ A) * X, axis=1) + X @ b + c
        mask = vals >= 0 if predicate is None else predicate(vals)
        hits += int(np.count_nonzero(mask))
        done += m
    est = hits / cfg.mc_samples
    se = math.sqrt(max(est * (1 - est), 1.0 / cfg.mc_samples) / cfg.mc_samples)
    return est, se


def normal_cdf_hp(x, bits: int = 64):
    """Phi(x) to within 2^-bits, as an mpmath number."""
    with mpmath.workprec(bits + 32):
        if isinstance(x, Fraction):
            xm = mpmath.mpf(x.numerator) / x.denominator
        else:
            xm = mpmath.mpf(x)
        return +mpmath.ncdf(xm)


def cover_max_deviation(numerators, denominator: int, bits: int = 64) -> float:
    """max over support points of |F_T - Phi| (both one-sided limits) using normal_cdf_hp."""
    vals = sorted(Counter(numerators).items())
    N = len(numerators)
    below = 0
    worst = mpmath.mpf(0)
    for a, c in vals:
        phi = normal_cdf_hp(Fraction(a, denominator), bits)
        lo = mpmath.mpf(below) / N
        below += c
        hi = mpmath.mpf(below) / N
        worst = max(worst, abs(phi - lo), abs(hi - phi))
    return float(worst)


def eigenvalues_hp(A, prec: int = 128) -> list:
    """Eigenvalues of a symmetric rational matrix, via mpmath at the given precision."""
    A = np.asarray(A, dtype=object)
    with mpmath.workprec(prec):
        M = mpmath.matrix([[_mp(v) for v in row] for row in A])
        E = mpmath.eigsy(M, eigvals_only=True)
        return [+e for e in E]


def _mp(v):
    v = Fraction(v)
    return mpmath.mpf(v.numerator) / v.denominator


def max_abs_eigenvalue_hp(A, prec: int = 128):
    return max(abs(e) for e in eigenvalues_hp(A, prec))
