"""Largest-magnitude eigenpair of a symmetric matrix by the shifted powering method.

The matrix power A'^k is formed by repeated squaring in extended precision
(numpy longdouble, 64-bit significand) with a power-of-two renormalization after
every product, so the astronomically large k that the accuracy targets call for
costs only about log2(k) products. Squaring stops early once the normalized
powers reach a numerical fixed point; every later factor is then the same
rank-deficient projector and cannot change the normalized result.

The returned eigenvector is an exact rational unit vector and the eigenvalue
estimate is an exact rational rounded down, so ``lambda_tilde <= |A w|``
holds exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .poly import as_fraction, unit_rational_vector

PAIR = "pair"
SMALL = "small_max_eigenvalue"


@dataclass(frozen=True)
class SpectralParams:
    precision_bits: int = 64
    max_products: int = 10**6
    fixed_point_bits: int = 58


def _fraction_ceil_sqrt(x: Fraction) -> int:
    if x <= 0:
        return 0
    p, q = x.numerator, x.denominator
    r = math.isqrt(p // q)
    while r * r * q < p:
        r += 1
    return r


def _fraction_floor_sqrt(x: Fraction) -> int:
    return math.isqrt(math.floor(x)) if x > 0 else 0


def delta_for(eps, eta) -> Fraction:
    eps, eta = as_fraction(eps), as_fraction(eta)
    return min(eps**4 / 100, eta**4 / 10**8)


def iteration_count(n: int, delta) -> int:
    """k = ceil(log(9n/4) / (2 delta)), computed without overflow for tiny delta."""
    delta = as_fraction(delta)
    x = Fraction(math.log(9 * n / 4)) / (2 * delta)
    return max(1, math.ceil(x))


def integer_matrix(A) -> tuple[np.ndarray, int]:
    """(M, D) with integer object matrix M and A = M / D exactly."""
    A = np.asarray(A, dtype=object)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if A.size and all(isinstance(v, (int, np.integer)) for v in A.ravel()):
        M = np.array([[int(v) for v in row] for row in A], dtype=object)
        if not all(M[i, j] == M[j, i] for i in range(len(M)) for j in range(i)):
            raise ValueError("matrix is not symmetric")
        return M, 1
    F = np.vectorize(as_fraction, otypes=[object])(A) if A.size else A
    D = 1
    for v in F.ravel():
        D = math.lcm(D, v.denominator)
    M = np.empty(F.shape, dtype=object)
    for idx, v in np.ndenumerate(F):
        M[idx] = v.numerator * (D // v.denominator)
    n = M.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if M[i, j] != M[j, i]:
                raise ValueError("matrix is not symmetric")
    return M, D


def _to_longdouble(M: np.ndarray, shift: int) -> np.ndarray:
    out = np.empty(M.shape, dtype=np.longdouble)
    for idx, v in np.ndenumerate(M):
        out[idx] = np.longdouble(int(v) >> shift if shift > 0 else int(v))
    return out


def _renormalize(X: np.ndarray) -> np.ndarray:
    m = np.max(np.abs(X))
    if not m > 0:
        raise ArithmeticError("iterate underflowed to zero")
    _, e = np.frexp(m)
    return np.ldexp(X, -e)


def matrix_power_normalized(Ap: np.ndarray, k: int, params: SpectralParams = SpectralParams()):
    """Positive multiple of Ap**k, with the number of products used.

    Ap must be positive semidefinite so that normalized squares converge.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    tol = np.ldexp(np.longdouble(1), -params.fixed_point_bits)
    S = _renormalize(Ap)
    result = None
    products = 0
    kk = k
    while True:
        if kk & 1:
            result = S if result is None else _renormalize(result @ S)
            products += 1
        kk >>= 1
        if kk == 0:
            break
        S2 = _renormalize(S @ S)
        products += 1
        if products > params.max_products:
            raise RuntimeError(f"powering exceeded {params.max_products} matrix products")
        converged = np.max(np.abs(S2 / np.max(np.abs(S2)) - S / np.max(np.abs(S)))) <= tol
        S = S2
        if converged:
            # every remaining factor equals S up to rounding, and S is idempotent up to scale
            result = S if result is None else _renormalize(result @ S)
            products += 1
            break
    return result, products


def power_iterate(A_prime, start: int, k: int, params: SpectralParams = SpectralParams()):
    """(mu, v): mu = |A' A'^k e_start|^2 / |A'^k e_start|^2 and v the normalized iterate."""
    Ap = np.asarray(A_prime, dtype=np.longdouble)
    P, _ = matrix_power_normalized(Ap, k, params)
    c = P[:, start]
    nc = np.sum(c * c)
    if not nc > 0:
        raise ArithmeticError("iterate underflowed to zero")
    Ac = Ap @ c
    return float(np.sum(Ac * Ac) / nc), (c / np.sqrt(nc)).astype(float)


@dataclass(frozen=True)
class EigenResult:
    kind: str
    lambda_tilde: Fraction | None = None
    w_tilde: tuple[Fraction, ...] | None = None
    sign: int = 1
    diagnostics: dict = field(default_factory=dict)
    # exact integer form of w_tilde: w = w_num / w_den
    w_num: tuple[int, ...] | None = None
    w_den: int | None = None

    @property
    def is_pair(self) -> bool:
        return self.kind == PAIR

    @property
    def signed_lambda(self) -> Fraction:
        return self.sign * self.lambda_tilde

    def w_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.w_tilde])


def deflate(A, lam, w) -> np.ndarray:
    """B = A - lam * w w^T, exact when the inputs are rational."""
    A = np.asarray(A, dtype=object)
    w = np.array([as_fraction(x) for x in w], dtype=object)
    return A - as_fraction(lam) * np.outer(w, w)


def _top_direction(Mld: np.ndarray, shift_units: np.longdouble, sign: int, k: int, params: SpectralParams):
    n = Mld.shape[0]
    Ap = sign * Mld + shift_units * np.eye(n, dtype=np.longdouble)
    Ap = _renormalize(Ap)
    P, products = matrix_power_normalized(Ap, k, params)
    norms = np.sum(P * P, axis=0)
    AP = Ap @ P
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(norms > 0, np.sum(AP * AP, axis=0) / norms, -np.inf)
    i_star = int(np.argmax(mu))
    return P[:, i_star], i_star, products


def approximate_largest_eigen(A, eps, eta, params: SpectralParams = SpectralParams()) -> EigenResult:
    """Approximate top eigenpair of symmetric A, or report that it is small.

    Both shifted matrices tI + A and tI - A are powered so that a dominant
    negative eigenvalue is found as well; ``sign`` records which one won.
    """
    eps, eta = as_fraction(eps), as_fraction(eta)
    if not (0 < eps < 1 and 0 < eta < 1):
        raise ValueError("eps and eta must lie in (0, 1)")
    M, D = integer_matrix(A)
    n = M.shape[0]
    fro_sq_int = sum(int(v) * int(v) for v in M.ravel())
    if fro_sq_int == 0:
        raise ValueError("matrix is all zero")
    fro_sq = Fraction(fro_sq_int, D * D)
    delta = delta_for(eps, eta)
    diag: dict = {"n": n, "delta": float(delta)}

    if n == 1:
        a = Fraction(int(M[0, 0]), D)
        u, d = [1], 1
        lam = abs(a)
        sign = 1 if a >= 0 else -1
        diag.update(k=0, products=0, i_star=0, shift=0, residual=0.0)
        return EigenResult(PAIR, lam, (Fraction(1),), sign, diag, (1,), 1)

    k = iteration_count(n, delta)
    t = _fraction_ceil_sqrt(fro_sq)
    bitlen = max(int(abs(v)).bit_length() for v in M.ravel())
    shift = max(0, bitlen - 63)
    Mld = _to_longdouble(M, shift)
    t_units = np.longdouble((t * D) >> shift) if shift else np.longdouble(t * D)

    best = None
    total_products = 0
    for sign in (1, -1):
        v, i_star, products = _top_direction(Mld, t_units, sign, k, params)
        total_products += products
        u, d = unit_rational_vector(v, params.precision_bits)
        Mu = [sum(int(M[i, j]) * u[j] for j in range(n)) for i in range(n)]
        num = sum(x * x for x in Mu)  # |A w|^2 = num / (D d)^2
        aw_sq = Fraction(num, (D * d) ** 2)
        if best is None or aw_sq > best[0]:
            rq = Fraction(sum(u[i] * Mu[i] for i in range(n)), D * d * d)
            best = (aw_sq, u, d, i_star, rq, Mu)
    aw_sq, u, d, i_star, rq, Mu = best

    # round |A w| down onto a dyadic grid relative to |A|_F
    e = _fraction_floor_sqrt(fro_sq).bit_length()
    grid = Fraction(2) ** (e - params.precision_bits)
    lam = grid * _fraction_floor_sqrt(aw_sq / (grid * grid))
    sign = 1 if rq >= 0 else -1

    # residual |A w - sign lam w| for diagnostics
    res_sq = sum(
        (Fraction(Mu[i], D * d) - sign * lam * Fraction(u[i], d)) ** 2 for i in range(n)
    )
    diag.update(
        k=k,
        products=total_products,
        i_star=i_star,
        shift=t,
        residual=math.sqrt(float(res_sq)),
        rayleigh=float(rq),
    )
    quarter_delta = Fraction(float(delta) ** 0.25)
    threshold = (1 - 9 * quarter_delta) * eps * eps * fro_sq
    w = tuple(Fraction(x, d) for x in u)
    if lam * lam >= threshold:
        return EigenResult(PAIR, lam, w, sign, diag, tuple(u), d)
    return EigenResult(SMALL, None, None, 1, diag)
