"""One-step spectral decoupling and the iterative reduction to a decoupled junta.

Internally a polynomial without constant term is held as integers
``(M, b, den)`` meaning ``(x^T M x + b^T x) / den`` with M symmetric, so that
every change of basis and rounding step is exact and costs O(n^2) big-integer
operations.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import PreconditionError
from .poly import (
    DecoupledPolynomial,
    Degree2Polynomial,
    as_fraction,
    quadratic_matrix,
    variance_gaussian,
)
from .spectral import SpectralParams, approximate_largest_eigen

SPLIT = "split"
SMALL = "small_max_eigenvalue"
LOW_VARIANCE = "low_variance"


def critical_index(main, aux, tau):
    """Least i with main[i] <= tau * sum_{j>=i}(main[j] + aux[j]) (0-based), else math.inf.

    main must be non-increasing. All-zero input returns 0.
    """
    c = [as_fraction(v) for v in main]
    d = [as_fraction(v) for v in aux]
    if len(c) != len(d):
        raise ValueError("sequences must have equal length")
    if any(c[i] < c[i + 1] for i in range(len(c) - 1)):
        raise ValueError("main sequence must be non-increasing")
    if any(v < 0 for v in c + d):
        raise ValueError("sequences must be nonnegative")
    tau = as_fraction(tau)
    if all(v == 0 for v in c + d):
        return 0
    tail = sum(c, Fraction(0)) + sum(d, Fraction(0))
    for i in range(len(c)):
        if c[i] <= tau * tail:
            return i
        tail -= c[i] + d[i]
    return math.inf


# integer representation ----------------------------------------------------

@dataclass
class _IntForm:
    M: np.ndarray  # symmetric, object dtype ints
    b: np.ndarray
    den: int

    @property
    def n(self) -> int:
        return len(self.b)

    def frob_sq(self) -> Fraction:
        return Fraction(sum(int(v) * int(v) for v in self.M.ravel()), self.den**2)

    def variance(self) -> Fraction:
        q = sum(int(v) * int(v) for v in self.M.ravel())
        l = sum(int(v) * int(v) for v in self.b)
        return Fraction(2 * q + l, self.den**2)

    def mean(self) -> Fraction:
        return Fraction(sum(int(self.M[i, i]) for i in range(self.n)), self.den)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.den).encode())
        for v in self.M.ravel():
            h.update(b"," + str(v).encode())
        for v in self.b:
            h.update(b";" + str(v).encode())
        return h.hexdigest()[:16]

    def to_polynomial(self) -> Degree2Polynomial:
        n = self.n
        quad = {}
        for i in range(n):
            quad[(i, i)] = Fraction(int(self.M[i, i]), self.den)
            for j in range(i + 1, n):
                quad[(i, j)] = Fraction(2 * int(self.M[i, j]), self.den)
        lin = {i: Fraction(int(self.b[i]), self.den) for i in range(n)}
        return Degree2Polynomial(n, quad, lin, 0)

    @classmethod
    def from_polynomial(cls, p: Degree2Polynomial, scale: Fraction = Fraction(1)) -> "_IntForm":
        A = quadratic_matrix(p) * scale
        bl = [p.lin.get(i, Fraction(0)) * scale for i in range(p.n)]
        den = 1
        for v in list(A.ravel()) + bl:
            den = math.lcm(den, as_fraction(v).denominator)
        M = np.empty((p.n, p.n), dtype=object)
        for idx, v in np.ndenumerate(A):
            v = as_fraction(v)
            M[idx] = v.numerator * (den // v.denominator)
        b = np.array([v.numerator * (den // v.denominator) for v in bl], dtype=object)
        return cls(M, b, den)

    def round_down(self, log2_inv_grid: int) -> "_IntForm":
        """Round every coefficient down to a multiple of 2**-log2_inv_grid."""
        m = log2_inv_grid
        if m < 0:
            raise ValueError("rounding grid must not exceed 1")
        n = self.n
        M = np.empty((n, n), dtype=object)
        b = np.empty(n, dtype=object)

        def fl(num: int) -> int:  # floor(num / den * 2**m)
            return (num << m) // self.den

        for i in range(n):
            M[i, i] = 2 * fl(int(self.M[i, i]))
            for j in range(i + 1, n):
                M[i, j] = M[j, i] = fl(2 * int(self.M[i, j]))
            b[i] = 2 * fl(int(self.b[i]))
        den = 1 << (m + 1)
        return _IntForm(M, b, den)


@dataclass(frozen=True)
class _SplitData:
    lam: Fraction
    mu: Fraction
    cross: tuple[Fraction, ...]  # coefficient of y * x_j in the residue
    next_form: _IntForm
    res_var: Fraction
    eigen: object


def _decompose_int(s: _IntForm, eps: Fraction, eta: Fraction, sparams: SpectralParams):
    var = s.variance()
    if var <= 0:
        raise PreconditionError("decomposition requires positive variance")
    if s.frob_sq() < eps * eps * var:
        return None, None
    eig = approximate_largest_eigen(s.M, eps, eta, sparams)
    if not eig.is_pair:
        return None, eig
    u = np.array([int(x) for x in eig.w_num], dtype=object)
    d = int(eig.w_den)
    M, b, den = s.M, s.b, s.den
    Mu = M.dot(u)
    uMu = int(u.dot(Mu))
    ub = int(u.dot(b))
    d2 = d * d
    lam = Fraction(uMu, d2 * den)
    mu = Fraction(ub, d * den)
    PAw = d2 * Mu - u * uMu  # / (d^3 den)
    cross = tuple(Fraction(2 * int(v), d**3 * den) for v in PAw)
    res_var = Fraction(4 * sum(int(v) * int(v) for v in PAw), d**6 * den * den)
    N = d2 * d2 * M - d2 * (np.outer(u, Mu) + np.outer(Mu, u)) + uMu * np.outer(u, u)
    bn = d2 * (d2 * b - u * ub)
    return _SplitData(lam, mu, cross, _IntForm(N, bn, d2 * d2 * den), res_var, eig), eig


@dataclass(frozen=True)
class DecomposeResult:
    kind: str
    lambda1: Fraction | None = None
    mu1: Fraction | None = None
    r: Degree2Polynomial | None = None
    eigen: object = None

    @property
    def is_split(self) -> bool:
        return self.kind == SPLIT

    def decoupled_part(self) -> Degree2Polynomial:
        """lambda1 y^2 + mu1 y + r over (y, x_1..x_n); y is variable 0."""
        n = self.r.n
        head = Degree2Polynomial(n, {(0, 0): self.lambda1}, {0: self.mu1}, 0)
        return head + self.r


def approximate_decompose(
    p: Degree2Polynomial, eps, eta, spectral: SpectralParams = SpectralParams()
) -> DecomposeResult:
    """Split off the top eigen-direction of p's quadratic part, or report it is small.

    On a split, ``r`` is a polynomial in (y, x_1..x_n) with y as variable 0 and
    lambda1 y^2 + mu1 y + r distributed exactly as p under N(0, I).
    """
    eps, eta = as_fraction(eps), as_fraction(eta)
    if p.constant != 0:
        raise PreconditionError("decomposition requires a zero constant term")
    if variance_gaussian(p) == 0:
        raise PreconditionError("decomposition requires positive variance")
    s = _IntForm.from_polynomial(p)
    split, eig = _decompose_int(s, eps, eta, spectral)
    if split is None:
        return DecomposeResult(SMALL, eigen=eig)
    rest = split.next_form.to_polynomial()
    n = p.n
    quad = {(0, j + 1): c for j, c in enumerate(split.cross)}
    quad.update({(i + 1, j + 1): v for (i, j), v in rest.quad.items()})
    lin = {i + 1: v for i, v in rest.lin.items()}
    r = Degree2Polynomial(n + 1, quad, lin, 0)
    return DecomposeResult(SPLIT, split.lam, split.mu, r, eig)


# junta construction ---------------------------------------------------------

def _pow2_floor(x: float) -> Fraction:
    """Largest power of two <= x (x > 0)."""
    m, e = math.frexp(x)
    return Fraction(2) ** (e - 1)


@dataclass(frozen=True)
class JuntaParams:
    c_alpha: float = 1 / 16
    c_K: float = 64
    c_gamma: float = 1 / 16
    c_eta: float = 1 / 64

    def derive(self, eps, n: int) -> dict:
        eps = float(eps)
        if not 0 < eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        polylog = math.log(1 / eps) ** 2
        alpha = self.c_alpha * eps**4 / polylog
        K = self.c_K * polylog / eps**4
        gamma = self.c_gamma * (eps / K) ** 2 / polylog * math.sqrt(alpha)
        eta = self.c_eta * eps**4 / K**4 / polylog
        grid = _pow2_floor(gamma / (K * max(n, 1)))
        beta_grid = _pow2_floor(eps * alpha / 2)
        return {
            "alpha": Fraction(alpha),
            "K": K,
            "gamma": gamma,
            "eta": Fraction(eta),
            "round_grid": grid,
            "beta_grid": beta_grid,
        }


@dataclass
class JuntaStep:
    index: int
    var_s: Fraction
    var_s_rounded: Fraction | None = None
    digest: str | None = None
    branch: str = ""
    lam: Fraction | None = None
    mu: Fraction | None = None
    var_res: Fraction | None = None
    var_next: Fraction | None = None
    var_head: Fraction | None = None

    def as_dict(self) -> dict:
        out = {"index": self.index, "branch": self.branch}
        for key in ("var_s", "var_s_rounded", "lam", "mu", "var_res", "var_next", "var_head"):
            v = getattr(self, key)
            out[key] = None if v is None else str(v)
        out["digest"] = self.digest
        return out


@dataclass
class JuntaTrace:
    params: dict = field(default_factory=dict)
    scale: Fraction = Fraction(1)
    steps: list[JuntaStep] = field(default_factory=list)
    exit: str = ""
    head_lambdas: list[Fraction] = field(default_factory=list)
    head_mus: list[Fraction] = field(default_factory=list)

    def records(self) -> list[dict]:
        return [s.as_dict() for s in self.steps]


def construct_junta(
    p: Degree2Polynomial,
    eps,
    params: JuntaParams = JuntaParams(),
    spectral: SpectralParams = SpectralParams(),
) -> tuple[DecoupledPolynomial, JuntaTrace]:
    """Reduce p to a decoupled polynomial with the same sign statistics up to O(eps).

    The input is first multiplied by a positive dyadic close to 1/sqrt(Var p),
    which leaves the threshold function unchanged. The returned polynomial is
    scaled further so that all its coefficients are integers.
    """
    eps = as_fraction(eps)
    derived = params.derive(eps, p.n)
    trace = JuntaTrace(params={k: (str(v) if isinstance(v, Fraction) else v) for k, v in derived.items()})
    var_p = variance_gaussian(p)
    if var_p == 0:
        trace.exit = LOW_VARIANCE
        return DecoupledPolynomial((), (), p.constant), trace

    # dyadic c with c^2 Var(p) in (1 - 2^-60, 1]
    bits = 64
    c_num = math.isqrt((1 << (2 * bits)) * var_p.denominator // var_p.numerator)
    scale = Fraction(c_num, 1 << bits)
    trace.scale = scale
    constant = p.constant * scale
    s = _IntForm.from_polynomial(p.homogeneous, scale)

    alpha = derived["alpha"]
    eta = derived["eta"]
    grid_log = -int(math.log2(derived["round_grid"]))
    beta_grid = derived["beta_grid"]
    K_bound = derived["K"]

    lambdas: list[Fraction] = []
    mus: list[Fraction] = []
    i = 0
    while True:
        i += 1
        if i > K_bound + 1:
            raise AssertionError("junta construction exceeded its iteration bound")
        var_s = s.variance()
        step = JuntaStep(i, var_s)
        trace.steps.append(step)
        if var_s < alpha:
            step.branch = LOW_VARIANCE
            trace.exit = LOW_VARIANCE
            out_const = s.mean() + constant
            break
        sr = s.round_down(grid_log)
        step.var_s_rounded = sr.variance()
        step.digest = sr.digest()
        if step.var_s_rounded == 0:
            # rounding erased the remaining polynomial
            step.branch = LOW_VARIANCE
            trace.exit = LOW_VARIANCE
            out_const = sr.mean() + constant
            break
        split, _ = _decompose_int(sr, eps, eta, spectral)
        if split is None:
            step.branch = SMALL
            trace.exit = SMALL
            v = step.var_s_rounded
            beta = beta_grid * math.isqrt(math.floor(v / (beta_grid * beta_grid)))
            lambdas.append(Fraction(0))
            mus.append(beta)
            out_const = sr.mean() + constant
            break
        step.branch = SPLIT
        step.lam, step.mu, step.var_res = split.lam, split.mu, split.res_var
        lambdas.append(split.lam)
        mus.append(split.mu)
        s = split.next_form
        step.var_next = s.variance()
        step.var_head = sum((2 * l * l + m * m for l, m in zip(lambdas, mus)), Fraction(0))

    trace.head_lambdas = lambdas
    trace.head_mus = mus
    q = DecoupledPolynomial(tuple(lambdas), tuple(mus), out_const)
    return q.integerized(), trace
