"""Degree-2 polynomials with exact rational coefficients.

Variables are 0-indexed in the Python API. The ``.d2p`` text format and the
CLI use 1-based indices; conversion happens in :mod:`d2count.fileio`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

Rational = Fraction


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(float(value)):
            raise ValueError(f"non-finite coefficient {value!r}")
        return Fraction(float(value))
    return Fraction(value)


class Degree2Polynomial:
    """p(x) = sum_{i<=j} a_ij x_i x_j + sum_i b_i x_i + C with rational coefficients.

    Zero coefficients are never stored, so two equal polynomials compare equal.
    Instances are treated as immutable.
    """

    __slots__ = ("n", "quad", "lin", "constant", "multilinear", "_hash")

    def __init__(
        self,
        n: int,
        quad: Mapping[tuple[int, int], object] | None = None,
        lin: Mapping[int, object] | None = None,
        constant: object = 0,
        multilinear: bool = False,
    ):
        if n < 0:
            raise ValueError("variable count must be nonnegative")
        q: dict[tuple[int, int], Fraction] = {}
        for (i, j), v in (quad or {}).items():
            i, j = int(i), int(j)
            if i > j:
                i, j = j, i
            if not (0 <= i and j < n):
                raise ValueError(f"quadratic index ({i}, {j}) out of range for n={n}")
            if multilinear and i == j:
                raise ValueError("multilinear polynomial cannot hold x_i^2 terms")
            fv = as_fraction(v)
            if fv:
                q[(i, j)] = q.get((i, j), Fraction(0)) + fv
        l: dict[int, Fraction] = {}
        for i, v in (lin or {}).items():
            i = int(i)
            if not 0 <= i < n:
                raise ValueError(f"linear index {i} out of range for n={n}")
            fv = as_fraction(v)
            if fv:
                l[i] = l.get(i, Fraction(0)) + fv
        self.n = n
        self.quad = {k: v for k, v in sorted(q.items()) if v}
        self.lin = {k: v for k, v in sorted(l.items()) if v}
        self.constant = as_fraction(constant)
        self.multilinear = bool(multilinear)
        self._hash = None

    # construction helpers -------------------------------------------------
    @classmethod
    def from_matrix(cls, A, b=None, constant=0, multilinear: bool = False) -> "Degree2Polynomial":
        """Build from a symmetric matrix A (x^T A x) plus a linear vector b."""
        A = np.asarray(A, dtype=object)
        n = A.shape[0]
        quad = {}
        for i in range(n):
            if A[i, i]:
                quad[(i, i)] = as_fraction(A[i, i])
            for j in range(i + 1, n):
                if as_fraction(A[i, j]) != as_fraction(A[j, i]):
                    raise ValueError("matrix is not symmetric")
                if A[i, j]:
                    quad[(i, j)] = 2 * as_fraction(A[i, j])
        lin = {} if b is None else {i: v for i, v in enumerate(b) if v}
        return cls(n, quad, lin, constant, multilinear)

    def with_constant(self, constant) -> "Degree2Polynomial":
        return Degree2Polynomial(self.n, self.quad, self.lin, constant, self.multilinear)

    def scaled(self, factor) -> "Degree2Polynomial":
        f = as_fraction(factor)
        return Degree2Polynomial(
            self.n,
            {k: v * f for k, v in self.quad.items()},
            {k: v * f for k, v in self.lin.items()},
            self.constant * f,
            self.multilinear,
        )

    def __add__(self, other: "Degree2Polynomial") -> "Degree2Polynomial":
        if not isinstance(other, Degree2Polynomial):
            return self.with_constant(self.constant + as_fraction(other))
        n = max(self.n, other.n)
        quad = dict(self.quad)
        for k, v in other.quad.items():
            quad[k] = quad.get(k, Fraction(0)) + v
        lin = dict(self.lin)
        for k, v in other.lin.items():
            lin[k] = lin.get(k, Fraction(0)) + v
        return Degree2Polynomial(
            n, quad, lin, self.constant + other.constant, self.multilinear and other.multilinear
        )

    def __sub__(self, other: "Degree2Polynomial") -> "Degree2Polynomial":
        if not isinstance(other, Degree2Polynomial):
            return self.with_constant(self.constant - as_fraction(other))
        return self + other.scaled(-1)

    # comparisons ------------------------------------------------------------
    def _key(self):
        return (self.n, tuple(self.quad.items()), tuple(self.lin.items()), self.constant, self.multilinear)

    def __eq__(self, other) -> bool:
        return isinstance(other, Degree2Polynomial) and self._key() == other._key()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self) -> str:
        terms = [f"{v}*x{i}*x{j}" for (i, j), v in self.quad.items()]
        terms += [f"{v}*x{i}" for i, v in self.lin.items()]
        terms.append(str(self.constant))
        return f"Degree2Polynomial(n={self.n}: " + " + ".join(terms) + ")"

    # evaluation -------------------------------------------------------------
    def __call__(self, x: Sequence) -> Fraction:
        if len(x) != self.n:
            raise ValueError(f"expected {self.n} values, got {len(x)}")
        xs = [as_fraction(v) for v in x]
        total = self.constant
        for (i, j), a in self.quad.items():
            total += a * xs[i] * xs[j]
        for i, b in self.lin.items():
            total += b * xs[i]
        return total

    def evaluate_many(self, X: np.ndarray) -> np.ndarray:
        """Float evaluation on the rows of X (used by Monte Carlo oracles)."""
        X = np.asarray(X, dtype=float)
        A = quadratic_matrix_float(self)
        b = np.array([float(self.lin.get(i, 0)) for i in range(self.n)])
        return np.einsum("ij,jk,ik->i", X, A, X) + X @ b + float(self.constant)

    @property
    def is_constant(self) -> bool:
        return not self.quad and not self.lin

    @property
    def homogeneous(self) -> "Degree2Polynomial":
        """Same polynomial with the constant term dropped."""
        return self.with_constant(0)


@dataclass(frozen=True)
class DecoupledPolynomial:
    """sum_i (lambda_i y_i^2 + mu_i y_i) + constant, with no cross terms."""

    lambdas: tuple[Fraction, ...]
    mus: tuple[Fraction, ...]
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        if len(self.lambdas) != len(self.mus):
            raise ValueError("lambdas and mus must have equal length")
        object.__setattr__(self, "lambdas", tuple(as_fraction(v) for v in self.lambdas))
        object.__setattr__(self, "mus", tuple(as_fraction(v) for v in self.mus))
        object.__setattr__(self, "constant", as_fraction(self.constant))

    @property
    def K(self) -> int:
        return len(self.lambdas)

    def to_polynomial(self) -> Degree2Polynomial:
        quad = {(i, i): v for i, v in enumerate(self.lambdas)}
        lin = dict(enumerate(self.mus))
        return Degree2Polynomial(self.K, quad, lin, self.constant)

    def integerized(self) -> "DecoupledPolynomial":
        """Positive rescaling that clears every denominator."""
        den = 1
        for v in (*self.lambdas, *self.mus, self.constant):
            den = math.lcm(den, v.denominator)
        return DecoupledPolynomial(
            tuple(v * den for v in self.lambdas),
            tuple(v * den for v in self.mus),
            self.constant * den,
        )


@dataclass(frozen=True)
class Restriction:
    """Partial assignment of hypercube variables to -1/+1."""

    assignments: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for i, v in self.assignments.items():
            if v not in (-1, 1):
                raise ValueError(f"restriction value for x{i} must be -1 or +1, got {v}")


@dataclass(frozen=True)
class LinearForm:
    """Weights of a linear form w.x; exact rationals or floats."""

    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))

    def norm_sq(self) -> Fraction:
        return sum((as_fraction(w) ** 2 for w in self.weights), Fraction(0))


# statistics -----------------------------------------------------------------

def mean_gaussian(p: Degree2Polynomial) -> Fraction:
    return p.constant + sum((v for (i, j), v in p.quad.items() if i == j), Fraction(0))


def variance_gaussian(p: Degree2Polynomial) -> Fraction:
    """Exact variance of p(x) for x ~ N(0, I_n)."""
    total = Fraction(0)
    for (i, j), a in p.quad.items():
        total += 2 * a * a if i == j else a * a
    for b in p.lin.values():
        total += b * b
    return total


def _require_multilinear(p: Degree2Polynomial) -> None:
    if any(i == j for i, j in p.quad):
        raise ValueError("operation requires a multilinear polynomial (no x_i^2 terms)")


def variance_boolean(p: Degree2Polynomial) -> Fraction:
    """Exact variance over the uniform hypercube, via Parseval."""
    _require_multilinear(p)
    return ss(p)


def mean_boolean(p: Degree2Polynomial) -> Fraction:
    _require_multilinear(p)
    return p.constant


def ss(p: Degree2Polynomial) -> Fraction:
    """Sum of squares of all non-constant coefficients."""
    return sum((v * v for v in p.quad.values()), Fraction(0)) + sum(
        (v * v for v in p.lin.values()), Fraction(0)
    )


def influences(p: Degree2Polynomial) -> list[Fraction]:
    _require_multilinear(p)
    inf = [Fraction(0)] * p.n
    for (i, j), a in p.quad.items():
        inf[i] += a * a
        inf[j] += a * a
    for i, b in p.lin.items():
        inf[i] += b * b
    return inf


def is_regular(p: Degree2Polynomial, tau) -> bool:
    """max_i Inf_i(p) <= tau * sum_i Inf_i(p); the zero polynomial counts as regular."""
    inf = influences(p)
    total = sum(inf, Fraction(0))
    if total == 0:
        return True
    return max(inf) <= as_fraction(tau) * total


def quadratic_matrix(p: Degree2Polynomial) -> np.ndarray:
    """Symmetric object array of Fractions with x^T A x equal to the quadratic part."""
    A = np.full((p.n, p.n), Fraction(0), dtype=object)
    for (i, j), a in p.quad.items():
        if i == j:
            A[i, i] = a
        else:
            A[i, j] = A[j, i] = a / 2
    return A


def quadratic_matrix_float(p: Degree2Polynomial) -> np.ndarray:
    A = np.zeros((p.n, p.n))
    for (i, j), a in p.quad.items():
        if i == j:
            A[i, i] = float(a)
        else:
            A[i, j] = A[j, i] = float(a) / 2
    return A


def linear_vector(p: Degree2Polynomial) -> np.ndarray:
    b = np.full(p.n, Fraction(0), dtype=object)
    for i, v in p.lin.items():
        b[i] = v
    return b


def frobenius_sq(A: np.ndarray) -> Fraction:
    return sum((as_fraction(v) ** 2 for v in np.asarray(A, dtype=object).ravel()), Fraction(0))


# change of basis --------------------------------------------------------------

def unit_rational_vector(v: Sequence[float], bits: int = 64) -> tuple[list[int], int]:
    """Exact rational unit vector u/d close to the direction of v.

    Uses inverse stereographic projection from the coordinate of largest
    magnitude, so sum(u_i^2) == d^2 holds exactly. The sign is chosen so that
    this coordinate is positive.
    """
    v = np.asarray(v, dtype=np.longdouble)
    n = len(v)
    nrm = np.sqrt(np.sum(v * v))
    if not nrm > 0:
        raise ValueError("cannot normalize the zero vector")
    v = v / nrm
    pivot = int(np.argmax(np.abs(v)))
    if v[pivot] < 0:
        v = -v
    scale = 1 << bits
    a = [int(np.rint(v[i] / (1 + v[pivot]) * scale)) if i != pivot else 0 for i in range(n)]
    s = sum(x * x for x in a)
    d = scale * scale + s
    u = [2 * x * scale for x in a]
    u[pivot] = scale * scale - s
    g = math.gcd(d, *u)
    return [x // g for x in u], d // g


def _as_unit_fractions(w1: LinearForm, tol: float, bits: int) -> list[Fraction]:
    ws = w1.weights
    if all(isinstance(x, (Fraction, int, np.integer)) for x in ws):
        w = [as_fraction(x) for x in ws]
        nsq = sum(x * x for x in w)
        if nsq == 0:
            raise ValueError("degenerate linear form (zero weights)")
        if abs(float(nsq) - 1) > tol:
            raise ValueError(f"linear form is not normalized (|w|^2 = {float(nsq)})")
        return w
    wf = np.array([float(x) for x in ws])
    nrm = float(np.linalg.norm(wf))
    if nrm == 0:
        raise ValueError("degenerate linear form (zero weights)")
    if abs(nrm - 1) > tol:
        raise ValueError(f"linear form is not normalized (|w| = {nrm})")
    u, d = unit_rational_vector(wf, bits)
    # keep the caller's orientation
    if np.dot(wf, u) < 0:
        u = [-x for x in u]
    return [Fraction(x, d) for x in u]


def substitute_decomposition(
    p: Degree2Polynomial, w1: LinearForm, tol: float = 1e-9, bits: int = 64
) -> Degree2Polynomial:
    """q(y, x) = p(w y + (I - w w^T) x) as a polynomial in n + 1 variables.

    Variable 0 of the result is y; variables 1..n are the original x. With an
    exactly unit w, (y, x) ~ N(0, I) makes q(y, x) distributed as p(x).
    Float weights are first replaced by a nearby exact rational unit vector.
    """
    if len(w1.weights) != p.n:
        raise ValueError("linear form length does not match the polynomial")
    w = np.array(_as_unit_fractions(w1, tol, bits), dtype=object)
    A = quadratic_matrix(p)
    b = linear_vector(p)
    n = p.n
    Aw = A.dot(w) if n else np.array([], dtype=object)
    wAw = w.dot(Aw) if n else Fraction(0)
    # P A P = A - w (Aw)^T - (Aw) w^T + (w^T A w) w w^T
    PAw = Aw - w * wAw
    PAP = A - np.outer(w, Aw) - np.outer(Aw, w) + wAw * np.outer(w, w)
    Pb = b - w * (w.dot(b) if n else Fraction(0))
    quad: dict[tuple[int, int], Fraction] = {(0, 0): wAw}
    for j in range(n):
        quad[(0, j + 1)] = 2 * PAw[j]
        quad[(j + 1, j + 1)] = PAP[j, j]
        for k in range(j + 1, n):
            quad[(j + 1, k + 1)] = 2 * PAP[j, k]
    lin = {0: w.dot(b) if n else Fraction(0)}
    lin.update({j + 1: Pb[j] for j in range(n)})
    return Degree2Polynomial(n + 1, quad, lin, p.constant)


def residue(p: Degree2Polynomial, w1: LinearForm, tol: float = 1e-9, bits: int = 64) -> Degree2Polynomial:
    """Bilinear y*x_j part of p after rotating w1 onto the new variable y (index 0)."""
    q = substitute_decomposition(p, w1, tol, bits)
    return split_residue(q)[0]


def split_residue(q: Degree2Polynomial, var: int = 0) -> tuple[Degree2Polynomial, Degree2Polynomial]:
    """Split q into (cross terms between `var` and other variables, everything else)."""
    cross = {k: v for k, v in q.quad.items() if (var in k) and k != (var, var)}
    rest = {k: v for k, v in q.quad.items() if k not in cross}
    return (
        Degree2Polynomial(q.n, cross, {}, 0),
        Degree2Polynomial(q.n, rest, q.lin, q.constant, q.multilinear),
    )


# hypercube helpers ------------------------------------------------------------

def restrict(p: Degree2Polynomial, rho: Restriction | Mapping[int, int]) -> Degree2Polynomial:
    """Fix the variables in rho; fixed variables keep their index but no longer occur."""
    _require_multilinear(p)
    assign = rho.assignments if isinstance(rho, Restriction) else rho
    for i, v in assign.items():
        if not 0 <= i < p.n:
            raise ValueError(f"restriction index {i} out of range for n={p.n}")
        if v not in (-1, 1):
            raise ValueError("restriction values must be -1 or +1")
    quad: dict[tuple[int, int], Fraction] = {}
    lin = dict(p.lin)
    const = p.constant
    for (i, j), a in p.quad.items():
        fi, fj = i in assign, j in assign
        if fi and fj:
            const += a * assign[i] * assign[j]
        elif fi:
            lin[j] = lin.get(j, Fraction(0)) + a * assign[i]
        elif fj:
            lin[i] = lin.get(i, Fraction(0)) + a * assign[j]
        else:
            quad[(i, j)] = a
    for i in list(lin):
        if i in assign:
            const += lin.pop(i) * assign[i]
    return Degree2Polynomial(p.n, quad, lin, const, True)


def _edges(edges: Iterable[tuple[int, int]], n: int) -> list[tuple[int, int]]:
    seen = set()
    out = []
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ValueError(f"duplicate edge {key}")
        seen.add(key)
        out.append(key)
    return out


def graph_cut_poly(edges: Iterable[tuple[int, int]], n: int) -> Degree2Polynomial:
    """(|E| - sum_{ij in E} x_i x_j) / 2: the number of edges cut by sign(x)."""
    es = _edges(edges, n)
    half = Fraction(1, 2)
    return Degree2Polynomial(n, {e: -half for e in es}, {}, half * len(es), True)


def graph_induced_poly(edges: Iterable[tuple[int, int]], n: int) -> Degree2Polynomial:
    """sum_{ij in E} (1 + x_i)/2 (1 + x_j)/2: edges induced by {i : x_i = 1}."""
    es = _edges(edges, n)
    quarter = Fraction(1, 4)
    quad = {e: quarter for e in es}
    lin: dict[int, Fraction] = {}
    for u, v in es:
        lin[u] = lin.get(u, Fraction(0)) + quarter
        lin[v] = lin.get(v, Fraction(0)) + quarter
    return Degree2Polynomial(n, quad, lin, quarter * len(es), True)


RAW_MOMENT_CAP = 6


def raw_moment_exact(p: Degree2Polynomial, k: int, cap: int = RAW_MOMENT_CAP) -> Fraction:
    """E[p(x)^k] over the uniform hypercube by expanding with x_i^2 = 1."""
    _require_multilinear(p)
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    if k > cap:
        raise ValueError(f"moment order {k} exceeds the cap {cap}")
    # monomials are bitmasks; multiplication is XOR under x_i^2 = 1
    terms: dict[int, Fraction] = {}
    if p.constant:
        terms[0] = p.constant
    for i, b in p.lin.items():
        terms[1 << i] = b
    for (i, j), a in p.quad.items():
        terms[(1 << i) | (1 << j)] = a
    acc: dict[int, Fraction] = {0: Fraction(1)}
    for _ in range(k):
        nxt: dict[int, Fraction] = {}
        for m1, c1 in acc.items():
            for m2, c2 in terms.items():
                m = m1 ^ m2
                nxt[m] = nxt.get(m, Fraction(0)) + c1 * c2
        acc = {m: c for m, c in nxt.items() if c}
    return acc.get(0, Fraction(0))


def integer_scale(p: Degree2Polynomial) -> int:
    """Smallest positive integer s with s*p having integer coefficients."""
    den = p.constant.denominator
    for v in (*p.quad.values(), *p.lin.values()):
        den = math.lcm(den, v.denominator)
    return den
