"""Regularity decision trees and deterministic counting over the hypercube.

The tree splits on high-influence variables until each leaf polynomial is
either regular (its acceptance probability is then taken from the Gaussian
counter) or almost constant in sign. Children of an expansion are produced
in bulk with numpy: all 2^h sign patterns of the split variables at once.

Tree shape depends only on influences, which do not involve the constant
term. A tree built once can therefore answer ``p >= theta`` for many
thresholds; only the sign-leaf tests and leaf counts are re-evaluated, and
the answer equals that of a freshly built tree for ``p - theta``.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .decouple import JuntaParams
from .errors import FeasibilityError, PreconditionError
from .gausscount import CountParams, count_gaussian
from .poly import Degree2Polynomial, as_fraction, integer_scale, is_regular
from .spectral import SpectralParams

FAIL = "fail"
REGULAR = "regular"
PLUS = "+1"
MINUS = "-1"

_INT64_SAFE = 1 << 62


def solve_tau_tilde(tau: float, d: int = 2, C_prime: float = 2.0) -> float:
    """tau_tilde with tau = tau_tilde * (C' d ln d ln(1/tau_tilde))^d, by bisection in log space."""
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")

    def f(log_inv):  # tau as a function of ln(1/tau_tilde)
        return math.exp(-log_inv) * (C_prime * d * math.log(d) * log_inv) ** d

    lo, hi = math.log(1 / tau), math.log(1 / tau) + 1.0
    while f(hi) > tau:
        hi *= 2
    # f is decreasing on [lo, hi] once ln(1/tau_tilde) exceeds d
    lo = max(lo, float(d))
    if f(lo) < tau:
        return math.exp(-lo)
    for _ in range(200):
        mid = (lo + hi) / 2
        if f(mid) > tau:
            lo = mid
        else:
            hi = mid
    return math.exp(-hi)


@dataclass(frozen=True)
class RegularityParams:
    tau: Fraction
    C: int = 2
    C_prime: float = 2.0
    c_alpha: float = 4.0
    c_log: float = 4.0
    c_depth: float = 1.0
    max_leaves: int = 1 << 22
    d: int = 2

    def __post_init__(self):
        object.__setattr__(self, "tau", as_fraction(self.tau))
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")

    @property
    def beta(self) -> Fraction:
        return self.tau

    @property
    def tau_tilde(self) -> float:
        return solve_tau_tilde(float(self.tau), self.d, self.C_prime)

    @property
    def alpha_node(self) -> float:
        lt = math.log(1 / float(self.tau))
        return self.c_alpha * max(1.0, self.d * math.log(max(lt, 1.0)) + self.d * math.log(self.d))

    @property
    def expansion_cap(self) -> float:
        return self.alpha_node / self.tau_tilde

    @property
    def t_star(self) -> Fraction:
        return Fraction(1, 2 * self.C**self.d)

    @property
    def depth_cap(self) -> float:
        lt = math.log(1 / float(self.tau))
        return (1 / float(self.tau)) * (self.d * max(lt, 1.0)) ** self.c_depth

    @property
    def tail_ratio_sq(self) -> Fraction:
        """Squared bound on |q| / |p| in the sign-leaf test."""
        lb = self.c_log * math.log(1 / float(self.beta))
        return self.t_star**2 / Fraction(max(lb, 1.0) ** self.d)

    def snapshot(self) -> dict:
        return {
            "tau": str(self.tau),
            "tau_tilde": self.tau_tilde,
            "alpha_node": self.alpha_node,
            "t_star": str(self.t_star),
            "depth_cap": self.depth_cap,
            "C": self.C,
            "C_prime": self.C_prime,
            "c_alpha": self.c_alpha,
            "c_log": self.c_log,
            "c_depth": self.c_depth,
            "max_leaves": self.max_leaves,
        }


# integer polynomials ------------------------------------------------------------

@dataclass
class _IntPoly:
    const: int
    lin: dict
    quad: dict

    def influences(self) -> dict:
        inf: dict[int, int] = {}
        for (i, j), a in self.quad.items():
            inf[i] = inf.get(i, 0) + a * a
            inf[j] = inf.get(j, 0) + a * a
        for i, b in self.lin.items():
            inf[i] = inf.get(i, 0) + b * b
        return inf

    def ss(self) -> int:
        return sum(a * a for a in self.quad.values()) + sum(b * b for b in self.lin.values())

    def magnitude(self) -> int:
        return abs(self.const) + sum(map(abs, self.lin.values())) + sum(map(abs, self.quad.values()))

    def to_polynomial(self, n: int, b: int = 1, shift: int = 0, denom: int = 1) -> Degree2Polynomial:
        return Degree2Polynomial(
            n,
            {k: Fraction(b * v, denom) for k, v in self.quad.items()},
            {k: Fraction(b * v, denom) for k, v in self.lin.items()},
            Fraction(b * self.const - shift, denom),
            True,
        )


def _digest(ip: _IntPoly) -> str:
    h = hashlib.sha256()
    h.update(repr((ip.const, sorted(ip.lin.items()), sorted(ip.quad.items()))).encode())
    return h.hexdigest()[:16]


@dataclass
class _Expansion:
    variables: tuple[int, ...]
    sign_test: bool
    consts: list  # child constants, unshifted, canonical order
    lin: np.ndarray | None  # child linear parts over tail variables, or None if tail is empty
    tail: tuple[int, ...]
    tail_quad: dict
    tail_quad_ss: int
    children: list = field(default_factory=list)

    def child_ss(self) -> list[int]:
        if self.lin is None:
            return [self.tail_quad_ss] * len(self.consts)
        rows = self.lin.tolist()
        return [sum(v * v for v in r) + self.tail_quad_ss for r in rows]


class _Node:
    """Node of the constant-independent tree skeleton; children are built on demand."""

    __slots__ = ("poly", "depth", "_plan", "_budget")

    def __init__(self, poly: _IntPoly, depth: int, budget: list):
        self.poly = poly
        self.depth = depth
        self._plan = None
        self._budget = budget

    def plan(self, params: RegularityParams):
        if self._plan is None:
            self._plan = self._make_plan(params)
        return self._plan

    def _make_plan(self, params: RegularityParams):
        if self.depth > params.depth_cap:
            return FAIL
        inf = self.poly.influences()
        total = sum(inf.values())
        if total == 0:
            return REGULAR
        order = sorted((v for v in inf if inf[v] > 0), key=lambda v: (-inf[v], v))
        if inf[order[0]] <= params.tau * total:
            return REGULAR
        ci = _critical_index([inf[v] for v in order], params.tau)
        cap = params.expansion_cap
        if ci >= cap:
            h = min(len(order), math.ceil(cap))
            sign_test = True
        else:
            h = ci
            sign_test = False
        self._budget[0] += (1 << h) - 1
        if self._budget[0] > params.max_leaves:
            raise FeasibilityError(
                f"regularity tree exceeds the leaf budget {params.max_leaves}; increase eps or the budget"
            )
        return _expand(self.poly, tuple(order[:h]), sign_test)

    def child(self, k: int, exp: _Expansion) -> "_Node":
        if not exp.children:
            exp.children = [None] * len(exp.consts)
        c = exp.children[k]
        if c is None:
            lin = {}
            if exp.lin is not None:
                lin = {v: int(a) for v, a in zip(exp.tail, exp.lin[k].tolist()) if a}
            c = _Node(_IntPoly(int(exp.consts[k]), lin, exp.tail_quad), self.depth + len(exp.variables), self._budget)
            exp.children[k] = c
        return c


def _critical_index(main: list[int], tau: Fraction):
    tail = sum(main)
    for i, c in enumerate(main):
        if c * tau.denominator <= tau.numerator * tail:
            return i
        tail -= c
    return math.inf


def _patterns(h: int) -> np.ndarray:
    """All sign vectors in canonical order: the first variable is the most significant bit, -1 before +1."""
    idx = np.arange(1 << h, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(h - 1, -1, -1, dtype=np.int64)[None, :]) & 1
    return (2 * bits - 1).astype(np.int64)


def _expand(poly: _IntPoly, H: tuple[int, ...], sign_test: bool) -> _Expansion:
    pos = {v: k for k, v in enumerate(H)}
    tail = tuple(sorted({v for v in poly.lin if v not in pos} | {v for e in poly.quad for v in e if v not in pos}))
    tpos = {v: k for k, v in enumerate(tail)}
    h, t = len(H), len(tail)
    dtype = np.int64 if poly.magnitude() < _INT64_SAFE else object
    bH = np.zeros(h, dtype=dtype)
    AHH = np.zeros((h, h), dtype=dtype)
    AHT = np.zeros((h, t), dtype=dtype)
    bT = np.zeros(t, dtype=dtype)
    tail_quad = {}
    for v, b in poly.lin.items():
        if v in pos:
            bH[pos[v]] = b
        else:
            bT[tpos[v]] = b
    for (i, j), a in poly.quad.items():
        if i in pos and j in pos:
            AHH[min(pos[i], pos[j]), max(pos[i], pos[j])] = a
        elif i in pos:
            AHT[pos[i], tpos[j]] += a
        elif j in pos:
            AHT[pos[j], tpos[i]] += a
        else:
            tail_quad[(i, j)] = a
    S = _patterns(h)
    if dtype is object:
        S = S.astype(object)
    consts = poly.const + S @ bH + np.sum((S @ AHH) * S, axis=1)
    lin = (bT[None, :] + S @ AHT) if t else None
    tq_ss = sum(a * a for a in tail_quad.values())
    return _Expansion(H, sign_test, [int(c) for c in consts.tolist()], lin, tail, tail_quad, tq_ss)


# trees and counting ---------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    restriction: dict
    depth: int
    label: str
    poly: Degree2Polynomial

    @property
    def weight(self) -> Fraction:
        return Fraction(1, 1 << self.depth)


@dataclass(frozen=True)
class BooleanParams:
    c_tau: float = 1.0
    gaussian_fraction: float = 0.5
    C: int = 2
    C_prime: float = 2.0
    c_alpha: float = 4.0
    c_log: float = 4.0
    c_depth: float = 1.0
    max_leaves: int = 1 << 22
    eps_floor: float = 0.02

    def regularity(self, eps) -> RegularityParams:
        tau = Fraction(self.c_tau) * as_fraction(eps) ** 9
        return self.regularity_at(tau)

    def regularity_at(self, tau) -> RegularityParams:
        return RegularityParams(
            tau, self.C, self.C_prime, self.c_alpha, self.c_log, self.c_depth, self.max_leaves
        )


class RegularityTree:
    """Decision tree for sign(p - theta), reusable across thresholds theta."""

    def __init__(self, p: Degree2Polynomial, params: RegularityParams):
        if any(i == j for i, j in p.quad):
            raise PreconditionError("the hypercube counter needs a multilinear polynomial")
        self.p = p
        self.params = params
        self.D = integer_scale(p)
        ip = _IntPoly(
            int(p.constant * self.D),
            {i: int(b * self.D) for i, b in p.lin.items()},
            {e: int(a * self.D) for e, a in p.quad.items()},
        )
        self._budget = [1]
        self.root = _Node(ip, 0, self._budget)

    # thresholds are handled by scaling: b * D * (p - a/b) = b * P - a * D
    def _shift(self, theta) -> tuple[int, int]:
        theta = as_fraction(theta)
        return theta.denominator, theta.numerator * self.D

    def _leaf_label(self, const_s: int, norm_sq: int, ss_s: int) -> bool:
        t2 = self.params.t_star**2
        r2 = self.params.tail_ratio_sq
        return (
            const_s * const_s * t2.denominator >= t2.numerator * norm_sq
            and ss_s * r2.denominator <= r2.numerator * norm_sq
        )

    def walk(self, theta, leaf_fn):
        """Visit leaves of the tree for p - theta in canonical order.

        leaf_fn(path, depth, label, node_or_const) is called for each leaf; the
        last argument is either a _Node or an int constant for bulk constant leaves.
        """
        b, shift = self._shift(theta)
        params = self.params
        stack = [(self.root, ())]
        while stack:
            node, path = stack.pop()
            plan = node.plan(params)
            if plan == FAIL or plan == REGULAR:
                leaf_fn(path, node.depth, plan, node)
                continue
            exp: _Expansion = plan
            child_depth = node.depth + len(exp.variables)
            const_s = b * node.poly.const - shift
            norm_sq = const_s * const_s + b * b * node.poly.ss()
            sss = exp.child_ss() if (exp.sign_test or exp.lin is None) else None
            pending = []
            for k, c in enumerate(exp.consts):
                cs = b * c - shift
                cpath = path + ((exp.variables, k),)
                if exp.sign_test and self._leaf_label(cs, norm_sq, b * b * sss[k]):
                    const_child = exp.lin is None and exp.tail_quad_ss == 0
                    leaf_fn(cpath, child_depth, PLUS if cs > 0 else MINUS, cs if const_child else node.child(k, exp))
                elif exp.lin is None and exp.tail_quad_ss == 0:
                    # constant child: fail past the depth cap, otherwise a regular leaf
                    leaf_fn(cpath, child_depth, FAIL if child_depth > params.depth_cap else REGULAR, cs)
                else:
                    pending.append((node.child(k, exp), cpath))
            stack.extend(reversed(pending))

    def count(self, theta=0, eps_leaf=None, count_params: CountParams = CountParams(),
              junta: JuntaParams = JuntaParams(), spectral: SpectralParams = SpectralParams(),
              stats: dict | None = None) -> Fraction:
        """Estimate of Pr[p(x) >= theta] over the hypercube.

        Same leaves as :meth:`walk`, but constant children of an expansion are
        labeled and tallied in bulk.
        """
        b, shift = self._shift(theta)
        params = self.params
        by_depth: dict[int, int] = {}
        extra = Fraction(0)
        tally = dict.fromkeys((PLUS, MINUS, FAIL, REGULAR), 0)

        def add(depth, k):
            if k:
                by_depth[depth] = by_depth.get(depth, 0) + k

        stack = [self.root]
        while stack:
            node = stack.pop()
            plan = node.plan(params)
            if plan == FAIL:
                tally[FAIL] += 1
                continue
            if plan == REGULAR:
                tally[REGULAR] += 1
                poly = node.poly
                if not poly.lin and not poly.quad:
                    add(node.depth, int(b * poly.const - shift >= 0))
                    continue
                if eps_leaf is None:
                    raise PreconditionError("regular leaf needs a Gaussian accuracy")
                v = count_gaussian(_compact(poly, b, shift), eps_leaf, count_params, junta, spectral)
                extra += v / (1 << node.depth)
                continue
            exp: _Expansion = plan
            child_depth = node.depth + len(exp.variables)
            const_s = b * node.poly.const - shift
            norm_sq = const_s * const_s + b * b * node.poly.ss()
            cs = _shifted(exp, b, shift)
            leafy = self._sign_mask(exp, cs, norm_sq, b) if exp.sign_test else np.zeros(len(cs), dtype=bool)
            pos = leafy & (cs > 0)
            n_plus = int(np.count_nonzero(pos))
            tally[PLUS] += n_plus
            tally[MINUS] += int(np.count_nonzero(leafy)) - n_plus
            add(child_depth, n_plus)
            rest = ~leafy
            if exp.lin is None and exp.tail_quad_ss == 0:
                k = int(np.count_nonzero(rest))
                if child_depth > params.depth_cap:
                    tally[FAIL] += k
                else:
                    tally[REGULAR] += k
                    add(child_depth, int(np.count_nonzero(rest & (cs >= 0))))
            else:
                stack.extend(node.child(int(k), exp) for k in reversed(np.flatnonzero(rest)))
        total = sum((Fraction(c, 1 << d) for d, c in by_depth.items()), Fraction(0)) + extra
        if stats is not None:
            stats.update(plus_leaves=tally[PLUS], minus_leaves=tally[MINUS],
                         fail_leaves=tally[FAIL], regular_leaves=tally[REGULAR])
        return total

    def count_many(self, thetas, eps_leaf=None, count_params: CountParams = CountParams(),
                   junta: JuntaParams = JuntaParams(), spectral: SpectralParams = SpectralParams(),
                   block: int = 64) -> list[Fraction]:
        """``[self.count(t) for t in thetas]``, evaluated for blocks of thresholds at once."""
        thetas = [as_fraction(t) for t in thetas]
        out: list[Fraction] = []
        for i in range(0, len(thetas), block):
            out.extend(self._count_block(thetas[i:i + block], eps_leaf, count_params, junta, spectral))
        return out

    def _count_block(self, thetas, eps_leaf, count_params, junta, spectral) -> list[Fraction]:
        if not thetas:
            return []
        params = self.params
        B = math.lcm(*(t.denominator for t in thetas))
        shifts_py = [int(t * B * self.D) for t in thetas]
        # the common scale B leaves every sign test unchanged; Gaussian leaves use each threshold's own scale
        own = [self._shift(t) for t in thetas]
        mag = B * self.root.poly.magnitude() + max(abs(v) for v in shifts_py)
        t2 = params.t_star**2
        if (mag * mag + B * B * self.root.poly.ss()) * t2.denominator >= _INT64_SAFE:
            return [self.count(t, eps_leaf, count_params, junta, spectral) for t in thetas]
        shifts = np.array(shifts_py, dtype=np.int64)
        T = len(thetas)
        by_depth: dict[int, np.ndarray] = {}
        extra = [Fraction(0)] * T

        def add(depth, counts):
            acc = by_depth.get(depth)
            if acc is None:
                by_depth[depth] = counts.astype(np.int64)
            else:
                acc += counts

        stack = [(self.root, np.arange(T))]
        while stack:
            node, act = stack.pop()
            if not len(act):
                continue
            plan = node.plan(params)
            if plan == FAIL:
                continue
            if plan == REGULAR:
                poly = node.poly
                if not poly.lin and not poly.quad:
                    full = np.zeros(T, dtype=np.int64)
                    full[act] = (B * poly.const - shifts[act]) >= 0
                    add(node.depth, full)
                    continue
                if eps_leaf is None:
                    raise PreconditionError("regular leaf needs a Gaussian accuracy")
                for i in act.tolist():
                    b_i, s_i = own[i]
                    v = count_gaussian(_compact(poly, b_i, s_i), eps_leaf, count_params, junta, spectral)
                    extra[i] += v / (1 << node.depth)
                continue
            exp: _Expansion = plan
            child_depth = node.depth + len(exp.variables)
            sh = shifts[act]
            const_s = B * node.poly.const - sh
            norm_sq = const_s * const_s + B * B * node.poly.ss()
            cs = B * np.asarray(exp.consts, dtype=np.int64)[:, None] - sh[None, :]
            if exp.sign_test:
                leafy = cs * cs * t2.denominator >= t2.numerator * norm_sq[None, :]
                if not (exp.lin is None and exp.tail_quad_ss == 0):
                    sss = exp.child_ss()
                    for k, a in zip(*np.nonzero(leafy)):
                        leafy[k, a] = self._leaf_label(int(cs[k, a]), int(norm_sq[a]), B * B * sss[k])
            else:
                leafy = np.zeros(cs.shape, dtype=bool)
            full = np.zeros(T, dtype=np.int64)
            full[act] = np.count_nonzero(leafy & (cs > 0), axis=0)
            add(child_depth, full)
            rest = ~leafy
            if exp.lin is None and exp.tail_quad_ss == 0:
                if child_depth <= params.depth_cap:
                    full = np.zeros(T, dtype=np.int64)
                    full[act] = np.count_nonzero(rest & (cs >= 0), axis=0)
                    add(child_depth, full)
            else:
                for k in reversed(np.flatnonzero(rest.any(axis=1)).tolist()):
                    stack.append((node.child(k, exp), act[rest[k]]))
        res = []
        for i in range(T):
            tot = sum((Fraction(int(c[i]), 1 << d) for d, c in by_depth.items()), Fraction(0))
            res.append(tot + extra[i])
        return res

    def _sign_mask(self, exp: "_Expansion", cs: np.ndarray, norm_sq: int, b: int) -> np.ndarray:
        """Vectorized form of :meth:`_leaf_label` over all children."""
        t2 = self.params.t_star**2
        big = 1 << 62
        if norm_sq * t2.numerator >= big and cs.dtype != object:
            cs_max = int(np.max(np.abs(cs)))
            if cs_max * cs_max * t2.denominator < big:
                return np.zeros(len(cs), dtype=bool)
        if cs.dtype == object or int(np.max(np.abs(cs))) ** 2 * t2.denominator >= big or norm_sq * t2.numerator >= big:
            first = np.array([c * c * t2.denominator >= t2.numerator * norm_sq for c in cs.tolist()], dtype=bool)
        else:
            first = cs * cs * t2.denominator >= t2.numerator * norm_sq
        if exp.lin is None and exp.tail_quad_ss == 0:
            return first
        sss = exp.child_ss()
        out = first.copy()
        for k in np.flatnonzero(first):
            out[k] = self._leaf_label(int(cs[k]), norm_sq, b * b * sss[k])
        return out

    def leaves(self, theta=0) -> Iterator[Leaf]:
        """Materialized leaves for p - theta (testing and debugging)."""
        b, shift = self._shift(theta)
        out = []

        def leaf(path, depth, label, obj):
            rho = {}
            for H, k in path:
                h = len(H)
                for pos, v in enumerate(H):
                    rho[v] = 1 if (k >> (h - 1 - pos)) & 1 else -1
            if isinstance(obj, int):
                poly = Degree2Polynomial(self.p.n, {}, {}, Fraction(obj, b * self.D), True)
            else:
                poly = obj.poly.to_polynomial(self.p.n, b, shift, b * self.D)
            out.append(Leaf(rho, depth, label, poly))

        self.walk(theta, leaf)
        return iter(out)

    def route(self, x, theta=0) -> Leaf:
        """Leaf reached by input x (a +-1 sequence)."""
        for lf in self.leaves(theta):
            if all(x[i] == s for i, s in lf.restriction.items()):
                return lf
        raise AssertionError("no leaf matches the input")

    def dump(self, theta=0) -> list[dict]:
        b, shift = self._shift(theta)
        rows: list[dict] = []

        def leaf(path, depth, label, obj):
            if isinstance(obj, int):
                dg = _digest(_IntPoly(obj, {}, {}))
            else:
                ip = obj.poly
                dg = _digest(_IntPoly(b * ip.const - shift, {k: b * v for k, v in ip.lin.items()},
                                      {k: b * v for k, v in ip.quad.items()}))
            rows.append({
                "path": [[[v + 1 for v in H], k] for H, k in path],
                "depth": depth,
                "label": label,
                "digest": dg,
            })

        self.walk(theta, leaf)
        return rows


def _shifted(exp: _Expansion, b: int, shift: int) -> np.ndarray:
    """Child constants of b * P - shift, as int64 when squares cannot overflow."""
    lo, hi = min(exp.consts), max(exp.consts)
    bound = abs(b) * max(abs(lo), abs(hi)) + abs(shift)
    if bound < _INT64_SAFE:
        return b * np.asarray(exp.consts, dtype=np.int64) - shift
    return np.array([b * c - shift for c in exp.consts], dtype=object)


def _compact(ip: _IntPoly, b: int, shift: int) -> Degree2Polynomial:
    """Leaf polynomial over its own variables only, scaled to integers."""
    vs = sorted(set(ip.lin) | {v for e in ip.quad for v in e})
    pos = {v: k for k, v in enumerate(vs)}
    return Degree2Polynomial(
        len(vs),
        {(pos[i], pos[j]): b * a for (i, j), a in ip.quad.items()},
        {pos[i]: b * v for i, v in ip.lin.items()},
        b * ip.const - shift,
        True,
    )


def construct_tree(p: Degree2Polynomial, tau, params: BooleanParams = BooleanParams()) -> RegularityTree:
    return RegularityTree(p, params.regularity_at(tau))


def count_boolean(p: Degree2Polynomial, eps, params: BooleanParams = BooleanParams(),
                  count_params: CountParams = CountParams(), junta: JuntaParams = JuntaParams(),
                  spectral: SpectralParams = SpectralParams(), info: dict | None = None) -> Fraction:
    """Approximate Pr_{x uniform on {-1,1}^n}[p(x) >= 0] to within eps."""
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    tree = RegularityTree(p, params.regularity(eps))
    stats: dict = {}
    v = tree.count(0, eps * as_fraction(params.gaussian_fraction), count_params, junta, spectral, stats)
    if info is not None:
        info.update(stats)
        info["tree"] = tree
    return v


def count_boolean_regular(p: Degree2Polynomial, eps, tau=None, params: BooleanParams = BooleanParams(),
                          count_params: CountParams = CountParams(), junta: JuntaParams = JuntaParams(),
                          spectral: SpectralParams = SpectralParams()) -> Fraction:
    """Fast path for a regular p: the tree is a single leaf, so this is one Gaussian count."""
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if any(i == j for i, j in p.quad):
        raise PreconditionError("the hypercube counter needs a multilinear polynomial")
    if tau is None:
        tau = Fraction(params.c_tau) * eps**9
    if not is_regular(p, tau):
        raise PreconditionError(f"polynomial is not {float(tau):.3g}-regular; use count_boolean instead")
    return count_gaussian(p, eps * as_fraction(params.gaussian_fraction), count_params, junta, spectral)
