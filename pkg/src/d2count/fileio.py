"""Text formats: ``.d2p`` polynomials and edge lists.

A ``.d2p`` file lists one term per line with 1-based variable indices::

    # comments start with '#'
    n 3
    multilinear
    Q 1 2 -1/2
    L 3 4
    C 7

``Q i j c`` needs i <= j. The long keywords ``quad``, ``lin`` and ``const``
are accepted too. ``multilinear`` marks a hypercube polynomial, which may
not hold ``Q i i`` terms. Coefficients are integers, fractions ``p/q`` or
finite decimals. Repeated terms are summed.

An edge list holds one ``u v`` pair per line (1-based), optionally preceded
by ``n N`` to fix the vertex count.
"""
from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .errors import D2CountError
from .poly import Degree2Polynomial


class ParseError(D2CountError, ValueError):
    """Malformed input file."""


def _coef(tok: str, where: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: bad coefficient {tok!r}") from None


def _index(tok: str, n: int | None, where: str) -> int:
    try:
        i = int(tok)
    except ValueError:
        raise ParseError(f"{where}: bad index {tok!r}") from None
    if i < 1 or (n is not None and i > n):
        raise ParseError(f"{where}: index {i} out of range 1..{n}")
    return i - 1


def parse_d2p(text: str) -> Degree2Polynomial:
    n = None
    multilinear = False
    quad: dict[tuple[int, int], Fraction] = {}
    lin: dict[int, Fraction] = {}
    const = Fraction(0)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        tok = line.split()
        key = tok[0].lower()
        if key == "n":
            if len(tok) != 2 or n is not None:
                raise ParseError(f"{where}: expected a single 'n <count>' line")
            try:
                n = int(tok[1])
            except ValueError:
                raise ParseError(f"{where}: bad variable count {tok[1]!r}") from None
            if n < 0:
                raise ParseError(f"{where}: negative variable count")
            continue
        if n is None:
            raise ParseError(f"{where}: 'n <count>' must come first")
        if key == "multilinear" and len(tok) == 1:
            multilinear = True
        elif key in ("q", "quad") and len(tok) == 4:
            i, j = _index(tok[1], n, where), _index(tok[2], n, where)
            if i > j:
                raise ParseError(f"{where}: quadratic term needs i <= j")
            quad[(i, j)] = quad.get((i, j), Fraction(0)) + _coef(tok[3], where)
        elif key in ("l", "lin") and len(tok) == 3:
            i = _index(tok[1], n, where)
            lin[i] = lin.get(i, Fraction(0)) + _coef(tok[2], where)
        elif key in ("c", "const") and len(tok) == 2:
            const += _coef(tok[1], where)
        else:
            raise ParseError(f"{where}: cannot parse {line!r}")
    if n is None:
        raise ParseError("missing 'n <count>' line")
    try:
        return Degree2Polynomial(n, quad, lin, const, multilinear)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_d2p(p: Degree2Polynomial) -> str:
    lines = [f"n {p.n}"]
    if p.multilinear:
        lines.append("multilinear")
    lines += [f"Q {i + 1} {j + 1} {v}" for (i, j), v in p.quad.items()]
    lines += [f"L {i + 1} {v}" for i, v in p.lin.items()]
    if p.constant:
        lines.append(f"C {p.constant}")
    return "\n".join(lines) + "\n"


def read_d2p(path) -> Degree2Polynomial:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_d2p(text)


def write_d2p(p: Degree2Polynomial, path) -> None:
    Path(path).write_text(format_d2p(p))


def parse_edges(text: str) -> tuple[list[tuple[int, int]], int]:
    """(0-based edges, vertex count)."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        where = f"line {lineno}"
        if tok[0].lower() == "n" and len(tok) == 2 and not edges and n is None:
            try:
                n = int(tok[1])
            except ValueError:
                raise ParseError(f"{where}: bad vertex count {tok[1]!r}") from None
            continue
        if len(tok) != 2:
            raise ParseError(f"{where}: expected 'u v'")
        edges.append((_index(tok[0], n, where), _index(tok[1], n, where)))
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return edges, n


def read_edges(path) -> tuple[list[tuple[int, int]], int]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_edges(text)


def format_edges(edges, n: int) -> str:
    return f"n {n}\n" + "".join(f"{u + 1} {v + 1}\n" for u, v in edges)
