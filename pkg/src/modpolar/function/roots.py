"""Certified real roots of complex polynomials on [0,1].

Floating coefficients are read as the shortest decimal within a relative
1e-15 of the double (``0.1`` becomes 1/10), so data such as ``(t - 0.3)^2``
keeps its double root instead of splitting under rounding noise.  Isolation
is then exact for that rational data.  Real
roots of ``p = p_re + i p_im`` are the common real roots of the two real
parts, i.e. the roots of their gcd.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import sympy as sp

from .poly import Poly

T = sp.Symbol("t", real=True)
CLUSTER = 1e-8
_REFINE = sp.Rational(1, 10**15)
_SNAP = 1e-15


def exact_rational(x: float) -> sp.Rational:
    """The shortest decimal within a relative ``_SNAP`` of ``x``, as an exact rational."""
    exact = Fraction(x)
    tol = Fraction(_SNAP) * abs(exact)
    for digits in range(1, 18):
        approx = Fraction(format(x, f".{digits}g"))
        if abs(approx - exact) <= tol:
            break
    else:
        approx = exact
    return sp.Rational(approx.numerator, approx.denominator)


@dataclass(frozen=True)
class Root:
    """A real root: exact isolating interval, midpoint and multiplicity."""

    lo: sp.Rational
    hi: sp.Rational
    multiplicity: int

    @property
    def value(self) -> float:
        return float((self.lo + self.hi) / 2)


def to_sympy(p: Poly) -> tuple[sp.Poly, sp.Poly]:
    """Exact real and imaginary parts of ``p`` as sympy polynomials over QQ."""
    re = [exact_rational(c.real) for c in p.coeffs]
    im = [exact_rational(c.imag) for c in p.coeffs]
    return (
        sp.Poly(list(reversed(re)), T, domain=sp.QQ),
        sp.Poly(list(reversed(im)), T, domain=sp.QQ),
    )


def real_part_gcd(parts: Iterable[sp.Poly]) -> sp.Poly:
    """gcd of a family of real polynomials (zero if all vanish)."""
    g = sp.Poly(0, T, domain=sp.QQ)
    for q in parts:
        g = q if g.is_zero else (g if q.is_zero else sp.gcd(g, q))
    return g


def isolate(q: sp.Poly) -> list[Root]:
    """Isolating intervals of the real roots of ``q`` in [0,1]."""
    if q.is_zero:
        raise ValueError("the zero polynomial has no isolated roots")
    if q.degree() <= 0:
        return []
    found = q.intervals(inf=0, sup=1, eps=_REFINE)
    return [Root(sp.Rational(lo), sp.Rational(hi), int(m)) for (lo, hi), m in found]


@lru_cache(maxsize=512)
def _roots_of_coeffs(coeffs: tuple[complex, ...]) -> tuple[Root, ...]:
    re, im = to_sympy(Poly(coeffs))
    return tuple(isolate(real_part_gcd([re, im])))


def roots_in_unit_interval(p: Poly) -> list[Root]:
    """Real roots of a nonzero complex polynomial in [0,1]."""
    if p.is_zero():
        raise ValueError("the zero polynomial vanishes everywhere")
    return list(_roots_of_coeffs(p.coeffs))


def common_roots(polys: Sequence[Poly]) -> list[Root]:
    """Common real roots in [0,1] of several complex polynomials (not all zero)."""
    parts = []
    for p in polys:
        parts.extend(to_sympy(p))
    g = real_part_gcd(parts)
    if g.is_zero:
        raise ValueError("all polynomials vanish identically")
    return isolate(g)


def cluster(roots: Sequence[Root], gap: float = CLUSTER) -> list[float]:
    """Root locations with roots closer than ``gap`` merged into one."""
    out: list[float] = []
    for r in sorted(roots, key=lambda r: r.lo):
        if out and r.value - out[-1] < gap:
            continue
        out.append(r.value)
    return out


def is_root(q: sp.Poly, root: Root, source: sp.Poly) -> bool:
    """Whether the root of ``source`` isolated by ``root`` is also a root of ``q``."""
    if q.is_zero:
        return True
    if root.lo == root.hi:
        return q.eval(root.lo) == 0
    g = sp.gcd(q, source)
    # roots of g are roots of source, and [lo, hi] isolates exactly one of those
    return bool(isolate_in(g, root.lo, root.hi))


def isolate_in(q: sp.Poly, lo, hi) -> list[Root]:
    if q.degree() <= 0:
        return []
    found = q.intervals(inf=lo, sup=hi, eps=_REFINE)
    return [Root(sp.Rational(a), sp.Rational(b), int(m)) for (a, b), m in found]


def is_nonnegative(p: Poly) -> bool:
    """Exact test of ``p(t) >= 0`` for all t in [0,1] (real ``p`` only)."""
    if not p.is_real():
        return False
    re, _ = to_sympy(p)
    if re.is_zero:
        return True
    roots = isolate(re)
    # sign is constant between consecutive roots; sample one rational point per gap
    points = [sp.Integer(0), sp.Integer(1)]
    edges = [sp.Integer(0)] + [x for r in roots for x in (r.lo, r.hi)] + [sp.Integer(1)]
    for left, right in zip(edges[0::2], edges[1::2]):
        if left < right:
            points.append((left + right) / 2)
    return all(re.eval(x) >= 0 for x in points)


def vanishes_somewhere(p: Poly) -> bool:
    return bool(roots_in_unit_interval(p))


__all__ = [
    "Root",
    "exact_rational",
    "CLUSTER",
    "to_sympy",
    "real_part_gcd",
    "isolate",
    "roots_in_unit_interval",
    "common_roots",
    "cluster",
    "is_root",
    "is_nonnegative",
    "vanishes_somewhere",
]
