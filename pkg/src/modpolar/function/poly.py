"""Elements of C[0,1]: complex polynomials and symbolic nodes over them.

Polynomials keep exact (floating) coefficient lists in ascending degree.
Non-polynomial elements such as ``sqrt(t)`` are kept as expression nodes and
are only ever evaluated pointwise; they are never re-expanded.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np


class PolyFunction:
    """Base class of the element types.  Subclasses are immutable and hashable."""

    is_polynomial = False

    def __call__(self, t):
        return self.evaluate(t)

    def evaluate(self, t):
        raise NotImplementedError

    def conj(self) -> "PolyFunction":
        raise NotImplementedError

    def zero_set_poly(self) -> "Poly":
        """A polynomial with the same zeros on [0,1]."""
        raise NotImplementedError

    def is_zero(self) -> bool:
        return False

    def __mul__(self, other) -> "PolyFunction":
        return multiply(self, as_function(other))

    def __rmul__(self, other) -> "PolyFunction":
        return multiply(as_function(other), self)

    def __add__(self, other) -> "PolyFunction":
        return add(self, as_function(other))

    def __radd__(self, other) -> "PolyFunction":
        return add(as_function(other), self)

    def __neg__(self) -> "PolyFunction":
        return multiply(Poly([-1.0]), self)

    def __sub__(self, other) -> "PolyFunction":
        return add(self, -as_function(other))


def _trim(coeffs: Iterable[complex]) -> tuple[complex, ...]:
    c = [complex(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c) if c else (0j,)


class Poly(PolyFunction):
    """``sum_k coeffs[k] t^k``."""

    is_polynomial = True
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex]) -> None:
        self.coeffs = _trim(coeffs)

    @classmethod
    def t(cls) -> "Poly":
        return cls([0.0, 1.0])

    @classmethod
    def constant(cls, c: complex) -> "Poly":
        return cls([c])

    @property
    def degree(self) -> int:
        return -1 if self.is_zero() else len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self.coeffs)

    def evaluate(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), np.array(self.coeffs))

    def conj(self) -> "Poly":
        return Poly([c.conjugate() for c in self.coeffs])

    def zero_set_poly(self) -> "Poly":
        return self

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(("Poly", self.coeffs))

    def __repr__(self) -> str:
        return f"Poly({[_fmt(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            cs = _fmt(c)
            mono = "t" if k == 1 else f"t^{k}"
            if k == 0:
                terms.append(cs)
            elif cs in ("1", "-1"):
                terms.append(cs[:-1] + mono)
            else:
                terms.append(f"{cs}*{mono}")
        return " + ".join(terms) if terms else "0"


def _fmt(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:g}"
    return f"({c.real:g}{c.imag:+g}i)"


class Sqrt(PolyFunction):
    """``sqrt(f)`` for a real polynomial ``f >= 0`` on [0,1]."""

    __slots__ = ("arg",)

    def __init__(self, arg: Poly) -> None:
        if not isinstance(arg, Poly) or not arg.is_real():
            raise ValueError("sqrt nodes need a real polynomial argument")
        self.arg = arg

    def evaluate(self, t):
        val = np.real(self.arg.evaluate(t))
        return np.sqrt(np.clip(val, 0.0, None)).astype(complex)

    def conj(self) -> "Sqrt":
        return self

    def zero_set_poly(self) -> Poly:
        return self.arg

    def __eq__(self, other) -> bool:
        return isinstance(other, Sqrt) and self.arg == other.arg

    def __hash__(self) -> int:
        return hash(("Sqrt", self.arg))

    def __repr__(self) -> str:
        return f"Sqrt({self.arg!r})"

    def __str__(self) -> str:
        return f"sqrt({self.arg})"


class Abs(PolyFunction):
    """``|f|`` for a polynomial ``f``."""

    __slots__ = ("arg",)

    def __init__(self, arg: Poly) -> None:
        self.arg = arg

    def evaluate(self, t):
        return np.abs(self.arg.evaluate(t)).astype(complex)

    def conj(self) -> "Abs":
        return self

    def zero_set_poly(self) -> Poly:
        return self.arg

    def __eq__(self, other) -> bool:
        return isinstance(other, Abs) and self.arg == other.arg

    def __hash__(self) -> int:
        return hash(("Abs", self.arg))

    def __repr__(self) -> str:
        return f"Abs({self.arg!r})"

    def __str__(self) -> str:
        return f"|{self.arg}|"


class Product(PolyFunction):
    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[PolyFunction]) -> None:
        self.factors = tuple(factors)

    def evaluate(self, t):
        out = np.ones_like(np.asarray(t, dtype=float), dtype=complex)
        for f in self.factors:
            out = out * f.evaluate(t)
        return out

    def conj(self) -> PolyFunction:
        return Product(f.conj() for f in self.factors)

    def zero_set_poly(self) -> Poly:
        out = Poly([1.0])
        for f in self.factors:
            out = _poly_mul(out, f.zero_set_poly())
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Product) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(("Product", self.factors))

    def __repr__(self) -> str:
        return f"Product({list(self.factors)!r})"

    def __str__(self) -> str:
        return "*".join(f"({f})" for f in self.factors)


class Sum(PolyFunction):
    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[PolyFunction]) -> None:
        self.terms = tuple(terms)

    def evaluate(self, t):
        out = np.zeros_like(np.asarray(t, dtype=float), dtype=complex)
        for f in self.terms:
            out = out + f.evaluate(t)
        return out

    def conj(self) -> PolyFunction:
        return Sum(f.conj() for f in self.terms)

    def zero_set_poly(self) -> Poly:
        raise ValueError(f"zero set of the sum {self} is not available exactly")

    def __eq__(self, other) -> bool:
        return isinstance(other, Sum) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(("Sum", self.terms))

    def __repr__(self) -> str:
        return f"Sum({list(self.terms)!r})"

    def __str__(self) -> str:
        return " + ".join(str(f) for f in self.terms)


def as_function(x) -> PolyFunction:
    if isinstance(x, PolyFunction):
        return x
    return Poly([x])


def _poly_mul(p: Poly, q: Poly) -> Poly:
    return Poly(np.convolve(np.array(p.coeffs), np.array(q.coeffs)))


def _poly_add(p: Poly, q: Poly) -> Poly:
    n = max(len(p.coeffs), len(q.coeffs))
    a = np.zeros(n, dtype=complex)
    a[: len(p.coeffs)] += p.coeffs
    a[: len(q.coeffs)] += q.coeffs
    return Poly(a)


ZERO = Poly([0.0])
ONE = Poly([1.0])


def _factors(f: PolyFunction) -> list[PolyFunction]:
    return list(f.factors) if isinstance(f, Product) else [f]


def multiply(f: PolyFunction, g: PolyFunction) -> PolyFunction:
    """Product with the simplifications ``sqrt(p) sqrt(p) = p`` and polynomial folding."""
    if f.is_zero() or g.is_zero():
        return ZERO
    poly = ONE
    rest: list[PolyFunction] = []
    for h in _factors(f) + _factors(g):
        if isinstance(h, Poly):
            poly = _poly_mul(poly, h)
            continue
        if isinstance(h, Sqrt) and h in rest:
            rest.remove(h)
            poly = _poly_mul(poly, h.arg)
            continue
        rest.append(h)
    if not rest:
        return poly
    if poly == ONE and len(rest) == 1:
        return rest[0]
    return Product(([] if poly == ONE else [poly]) + rest)


def add(f: PolyFunction, g: PolyFunction) -> PolyFunction:
    if f.is_zero():
        return g
    if g.is_zero():
        return f
    if isinstance(f, Poly) and isinstance(g, Poly):
        return _poly_add(f, g)
    return Sum([f, g])


def sqrt_of(f: PolyFunction) -> PolyFunction:
    """Positive square root, kept symbolic unless ``f`` is a non-negative constant."""
    if isinstance(f, Poly):
        if f.degree <= 0:
            c = f.coeffs[0]
            if c.imag != 0 or c.real < 0:
                raise ValueError(f"constant {c} has no positive square root")
            return Poly([np.sqrt(c.real)])
        return Sqrt(f)
    raise ValueError(f"square roots of {f} are not represented")


__all__ = [
    "PolyFunction",
    "Poly",
    "Sqrt",
    "Abs",
    "Product",
    "Sum",
    "ZERO",
    "ONE",
    "as_function",
    "multiply",
    "add",
    "sqrt_of",
]
