"""Finitely generated modules over C[0,1] and operators between them.

A submodule of ``C[0,1]^n`` is given by generator columns.  Its closure is
read off the fibers: away from finitely many *drop points* the generators span
a fixed-rank subspace; at a drop point the fiber rank falls.  Constant rank
means the fiber projections form a continuous family, i.e. a projection in the
adjointable operators; a drop is an obstruction to complementedness.

Structural facts (generic ranks, drop points, kernels) are decided with exact
rational arithmetic on the coefficients.  Grid evaluation is used only for
norm-type defects and pointwise identity checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from ..algebra import DEFAULT_TOL
from .poly import ONE, ZERO, Poly, PolyFunction, as_function, sqrt_of
from .roots import CLUSTER, T, exact_rational, is_nonnegative, is_root, isolate, real_part_gcd

GRID = 257
# probe points for generic ranks of non-polynomial matrices
_PROBES = (0.2718281828, 0.5772156649, 0.8660254038)
_RICHARDSON = (1e-3, 1e-4)
_JUMP = 1e-3


class LengthMismatch(ValueError):
    pass


class DegenerateGenerators(ValueError):
    """All generators vanish identically."""


class Undecidable(ValueError):
    """The exact criterion does not apply to the given data."""


def chebyshev_grid(size: int = GRID) -> np.ndarray:
    """Chebyshev-Lobatto points on [0,1], endpoints included, ascending."""
    if size < 2:
        raise ValueError("grid needs at least two points")
    k = np.arange(size)
    return (1.0 - np.cos(np.pi * k / (size - 1))) / 2.0


# ---------------------------------------------------------------- exact helpers


def _to_expr(p: Poly) -> sp.Expr:
    return sum(
        (exact_rational(c.real) + sp.I * exact_rational(c.imag)) * T**k for k, c in enumerate(p.coeffs)
    )


def _from_expr(expr: sp.Expr) -> Poly:
    expr = sp.expand(expr)
    if expr == 0:
        return ZERO
    coeffs = sp.Poly(expr, T).all_coeffs()[::-1]
    return Poly([complex(sp.N(c, 17)) for c in coeffs])


def _parts(expr: sp.Expr) -> tuple[sp.Poly, sp.Poly]:
    expr = sp.expand(expr)
    if expr == 0:
        z = sp.Poly(0, T, domain=sp.QQ)
        return z, z
    coeffs = sp.Poly(expr, T).all_coeffs()
    re = sp.Poly([sp.re(c) for c in coeffs], T, domain=sp.QQ)
    im = sp.Poly([sp.im(c) for c in coeffs], T, domain=sp.QQ)
    return re, im


def _matrix_expr(cols: Sequence[Sequence[Poly]], n: int) -> sp.Matrix:
    return sp.Matrix(n, len(cols), lambda i, j: _to_expr(cols[j][i]))


def _minor_gcds(mat: sp.Matrix) -> list[sp.Poly]:
    """``g[s]`` = gcd of the real and imaginary parts of all ``s x s`` minors."""
    n, k = mat.shape
    out = [sp.Poly(1, T, domain=sp.QQ)]
    for s in range(1, min(n, k) + 1):
        parts = []
        for rows in itertools.combinations(range(n), s):
            for cols in itertools.combinations(range(k), s):
                det = mat.extract(list(rows), list(cols)).det(method="berkowitz")
                parts.extend(_parts(det))
        g = real_part_gcd(parts)
        out.append(g)
        if g.is_zero:
            break
    return out


def _generic_rank(gcds: list[sp.Poly]) -> int:
    r = 0
    for s, g in enumerate(gcds):
        if not g.is_zero:
            r = s
    return r


def _evaluate_matrix(entries: Sequence[Sequence[PolyFunction]], t: float, rows: int, cols: int) -> np.ndarray:
    out = np.zeros((rows, cols), dtype=complex)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = complex(np.asarray(entries[i][j].evaluate(t)))
    return out


def _numeric_rank(a: np.ndarray, tol: float) -> int:
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))


# ---------------------------------------------------------------- vectors


@dataclass(frozen=True)
class FnModuleVector:
    """An element of ``C[0,1]^n``."""

    entries: tuple[PolyFunction, ...]

    def __init__(self, entries: Sequence) -> None:
        object.__setattr__(self, "entries", tuple(as_function(e) for e in entries))

    def __len__(self) -> int:
        return len(self.entries)

    def evaluate(self, t) -> np.ndarray:
        return np.array([np.asarray(e.evaluate(t)) for e in self.entries])


def fn_inner_product(x: FnModuleVector, y: FnModuleVector) -> PolyFunction:
    """``sum_i conj(x_i) y_i``, exact for polynomial entries."""
    if len(x) != len(y):
        raise LengthMismatch(f"lengths {len(x)} and {len(y)} differ")
    out: PolyFunction = ZERO
    for xi, yi in zip(x.entries, y.entries):
        out = out + xi.conj() * yi
    return out


# ---------------------------------------------------------------- submodules


@dataclass(frozen=True)
class RankProfile:
    points: np.ndarray
    ranks: np.ndarray
    generic_rank: int
    drop_points: tuple[float, ...]
    drop_ranks: tuple[int, ...]

    @property
    def constant(self) -> bool:
        return not self.drop_points


def _surrogate_column(col: Sequence[PolyFunction]) -> list[Poly]:
    if all(isinstance(e, Poly) for e in col):
        return list(col)
    nonzero = [i for i, e in enumerate(col) if not e.is_zero()]
    if len(nonzero) != 1:
        raise Undecidable("non-polynomial generators must have a single nonzero entry")
    # a single-entry column f e_i generates the same closed submodule as z e_i,
    # where z is any polynomial with the zero set of f
    out = [ZERO] * len(col)
    out[nonzero[0]] = col[nonzero[0]].zero_set_poly()
    return out


class FnSubmodule:
    """Closed submodule of ``C[0,1]^n`` generated by the given columns.

    ``generators`` is a list of columns, each a length-``n`` sequence of
    elements.  The zero submodule has no generators.
    """

    def __init__(self, n: int, generators: Sequence[Sequence] = ()) -> None:
        self.n = int(n)
        cols = []
        for col in generators:
            col = tuple(as_function(e) for e in col)
            if len(col) != self.n:
                raise LengthMismatch(f"generator of length {len(col)} in C[0,1]^{self.n}")
            cols.append(col)
        self.generators: tuple[tuple[PolyFunction, ...], ...] = tuple(cols)

    @classmethod
    def full(cls, n: int) -> "FnSubmodule":
        return cls(n, [[ONE if i == j else ZERO for i in range(n)] for j in range(n)])

    @classmethod
    def zero(cls, n: int) -> "FnSubmodule":
        return cls(n, [])

    @property
    def k(self) -> int:
        return len(self.generators)

    @cached_property
    def _surrogate(self) -> list[list[Poly]]:
        return [_surrogate_column(c) for c in self.generators]

    @cached_property
    def _exact(self):
        """Generic rank, minor gcds and clustered drop points with their ranks."""
        if self.k == 0:
            return 0, [], ()
        gcds = _minor_gcds(_matrix_expr(self._surrogate, self.n))
        r = _generic_rank(gcds)
        if r == 0:
            return 0, gcds, ()
        source = gcds[r]
        drops = []
        for root in isolate(source):
            rank = 0
            for s in range(r - 1, 0, -1):
                if not is_root(gcds[s], root, source):
                    rank = s
                    break
            drops.append((root, rank))
        merged: list[tuple[float, int]] = []
        for root, rank in sorted(drops, key=lambda d: d[0].lo):
            if merged and root.value - merged[-1][0] < CLUSTER:
                merged[-1] = (merged[-1][0], min(merged[-1][1], rank))
            else:
                merged.append((root.value, rank))
        return r, gcds, tuple(merged)

    @property
    def generic_rank(self) -> int:
        return self._exact[0]

    @property
    def drops(self) -> tuple[tuple[float, int], ...]:
        return self._exact[2]

    @property
    def drop_points(self) -> tuple[float, ...]:
        return tuple(d[0] for d in self.drops)

    @property
    def is_zero(self) -> bool:
        return self.generic_rank == 0

    @property
    def is_full(self) -> bool:
        return self.generic_rank == self.n and not self.drops

    def rank_at(self, t: float) -> int:
        for t0, rank in self.drops:
            if abs(t - t0) < CLUSTER:
                return rank
        return self.generic_rank

    def generator_matrix(self, t: float) -> np.ndarray:
        out = np.zeros((self.n, self.k), dtype=complex)
        for j, col in enumerate(self.generators):
            for i, e in enumerate(col):
                out[i, j] = complex(np.asarray(e.evaluate(t)))
        return out

    def fiber_basis(self, t: float) -> np.ndarray:
        """Orthonormal basis (columns) of the fiber of the closure at ``t``."""
        r = self.rank_at(t)
        if r == 0:
            return np.zeros((self.n, 0), dtype=complex)
        u, _, _ = np.linalg.svd(self.generator_matrix(t))
        return u[:, :r]

    def fiber_projector(self, t: float) -> np.ndarray:
        q = self.fiber_basis(t)
        return q @ q.conj().T

    def __repr__(self) -> str:
        gens = ", ".join("(" + ", ".join(str(e) for e in c) + ")" for c in self.generators)
        return f"FnSubmodule(n={self.n}, generators=[{gens}])"


def fiber_rank_profile(s: FnSubmodule, grid: int = GRID) -> RankProfile:
    """Fiber ranks on the Chebyshev grid together with the exact drop points."""
    if s.is_zero:
        raise DegenerateGenerators(f"generators of {s!r} vanish identically")
    points = chebyshev_grid(grid)
    ranks = np.array([s.rank_at(t) for t in points], dtype=int)
    return RankProfile(
        points=points,
        ranks=ranks,
        generic_rank=s.generic_rank,
        drop_points=s.drop_points,
        drop_ranks=tuple(d[1] for d in s.drops),
    )


def _generic_rank_of_columns(cols: Sequence[Sequence[Poly]], n: int) -> int:
    if not cols:
        return 0
    return _generic_rank(_minor_gcds(_matrix_expr(cols, n)))


def fn_submodule_contains(big: FnSubmodule, small: FnSubmodule, tol: float = 1e-8) -> bool:
    """Whether the closure of ``small`` lies in the closure of ``big``."""
    if big.n != small.n:
        raise LengthMismatch("submodules of different ambient modules")
    if small.is_zero:
        return True
    joint = _generic_rank_of_columns(list(big._surrogate) + list(small._surrogate), big.n)
    if joint != big.generic_rank:
        return False
    points = sorted(set(big.drop_points) | set(small.drop_points))
    for t0 in points:
        qs = small.fiber_basis(t0)
        pb = big.fiber_projector(t0)
        if qs.shape[1] and np.linalg.norm(qs - pb @ qs) > tol:
            return False
    return True


def fn_submodule_equal(s: FnSubmodule, t: FnSubmodule, tol: float = 1e-8) -> bool:
    return fn_submodule_contains(s, t, tol) and fn_submodule_contains(t, s, tol)


@dataclass(frozen=True)
class ComplementVerdict:
    complemented: bool
    drop_points: tuple[float, ...] = ()

    def __bool__(self) -> bool:
        return self.complemented


def fn_is_complemented(s: FnSubmodule, within: FnSubmodule | None = None) -> ComplementVerdict:
    """Constant-fiber-rank criterion, with the drop points as certificate.

    ``within`` (default: the whole free module) is the ambient submodule.  In
    a proper ambient only the drops that the ambient does not share count.
    """
    if s.is_zero and not s.k:
        return ComplementVerdict(True)
    if s.is_zero:
        raise DegenerateGenerators(f"generators of {s!r} vanish identically")
    if within is None or within.is_full:
        return ComplementVerdict(not s.drops, s.drop_points)
    if fn_submodule_equal(s, within):
        return ComplementVerdict(True)
    own = [t0 for t0 in s.drop_points if all(abs(t0 - u) >= CLUSTER for u in within.drop_points)]
    if own:
        return ComplementVerdict(False, tuple(own))
    raise Undecidable("complementedness inside a non-complemented ambient is not decided")


def fn_orthocomplement(s: FnSubmodule) -> FnSubmodule:
    """``s^perp`` in ``C[0,1]^n``: sections pointwise orthogonal to the generic fiber."""
    if s.is_zero:
        return FnSubmodule.full(s.n)
    if s.generic_rank == s.n:
        return FnSubmodule.zero(s.n)
    adj = _matrix_expr(s._surrogate, s.n).H.applyfunc(lambda e: e.subs(sp.conjugate(T), T))
    return FnSubmodule(s.n, _polynomial_nullspace(adj))


def _polynomial_nullspace(mat: sp.Matrix) -> list[list[Poly]]:
    """Null space of a polynomial matrix, as polynomial columns without common factors."""
    out = []
    for vec in mat.nullspace(simplify=True):
        den = sp.lcm([sp.fraction(sp.together(e))[1] for e in vec])
        entries = [sp.expand(sp.cancel(e * den)) for e in vec]
        content = sp.gcd_list([e for e in entries if e != 0])
        if content not in (0, 1):
            entries = [sp.expand(sp.cancel(e / content)) for e in entries]
        out.append([_from_expr(e) for e in entries])
    return out


# ---------------------------------------------------------------- maps


class FnModuleMap:
    """Multiplication by an ``m x n`` matrix of elements, on a domain submodule."""

    def __init__(
        self,
        matrix: Sequence[Sequence],
        domain: FnSubmodule | None = None,
        codomain: FnSubmodule | None = None,
    ) -> None:
        rows = [tuple(as_function(e) for e in row) for row in matrix]
        if not rows or len({len(r) for r in rows}) != 1:
            raise LengthMismatch("operator matrix must be a non-empty rectangle")
        self.entries: tuple[tuple[PolyFunction, ...], ...] = tuple(rows)
        self.m, self.n = len(rows), len(rows[0])
        self.domain = FnSubmodule.full(self.n) if domain is None else domain
        self.codomain = FnSubmodule.full(self.m) if codomain is None else codomain
        if self.domain.n != self.n or self.codomain.n != self.m:
            raise LengthMismatch("matrix shape does not match domain/codomain")

    @property
    def is_polynomial(self) -> bool:
        return all(isinstance(e, Poly) for row in self.entries for e in row)

    @property
    def is_diagonal(self) -> bool:
        return self.m == self.n and all(
            self.entries[i][j].is_zero() for i in range(self.m) for j in range(self.n) if i != j
        )

    def evaluate(self, t: float) -> np.ndarray:
        return _evaluate_matrix(self.entries, t, self.m, self.n)

    def apply(self, x: FnModuleVector) -> FnModuleVector:
        if len(x) != self.n:
            raise LengthMismatch(f"vector of length {len(x)} for a map on C[0,1]^{self.n}")
        out = []
        for row in self.entries:
            acc: PolyFunction = ZERO
            for a, xi in zip(row, x.entries):
                acc = acc + a * xi
            out.append(acc)
        return FnModuleVector(out)

    __call__ = apply

    def image_generators(self) -> list[tuple[PolyFunction, ...]]:
        return [self.apply(FnModuleVector(col)).entries for col in self.domain.generators]

    def conj_transpose(self) -> list[list[PolyFunction]]:
        return [[self.entries[i][j].conj() for i in range(self.m)] for j in range(self.n)]

    def __repr__(self) -> str:
        rows = "; ".join(", ".join(str(e) for e in row) for row in self.entries)
        return f"FnModuleMap([{rows}])"


def fn_range_closure(m: FnModuleMap) -> FnSubmodule:
    return FnSubmodule(m.m, m.image_generators())


def _generic_rank_any(cols: Sequence[Sequence[PolyFunction]], n: int) -> int:
    """Generic rank; exact for polynomial columns, probed otherwise."""
    if not cols:
        return 0
    if all(isinstance(e, Poly) for c in cols for e in c):
        return _generic_rank_of_columns(cols, n)
    # off a finite set the rank is maximal, so a few fixed probes suffice
    ranks = []
    for t in _PROBES:
        a = np.array([[complex(np.asarray(e.evaluate(t))) for e in c] for c in cols]).T
        ranks.append(_numeric_rank(a, 1e-10))
    return max(ranks)


def fn_kernel(m: FnModuleMap) -> FnSubmodule:
    """Kernel of ``m`` on its domain (possibly the zero submodule).

    A continuous section killed by ``m`` vanishes wherever ``m`` is injective
    on the fiber; if that holds off a finite set, the section is zero.
    """
    images = m.image_generators()
    r_dom = m.domain.generic_rank
    r_img = _generic_rank_any(images, m.m)
    if r_img == r_dom:
        return FnSubmodule.zero(m.n)
    if r_img == 0:
        return m.domain
    if not (m.is_polynomial and all(isinstance(e, Poly) for c in m.domain.generators for e in c)):
        raise Undecidable("non-trivial kernels are computed for polynomial data only")
    mg = _matrix_expr(images, m.m)
    g = _matrix_expr(m.domain.generators, m.n)
    gens = []
    for coeffs in _polynomial_nullspace(mg):
        c = sp.Matrix([_to_expr(p) for p in coeffs])
        gens.append([_from_expr(e) for e in g * c])
    return FnSubmodule(m.n, gens)


@dataclass
class FnAdjointOutcome:
    """Adjoint candidate ``P_dom(t) m(t)^*`` or a refusal at a discontinuity."""

    ok: bool
    matrix: list[list[PolyFunction]] | None = None
    project_to_domain: bool = False
    witness: dict = field(default_factory=dict)
    jump: float = 0.0
    domain: FnSubmodule | None = None

    def __bool__(self) -> bool:
        return self.ok

    def evaluate(self, t: float) -> np.ndarray:
        if not self.ok:
            raise ValueError("no adjoint")
        rows, cols = len(self.matrix), len(self.matrix[0])
        out = _evaluate_matrix(self.matrix, t, rows, cols)
        if self.project_to_domain:
            out = self.domain.fiber_projector(t) @ out
        return out


def _limit_projector(s: FnSubmodule, t0: float, side: float) -> np.ndarray | None:
    h1, h2 = _RICHARDSON
    p1, p2 = t0 + side * h1, t0 + side * h2
    if not (0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0):
        return None
    a, b = s.fiber_projector(p1), s.fiber_projector(p2)
    # first-order Richardson extrapolation to h -> 0
    return (b * h1 - a * h2) / (h1 - h2)


def fn_try_adjoint(m: FnModuleMap) -> FnAdjointOutcome:
    """Accept iff ``P_dom(t) m(t)^*`` is continuous across the domain's drop points."""
    dom = m.domain
    adj = m.conj_transpose()
    if not dom.drops:
        return FnAdjointOutcome(True, adj, project_to_domain=not dom.is_full, domain=dom)
    worst, where = 0.0, None
    for t0 in dom.drop_points:
        mstar = m.evaluate(t0).conj().T
        scale = max(1.0, np.linalg.norm(mstar, 2))
        p0 = dom.fiber_projector(t0)
        for side in (-1.0, 1.0):
            plim = _limit_projector(dom, t0, side)
            if plim is None:
                continue
            jump = float(np.linalg.norm((plim - p0) @ mstar, 2)) / scale
            if jump > worst:
                worst, where = jump, t0
    if worst > _JUMP:
        return FnAdjointOutcome(False, witness={"t": where}, jump=worst, domain=dom)
    return FnAdjointOutcome(True, adj, project_to_domain=True, jump=worst, domain=dom)


# ---------------------------------------------------------------- modularity


@dataclass
class FnModularity:
    b: FnModuleMap
    residual: float
    exact: bool


def _gram_residual(dom: FnSubmodule, b: FnModuleMap, a: FnModuleMap, grid: int) -> tuple[float, bool]:
    """max |<g_i, b g_j> - <a g_i, a g_j>| over generator pairs."""
    worst, exact = 0.0, True
    points = None
    for gi in dom.generators:
        for gj in dom.generators:
            x, y = FnModuleVector(gi), FnModuleVector(gj)
            diff = fn_inner_product(x, b(y)) - fn_inner_product(a(x), a(y))
            if isinstance(diff, Poly):
                val = max(abs(c) for c in diff.coeffs)
            else:
                exact = False
                points = chebyshev_grid(grid) if points is None else points
                val = float(np.max(np.abs(diff.evaluate(points))))
            worst = max(worst, float(val))
    return worst, exact


def fn_solve_modularity(a: FnModuleMap, tol: float = DEFAULT_TOL, grid: int = GRID):
    """The map ``b = a^* a`` (pointwise) with the residual of ``<x,by> = <ax,ay>``.

    Returns :class:`FnModularity` or a ``NotModular`` refusal.
    """
    from ..polar import Refusal

    adj = a.conj_transpose()
    entries = [
        [sum((adj[i][k] * a.entries[k][j] for k in range(a.m)), ZERO) for j in range(a.n)]
        for i in range(a.n)
    ]
    b = FnModuleMap(entries, domain=a.domain, codomain=a.domain)
    if not a.domain.is_full:
        if not fn_submodule_contains(a.domain, FnSubmodule(a.n, b.image_generators())):
            return Refusal("NotModular", "a^*a does not preserve the domain")
    residual, exact = _gram_residual(a.domain, b, a, grid)
    if residual > tol:
        return Refusal("NotModular", f"residual {residual:.3e} exceeds tolerance", {"residual": residual})
    return FnModularity(b, residual, exact)


def fn_modulus(b: FnModuleMap) -> FnModuleMap:
    """``sqrt(b)`` for diagonal ``b`` with non-negative real polynomial entries."""
    if not b.is_diagonal:
        raise Undecidable("square roots are represented for diagonal multipliers only")
    diag = []
    for i in range(b.n):
        e = b.entries[i][i]
        if not isinstance(e, Poly) or not is_nonnegative(e):
            raise ValueError(f"diagonal entry {e} is not a non-negative polynomial")
        diag.append(sqrt_of(e))
    entries = [[diag[i] if i == j else ZERO for j in range(b.n)] for i in range(b.n)]
    return FnModuleMap(entries, domain=b.domain, codomain=b.domain)


def fn_is_positive(b: FnModuleMap, grid: int = GRID) -> bool:
    """Pointwise positivity: exact for scalar polynomials, on the grid otherwise."""
    if b.m != b.n:
        return False
    if b.n == 1 and isinstance(b.entries[0][0], Poly):
        return is_nonnegative(b.entries[0][0])
    for t in chebyshev_grid(grid):
        h = b.evaluate(t)
        if np.linalg.norm(h - h.conj().T) > 1e-12 * max(1.0, np.linalg.norm(h)):
            return False
        if np.linalg.eigvalsh((h + h.conj().T) / 2).min() < -1e-12 * max(1.0, np.linalg.norm(h)):
            return False
    return True


def fn_is_invertible(b: FnModuleMap) -> bool:
    """``b(t)`` invertible for every ``t``: the determinant has no root in [0,1]."""
    if b.m != b.n or not b.is_polynomial:
        raise Undecidable("invertibility is decided for square polynomial matrices")
    det = sp.Matrix(b.m, b.n, lambda i, j: _to_expr(b.entries[i][j])).det(method="berkowitz")
    re, im = _parts(det)
    g = real_part_gcd([re, im])
    return not g.is_zero and not isolate(g)


# ---------------------------------------------------------------- pointwise maps


@dataclass
class PointwiseMap:
    """A map given by its value ``t -> matrix`` acting on the fibers of ``domain``."""

    domain: FnSubmodule
    value: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return self.value(t)


def _pinv(a: np.ndarray) -> np.ndarray:
    return np.linalg.pinv(a, rcond=1e-12, hermitian=True)


def build_fn_va(a: FnModuleMap, mod: FnModuleMap, Ea: FnSubmodule) -> PointwiseMap:
    """``v_a``: ``|a| x -> a x`` on the fibers of ``E_a``."""

    def value(t: float) -> np.ndarray:
        q = Ea.fiber_basis(t)
        return a.evaluate(t) @ _pinv(mod.evaluate(t)) @ q @ q.conj().T

    return PointwiseMap(Ea, value)


def isometry_defect(m: PointwiseMap, points: np.ndarray) -> float:
    worst = 0.0
    for t in points:
        q = m.domain.fiber_basis(t)
        if q.shape[1] == 0:
            continue
        vq = m(t) @ q
        worst = max(worst, float(np.linalg.norm(vq.conj().T @ vq - np.eye(q.shape[1]), 2)))
    return worst


def partial_isometry_defect(m: PointwiseMap, points: np.ndarray) -> float:
    """Distance of the singular values of ``m(t)`` on domain fibers from {0, 1}."""
    worst = 0.0
    for t in points:
        q = m.domain.fiber_basis(t)
        if q.shape[1] == 0:
            continue
        s = np.linalg.svd(m(t) @ q, compute_uv=False)
        worst = max(worst, float(np.max(np.minimum(np.abs(s), np.abs(s - 1.0)))))
    return worst


def fn_is_isometry_exact(a: FnModuleMap) -> float:
    """max |<a g_i, a g_j> - <g_i, g_j>| over generators, exact coefficients."""
    ident = FnModuleMap([[ONE if i == j else ZERO for j in range(a.n)] for i in range(a.n)], a.domain)
    return _gram_residual(a.domain, ident, a, GRID)[0]


# ---------------------------------------------------------------- polar pipeline


@dataclass
class FnPolarReport:
    a: FnModuleMap
    certificate: FnModularity | None = None
    modulus: FnModuleMap | None = None
    Eb: FnSubmodule | None = None
    Ea: FnSubmodule | None = None
    Ea_complemented: ComplementVerdict | None = None
    va: PointwiseMap | None = None
    v: PointwiseMap | None = None
    refusal: object = None
    checks: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    @property
    def modular(self) -> bool:
        return self.certificate is not None

    @property
    def has_v(self) -> bool:
        return self.v is not None

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


def _max_over(points, f) -> float:
    return max((float(f(t)) for t in points), default=0.0)


def fn_polar_decompose(a: FnModuleMap, tol: float = DEFAULT_TOL, grid: int = GRID) -> FnPolarReport:
    """Modulus, ``E_a``, ``v_a`` and — when ``E_a`` is complemented — ``v``."""
    from ..polar import Refusal

    report = FnPolarReport(a)
    cert = fn_solve_modularity(a, tol, grid)
    if not isinstance(cert, FnModularity):
        report.refusal = cert
        return report
    report.certificate = cert
    report.residuals["modularity"] = cert.residual
    points = chebyshev_grid(grid)
    dom = a.domain

    mod = fn_modulus(cert.b)
    report.modulus = mod
    report.Eb = fn_range_closure(cert.b)
    report.Ea = fn_range_closure(mod)
    report.checks["Ea_equals_Eb"] = fn_submodule_equal(report.Ea, report.Eb)

    def proj_dom(t):
        return dom.fiber_projector(t)

    sq = _max_over(points, lambda t: np.linalg.norm(
        (mod.evaluate(t) @ mod.evaluate(t) - cert.b.evaluate(t)) @ proj_dom(t), 2))
    report.residuals["modulus_squared"] = sq
    report.checks["modulus_squared_is_b"] = sq <= 10 * tol
    report.checks["b_positive"] = fn_is_positive(cert.b, grid)

    va = build_fn_va(a, mod, report.Ea)
    report.va = va
    iso = isometry_defect(va, points)
    report.residuals["va_isometry"] = iso
    report.checks["va_isometry"] = iso <= tol
    fac = _max_over(points, lambda t: np.linalg.norm(
        (va(t) @ mod.evaluate(t) - a.evaluate(t)) @ proj_dom(t), 2))
    report.residuals["va_modulus_is_a"] = fac
    report.checks["va_modulus_is_a"] = fac <= 10 * tol

    verdict = fn_is_complemented(report.Ea, within=None if dom.is_full else dom)
    report.Ea_complemented = verdict
    if not verdict:
        report.refusal = Refusal(
            "EaNotComplemented",
            "fiber rank of E_a drops",
            {"drop_points": list(verdict.drop_points)},
        )
        return report

    Ea = report.Ea

    def v_value(t: float) -> np.ndarray:
        return va(t) @ Ea.fiber_projector(t)

    v = PointwiseMap(dom, v_value)
    report.v = v
    vfac = _max_over(points, lambda t: np.linalg.norm(
        (v(t) @ mod.evaluate(t) - a.evaluate(t)) @ proj_dom(t), 2))
    report.residuals["v_modulus_is_a"] = vfac
    report.checks["v_modulus_is_a"] = vfac <= 10 * tol
    pid = partial_isometry_defect(v, points)
    report.residuals["v_partial_isometry"] = pid
    report.checks["v_partial_isometry"] = pid <= 10 * tol
    return report


@dataclass
class PositiveFacts:
    positive: bool
    invertible: bool
    kernel: FnSubmodule
    kernel_perp: FnSubmodule
    Eb: FnSubmodule
    Eb_complemented: ComplementVerdict

    @property
    def kernel_zero(self) -> bool:
        return self.kernel.is_zero

    @property
    def strictly_positive(self) -> bool:
        return self.positive and self.kernel_zero

    @property
    def kernel_perp_is_E(self) -> bool:
        return self.kernel_perp.is_full

    @property
    def Eb_equals_kernel_perp(self) -> bool:
        return fn_submodule_equal(self.Eb, self.kernel_perp)


def fn_positive_facts(b: FnModuleMap, grid: int = GRID) -> PositiveFacts:
    """Kernel, ``(ker b)^perp`` and ``E_b`` of a positive multiplier on ``C[0,1]^n``."""
    ker = fn_kernel(b)
    Eb = fn_range_closure(b)
    return PositiveFacts(
        positive=fn_is_positive(b, grid),
        invertible=fn_is_invertible(b),
        kernel=ker,
        kernel_perp=fn_orthocomplement(ker),
        Eb=Eb,
        Eb_complemented=fn_is_complemented(Eb),
    )


__all__ = [
    "GRID",
    "LengthMismatch",
    "DegenerateGenerators",
    "Undecidable",
    "chebyshev_grid",
    "FnModuleVector",
    "fn_inner_product",
    "RankProfile",
    "FnSubmodule",
    "fiber_rank_profile",
    "fn_submodule_contains",
    "fn_submodule_equal",
    "ComplementVerdict",
    "fn_is_complemented",
    "fn_orthocomplement",
    "FnModuleMap",
    "fn_range_closure",
    "fn_kernel",
    "FnAdjointOutcome",
    "fn_try_adjoint",
    "FnModularity",
    "fn_solve_modularity",
    "fn_modulus",
    "fn_is_positive",
    "fn_is_invertible",
    "PointwiseMap",
    "build_fn_va",
    "isometry_defect",
    "partial_isometry_defect",
    "fn_is_isometry_exact",
    "FnPolarReport",
    "fn_polar_decompose",
    "PositiveFacts",
    "fn_positive_facts",
]
