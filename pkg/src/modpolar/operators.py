"""Bounded B-linear maps between (sub)modules and adjoint-free predicates.

A :class:`ModuleMap` stores a complex matrix in the orthonormal coordinates of
its domain and codomain submodules.  Because those coordinates are orthonormal
for the trace pairing, the operator norm of that matrix is the C*-norm of the
map, and a B-linear map is positive exactly when its matrix is positive
semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .algebra import DEFAULT_TOL, AlgebraElement
from .module import (
    FreeModule,
    ModuleMismatch,
    ModuleVector,
    Submodule,
    _null,
    _orth,
    orthocomplement,
    submodule_equal,
)

Space = Union[FreeModule, Submodule]


class ImageNotContained(ValueError):
    """The image of a map does not lie in the requested corestriction target."""


class NotPartialIsometry(ValueError):
    pass


class NotBLinear(ValueError):
    """The matrix does not commute with the right action of B."""


def as_submodule(space: Space) -> Submodule:
    return space.full() if isinstance(space, FreeModule) else space


def _same_space(s: Submodule, t: Submodule, tol: float) -> bool:
    if s is t:
        return True
    if s.ambient != t.ambient or s.dim != t.dim:
        return False
    if s.basis.shape == t.basis.shape and np.array_equal(s.basis, t.basis):
        return True
    return submodule_equal(s, t, tol)


def b_linearity_defect(domain: Submodule, codomain: Submodule, matrix: np.ndarray) -> float:
    """``max_u |M R_dom(u) - R_cod(u) M|_F`` over the matrix units ``u``."""
    if matrix.size == 0:
        return 0.0
    return max(
        float(np.linalg.norm(matrix @ rd - rc @ matrix))
        for rd, rc in zip(domain.unit_actions, codomain.unit_actions)
    )


class ModuleMap:
    """A B-linear map ``domain -> codomain``.

    ``matrix`` has shape ``(codomain.dim, domain.dim)`` in submodule
    coordinates.  B-linearity is verified unless ``check=False``, which is
    reserved for deliberately building non-B-linear maps in negative tests.
    """

    def __init__(
        self,
        domain: Space,
        codomain: Space,
        matrix: np.ndarray,
        check: bool = True,
        tol: float = DEFAULT_TOL,
    ) -> None:
        domain, codomain = as_submodule(domain), as_submodule(codomain)
        if domain.ambient.algebra != codomain.ambient.algebra:
            raise ModuleMismatch("maps between modules over different algebras are not supported")
        matrix = np.array(matrix, dtype=complex).reshape(codomain.dim, domain.dim)
        matrix.flags.writeable = False
        if check:
            defect = b_linearity_defect(domain, codomain, matrix)
            if defect > tol * max(float(np.linalg.norm(matrix)), 1.0):
                raise NotBLinear(f"matrix is not B-linear (defect {defect:.3e})")
        self.domain = domain
        self.codomain = codomain
        self.matrix = matrix

    # construction helpers

    @classmethod
    def from_ambient(
        cls,
        domain: Space,
        codomain: Space,
        ambient_matrix: np.ndarray,
        check: bool = True,
        tol: float = DEFAULT_TOL,
    ) -> "ModuleMap":
        """Restrict an ambient coordinate matrix to ``domain`` and corestrict it to ``codomain``."""
        domain, codomain = as_submodule(domain), as_submodule(codomain)
        image = np.asarray(ambient_matrix, dtype=complex) @ domain.basis
        if check and not codomain.contains_array(image, tol):
            raise ImageNotContained("image of the domain leaves the codomain")
        return cls(domain, codomain, codomain.basis.conj().T @ image, check=check, tol=tol)

    @classmethod
    def left_multiplication(
        cls,
        entries: Sequence[Sequence[AlgebraElement]],
        domain: Space,
        codomain: Space,
        tol: float = DEFAULT_TOL,
    ) -> "ModuleMap":
        """The map ``x -> T x`` for an ``m x n`` matrix ``T`` over B.

        Every B-linear map ``B^n -> B^m`` has this form.  ``domain`` and
        ``codomain`` may be submodules of ``B^n`` and ``B^m``.
        """
        dom, cod = as_submodule(domain), as_submodule(codomain)
        return cls.from_ambient(dom, cod, left_multiplication_matrix(entries, dom.ambient, cod.ambient), tol=tol)

    @classmethod
    def identity(cls, space: Space) -> "ModuleMap":
        s = as_submodule(space)
        return cls(s, s, np.eye(s.dim), check=False)

    @classmethod
    def zero(cls, domain: Space, codomain: Space) -> "ModuleMap":
        d, c = as_submodule(domain), as_submodule(codomain)
        return cls(d, c, np.zeros((c.dim, d.dim)), check=False)

    @classmethod
    def inclusion(cls, sub: Space, sup: Space, tol: float = DEFAULT_TOL) -> "ModuleMap":
        return cls.from_ambient(sub, sup, np.eye(as_submodule(sup).ambient.dim), tol=tol)

    @classmethod
    def projection(cls, space: Space, onto: Submodule, tol: float = DEFAULT_TOL) -> "ModuleMap":
        """Orthogonal projection of ``space`` onto ``onto`` (as a map ``space -> space``)."""
        s = as_submodule(space)
        return cls.from_ambient(s, s, onto.projector, tol=tol)

    # access

    def ambient_matrix(self) -> np.ndarray:
        """The map as an operator on ambient coordinates (zero off the domain)."""
        return self.codomain.basis @ self.matrix @ self.domain.basis.conj().T

    def image_array(self) -> np.ndarray:
        """Ambient coordinates of the images of the domain basis."""
        return self.codomain.basis @ self.matrix

    def apply(self, x: ModuleVector, tol: float = DEFAULT_TOL) -> ModuleVector:
        if x.module != self.domain.ambient:
            raise ModuleMismatch(f"{x.module} vs {self.domain.ambient}")
        arr = x.to_array()
        coords = self.domain.basis.conj().T @ arr
        if np.linalg.norm(self.domain.basis @ coords - arr) > tol * max(np.linalg.norm(arr), 1e-300):
            raise ModuleMismatch("vector is not in the domain submodule")
        return ModuleVector.from_array(self.codomain.ambient, self.codomain.basis @ (self.matrix @ coords))

    def __call__(self, x: ModuleVector) -> ModuleVector:
        return self.apply(x)

    def norm(self) -> float:
        # maps are immutable, so the spectral norm is computed once
        cached = self.__dict__.get("_norm")
        if cached is None:
            cached = float(np.linalg.norm(self.matrix, 2)) if self.matrix.size else 0.0
            self.__dict__["_norm"] = cached
        return cached

    def __matmul__(self, other: "ModuleMap") -> "ModuleMap":
        return compose(self, other)

    def __add__(self, other: "ModuleMap") -> "ModuleMap":
        m = _coords_of(other, self.domain, self.codomain)
        return ModuleMap(self.domain, self.codomain, self.matrix + m, check=False)

    def __sub__(self, other: "ModuleMap") -> "ModuleMap":
        m = _coords_of(other, self.domain, self.codomain)
        return ModuleMap(self.domain, self.codomain, self.matrix - m, check=False)

    def __mul__(self, c: complex) -> "ModuleMap":
        return ModuleMap(self.domain, self.codomain, c * self.matrix, check=False)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"ModuleMap({self.domain.dim} -> {self.codomain.dim}, norm={self.norm():.4g})"


def left_multiplication_matrix(
    entries: Sequence[Sequence[AlgebraElement]], dom: FreeModule, cod: FreeModule
) -> np.ndarray:
    """Ambient coordinate matrix of ``x -> T x`` for ``T`` in ``M_{m,n}(B)``."""
    alg = dom.algebra
    m, n = cod.rank, dom.rank
    if len(entries) != m or any(len(row) != n for row in entries):
        raise ModuleMismatch(f"expected a {m} x {n} matrix over B")
    d = alg.dim
    out = np.zeros((m * d, n * d), dtype=complex)
    for i, row in enumerate(entries):
        for j, t in enumerate(row):
            if t.spec != alg:
                raise ModuleMismatch(f"entry over {t.spec} in a map over {alg}")
            for off, k, blk in zip(alg.offsets, alg.block_dims, t.blocks):
                # vec_r(T X) = (T kron I) vec_r(X)
                out[i * d + off : i * d + off + k * k, j * d + off : j * d + off + k * k] = np.kron(
                    blk, np.eye(k)
                )
    return out


def block_operator_matrix(blocks: Sequence[np.ndarray], dom: FreeModule, cod: FreeModule) -> np.ndarray:
    """Ambient matrix from per-summand operators.

    ``B^n -> B^m`` B-linear maps correspond to tuples ``(T_k)`` with ``T_k`` of
    shape ``(m n_k, n n_k)``, row index ``(i, r)`` and column index ``(j, s)``.
    """
    alg = dom.algebra
    m, n = cod.rank, dom.rank
    entries = []
    for i in range(m):
        row = []
        for j in range(n):
            row.append(
                alg.element(
                    [
                        np.asarray(tk)[i * k : (i + 1) * k, j * k : (j + 1) * k]
                        for tk, k in zip(blocks, alg.block_dims)
                    ]
                )
            )
        entries.append(row)
    return left_multiplication_matrix(entries, dom, cod)


def _coords_of(m: ModuleMap, domain: Submodule, codomain: Submodule) -> np.ndarray:
    """Matrix of ``m`` re-expressed in the bases of ``domain`` and ``codomain``."""
    if not (_same_space(m.domain, domain, DEFAULT_TOL) and _same_space(m.codomain, codomain, DEFAULT_TOL)):
        raise ModuleMismatch("maps have different domains or codomains")
    return codomain.basis.conj().T @ m.codomain.basis @ m.matrix @ m.domain.basis.conj().T @ domain.basis


def compose(outer: ModuleMap, inner: ModuleMap, tol: float = DEFAULT_TOL) -> ModuleMap:
    """``outer o inner``."""
    if not _same_space(inner.codomain, outer.domain, tol):
        raise ModuleMismatch(
            f"cannot compose: codomain {inner.codomain!r} is not domain {outer.domain!r}"
        )
    change = outer.domain.basis.conj().T @ inner.codomain.basis
    return ModuleMap(inner.domain, outer.codomain, outer.matrix @ change @ inner.matrix, check=False)


def restrict(m: ModuleMap, sub: Submodule, tol: float = DEFAULT_TOL) -> ModuleMap:
    """``m`` restricted to a submodule of its domain."""
    if sub.ambient != m.domain.ambient:
        raise ModuleMismatch(f"{sub.ambient} vs {m.domain.ambient}")
    inside = m.domain.basis.conj().T @ sub.basis
    if sub.dim and np.linalg.norm(m.domain.basis @ inside - sub.basis) > tol * np.sqrt(sub.dim):
        raise ModuleMismatch("restriction target is not inside the domain")
    return ModuleMap(sub, m.codomain, m.matrix @ inside, check=False)


def corestrict(m: ModuleMap, target: Submodule, tol: float = DEFAULT_TOL) -> ModuleMap:
    """``m`` viewed as a map into ``target``; the image must lie in ``target``."""
    if target.ambient != m.codomain.ambient:
        raise ModuleMismatch(f"{target.ambient} vs {m.codomain.ambient}")
    image = m.image_array()
    if not target.contains_array(image, tol):
        raise ImageNotContained("image is not contained in the corestriction target")
    return ModuleMap(m.domain, target, target.basis.conj().T @ image, check=False)


def kernel(m: ModuleMap, tol: float = DEFAULT_TOL) -> Submodule:
    """Null space of ``m`` as a submodule of the domain's ambient module."""
    coeffs = _null(m.matrix, tol)
    return Submodule(m.domain.ambient, m.domain.basis @ coeffs, check=False)


def range_closure(m: ModuleMap, tol: float = DEFAULT_TOL) -> Submodule:
    """Closed submodule generated by the image of a spanning set of the domain.

    The image of an invariant domain under a B-linear map is invariant, so an
    orthonormal basis of the image columns already spans a submodule.
    """
    return Submodule(m.codomain.ambient, _orth(m.image_array(), tol), check=False)


@dataclass(frozen=True)
class AdjointOutcome:
    """Result of :func:`try_adjoint`: the adjoint, or a witness of its absence."""

    adjoint: ModuleMap | None
    residual: float
    witness: tuple[int, int] | None = None

    @property
    def ok(self) -> bool:
        return self.adjoint is not None

    def __bool__(self) -> bool:
        return self.ok


def _worst_pair(err: np.ndarray) -> tuple[int, int]:
    """Index pair maximizing the B-valued error tensor ``err[i, j, :]``."""
    mag = np.linalg.norm(err, axis=2)
    i, j = np.unravel_index(int(np.argmax(mag)), mag.shape)
    return int(i), int(j)


def try_adjoint(m: ModuleMap, tol: float = DEFAULT_TOL) -> AdjointOutcome:
    """Solve ``<m x_i, y_j> = <x_i, A y_j>`` for a map ``A: codomain -> domain``.

    The B-valued equations for each column of ``A`` share one coefficient
    tensor, which is injective on the domain, so the solution is unique when it
    exists.  A residual above ``tol`` (relative) yields a refusal carrying the
    worst basis pair ``(i, j)``.
    """
    dom, cod = m.domain, m.codomain
    mod_d, mod_c = dom.ambient, cod.ambient
    g_dom = mod_d.gram(dom.basis, dom.basis)  # (d, d, D)
    rhs = mod_c.gram(m.image_array(), cod.basis)  # (d, c, D)
    d, c = dom.dim, cod.dim
    if d == 0 or c == 0:
        return AdjointOutcome(ModuleMap(cod, dom, np.zeros((d, c)), check=False), 0.0)
    D = g_dom.shape[2]
    # sum_l G[i, l, :] A[l, j] = rhs[i, j, :]
    lhs = g_dom.transpose(0, 2, 1).reshape(d * D, d)
    rhs_mat = rhs.transpose(0, 2, 1).reshape(d * D, c)
    sol, *_ = np.linalg.lstsq(lhs, rhs_mat, rcond=None)
    err = (lhs @ sol - rhs_mat).reshape(d, D, c).transpose(0, 2, 1)
    scale = float(np.linalg.norm(rhs_mat))
    residual = float(np.linalg.norm(err)) / scale if scale > 0 else float(np.linalg.norm(err))
    if residual > tol:
        return AdjointOutcome(None, residual, _worst_pair(err))
    adj = ModuleMap(cod, dom, sol, check=False)
    if b_linearity_defect(cod, dom, sol) > tol * max(float(np.linalg.norm(sol)), 1.0):
        return AdjointOutcome(None, residual, _worst_pair(err))
    return AdjointOutcome(adj, residual)


def gram_defect(m: ModuleMap) -> float:
    """``max_{i,j} |<m x_i, m x_j> - <x_i, x_j>|`` over the domain basis."""
    dom = m.domain
    if dom.dim == 0:
        return 0.0
    img = m.image_array()
    lhs = m.codomain.ambient.gram(img, img)
    rhs = dom.ambient.gram(dom.basis, dom.basis)
    return float(np.max(np.abs(lhs - rhs)))


def is_isometry(m: ModuleMap, tol: float = DEFAULT_TOL) -> bool:
    """Inner products of basis pairs are preserved within ``tol``."""
    return gram_defect(m) <= tol


def is_contractive(m: ModuleMap, tol: float = DEFAULT_TOL) -> bool:
    return m.norm() <= 1.0 + tol


def is_coisometry(m: ModuleMap, tol: float = DEFAULT_TOL) -> bool:
    """Contractive, onto the codomain, and isometric on ``(ker m)^perp``."""
    if not is_contractive(m, tol):
        return False
    if range_closure(m, tol).dim != m.codomain.dim:
        return False
    support = orthocomplement(kernel(m, tol), within=m.domain, tol=tol)
    return is_isometry(restrict(m, support, tol), tol)


def is_partial_isometry(m: ModuleMap, tol: float = DEFAULT_TOL) -> bool:
    """The corestriction to the range closure is a coisometry."""
    if not is_contractive(m, tol):
        return False
    return is_coisometry(corestrict(m, range_closure(m, tol), tol), tol)


def initial_projection(m: ModuleMap, tol: float = DEFAULT_TOL) -> ModuleMap:
    """Projection of the domain onto ``(ker m)^perp``."""
    if not is_partial_isometry(m, tol):
        raise NotPartialIsometry(f"{m!r} is not a partial isometry")
    support = orthocomplement(kernel(m, tol), within=m.domain, tol=tol)
    return ModuleMap.projection(m.domain, support, tol)


def is_projection_gram(p: ModuleMap, tol: float = DEFAULT_TOL) -> bool:
    """``<x_i, p x_j> = <p x_i, p x_j>`` on all basis pairs.

    No linearity, self-adjointness or idempotency is presupposed; both follow
    from the identity (see :func:`projection_defects`).
    """
    if not _same_space(p.domain, p.codomain, tol):
        raise ModuleMismatch("a projection needs domain = codomain")
    dom = p.domain
    if dom.dim == 0:
        return True
    img = p.image_array()
    lhs = dom.ambient.gram(dom.basis, img)
    rhs = dom.ambient.gram(img, img)
    return float(np.max(np.abs(lhs - rhs))) <= tol


def projection_defects(p: ModuleMap) -> tuple[float, float]:
    """``(|p - p*|, |p^2 - p|)`` in operator norm."""
    a = _coords_of(p, p.domain, p.domain)
    if a.size == 0:
        return 0.0, 0.0
    return float(np.linalg.norm(a - a.conj().T, 2)), float(np.linalg.norm(a @ a - a, 2))


__all__ = [
    "ImageNotContained",
    "NotPartialIsometry",
    "NotBLinear",
    "ModuleMap",
    "AdjointOutcome",
    "as_submodule",
    "left_multiplication_matrix",
    "block_operator_matrix",
    "b_linearity_defect",
    "compose",
    "restrict",
    "corestrict",
    "kernel",
    "range_closure",
    "try_adjoint",
    "gram_defect",
    "is_isometry",
    "is_contractive",
    "is_coisometry",
    "is_partial_isometry",
    "initial_projection",
    "is_projection_gram",
    "projection_defects",
]
