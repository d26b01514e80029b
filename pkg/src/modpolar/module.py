"""Free Hilbert B-modules ``B^n`` and their closed submodules.

Coordinates: a vector ``x = (x_1, ..., x_n)`` is stored as the concatenation
over ``i`` of :meth:`AlgebraElement.to_vector` of ``x_i`` (blocks flattened
row-major).  The complex inner product of these coordinate vectors is the
trace pairing ``tr <x, y>``, so orthonormal bases and orthogonal projections
are ordinary complex linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .algebra import DEFAULT_TOL, AlgebraElement, AlgebraSpec


class ModuleMismatch(ValueError):
    """Operands live in different modules."""


@dataclass(frozen=True)
class FreeModule:
    """The standard Hilbert module ``B^rank`` with ``<x, y> = sum_i x_i* y_i``."""

    algebra: AlgebraSpec
    rank: int

    def __post_init__(self) -> None:
        if int(self.rank) < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        object.__setattr__(self, "rank", int(self.rank))

    @property
    def dim(self) -> int:
        """Complex dimension of the underlying vector space."""
        return self.rank * self.algebra.dim

    def vector(self, entries: Sequence[AlgebraElement]) -> "ModuleVector":
        return ModuleVector(self, entries)

    def basis_vector(self, i: int) -> "ModuleVector":
        entries = [self.algebra.zero() for _ in range(self.rank)]
        entries[i] = self.algebra.identity()
        return ModuleVector(self, entries)

    def zero_vector(self) -> "ModuleVector":
        return ModuleVector(self, [self.algebra.zero() for _ in range(self.rank)])

    def random_vector(self, rng: np.random.Generator) -> "ModuleVector":
        return ModuleVector(self, [self.algebra.random(rng) for _ in range(self.rank)])

    @cached_property
    def unit_actions(self) -> tuple[np.ndarray, ...]:
        """Right multiplication by every matrix unit, as ``dim x dim`` matrices."""
        return tuple(self.right_action(u) for u in self.algebra.matrix_units())

    def right_action(self, u: AlgebraElement) -> np.ndarray:
        """Matrix of ``x -> x.u`` in coordinates."""
        if u.spec != self.algebra:
            raise ModuleMismatch(f"{u.spec} does not act on a module over {self.algebra}")
        d = self.algebra.dim
        single = np.zeros((d, d), dtype=complex)
        for off, n, blk in zip(self.algebra.offsets, self.algebra.block_dims, u.blocks):
            # vec_r(X U) = (I kron U^T) vec_r(X)
            single[off : off + n * n, off : off + n * n] = np.kron(np.eye(n), blk.T)
        return np.kron(np.eye(self.rank), single)

    def gram(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """B-valued Gram tensor ``G[a, b] = <x_a, y_b>`` of two coordinate batches.

        ``xs`` and ``ys`` have shape ``(dim, p)`` and ``(dim, q)``; the result has
        shape ``(p, q, B.dim)`` with the last axis in :meth:`AlgebraElement.to_vector`
        order.
        """
        xs = np.asarray(xs, dtype=complex).reshape(self.dim, -1)
        ys = np.asarray(ys, dtype=complex).reshape(self.dim, -1)
        p, q = xs.shape[1], ys.shape[1]
        d = self.algebra.dim
        xr = xs.reshape(self.rank, d, p)
        yr = ys.reshape(self.rank, d, q)
        parts = []
        for off, n in zip(self.algebra.offsets, self.algebra.block_dims):
            xb = xr[:, off : off + n * n, :].reshape(self.rank, n, n, p)
            yb = yr[:, off : off + n * n, :].reshape(self.rank, n, n, q)
            g = np.einsum("irca,irdb->abcd", xb.conj(), yb)
            parts.append(g.reshape(p, q, n * n))
        return np.concatenate(parts, axis=2)

    def full(self) -> "Submodule":
        return Submodule(self, np.eye(self.dim, dtype=complex), check=False)

    def zero(self) -> "Submodule":
        return Submodule(self, np.zeros((self.dim, 0), dtype=complex), check=False)

    def __str__(self) -> str:
        return f"({self.algebra})^{self.rank}"


class ModuleVector:
    """An element of a free module: ``rank`` algebra elements."""

    __slots__ = ("module", "entries")

    def __init__(self, module: FreeModule, entries: Sequence[AlgebraElement]) -> None:
        entries = tuple(entries)
        if len(entries) != module.rank:
            raise ModuleMismatch(f"expected {module.rank} entries, got {len(entries)}")
        for e in entries:
            if e.spec != module.algebra:
                raise ModuleMismatch(f"entry over {e.spec} in a module over {module.algebra}")
        self.module = module
        self.entries = entries

    @classmethod
    def from_array(cls, module: FreeModule, arr: np.ndarray) -> "ModuleVector":
        arr = np.asarray(arr, dtype=complex).reshape(module.rank, module.algebra.dim)
        return cls(module, [module.algebra.from_vector(row) for row in arr])

    def to_array(self) -> np.ndarray:
        return np.concatenate([e.to_vector() for e in self.entries])

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        _same_module(self, other)
        return ModuleVector(self.module, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        _same_module(self, other)
        return ModuleVector(self.module, [a - b for a, b in zip(self.entries, other.entries)])

    def __mul__(self, u) -> "ModuleVector":
        # right action by an algebra element, or complex scaling
        return ModuleVector(self.module, [e * u for e in self.entries])

    def __rmul__(self, c) -> "ModuleVector":
        return ModuleVector(self.module, [c * e for e in self.entries])

    def __repr__(self) -> str:
        return f"ModuleVector({self.module}, {list(self.entries)!r})"


def _same_module(x: ModuleVector, y: ModuleVector) -> None:
    if x.module != y.module:
        raise ModuleMismatch(f"{x.module} vs {y.module}")


def inner_product(x: ModuleVector, y: ModuleVector) -> AlgebraElement:
    """``<x, y> = sum_i x_i* y_i``."""
    _same_module(x, y)
    out = x.module.algebra.zero()
    for a, b in zip(x.entries, y.entries):
        out = out + a.adjoint() * b
    return out


def _orth(vectors: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of the column span, dropping singular values <= tol * max."""
    if vectors.shape[1] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    return u[:, s > tol * s[0]]


def _null(rows: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of the null space of ``rows`` (shape ``(p, n)``)."""
    n = rows.shape[1]
    if rows.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(rows, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(n, dtype=complex)
    rank = int(np.sum(s > tol * s[0]))
    return vh[rank:].conj().T


class Submodule:
    """A closed right submodule of a free module, held by an orthonormal basis.

    ``basis`` has shape ``(ambient.dim, d)``; its columns are orthonormal for the
    trace pairing and their span is invariant under the right action of B.
    """

    def __init__(
        self,
        ambient: FreeModule,
        basis: np.ndarray,
        check: bool = True,
        tol: float = DEFAULT_TOL,
    ) -> None:
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != ambient.dim:
            raise ModuleMismatch(
                f"basis of shape {basis.shape} does not live in {ambient} (dim {ambient.dim})"
            )
        basis = basis.copy()
        basis.flags.writeable = False
        self.ambient = ambient
        self.basis = basis
        if check:
            d = basis.shape[1]
            if np.linalg.norm(basis.conj().T @ basis - np.eye(d)) > max(tol, 1e-12) * max(d, 1):
                raise ValueError("submodule basis is not orthonormal")
            for r in ambient.unit_actions:
                moved = r @ basis
                if np.linalg.norm(moved - basis @ (basis.conj().T @ moved)) > tol * max(d, 1):
                    raise ValueError("span is not invariant under the right action")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_zero(self) -> bool:
        return self.dim == 0

    @cached_property
    def projector(self) -> np.ndarray:
        """Orthogonal projection of the ambient coordinates onto the span."""
        return self.basis @ self.basis.conj().T

    @cached_property
    def unit_actions(self) -> tuple[np.ndarray, ...]:
        """Right action of the matrix units in this submodule's coordinates."""
        q = self.basis
        return tuple(q.conj().T @ r @ q for r in self.ambient.unit_actions)

    def vectors(self) -> list[ModuleVector]:
        return [ModuleVector.from_array(self.ambient, c) for c in self.basis.T]

    def contains_array(self, xs: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        xs = np.asarray(xs, dtype=complex).reshape(self.ambient.dim, -1)
        scale = max(float(np.linalg.norm(xs)), 1e-300)
        resid = xs - self.basis @ (self.basis.conj().T @ xs)
        return float(np.linalg.norm(resid)) <= tol * scale

    def contains(self, x: ModuleVector, tol: float = DEFAULT_TOL) -> bool:
        if x.module != self.ambient:
            raise ModuleMismatch(f"{x.module} vs {self.ambient}")
        return self.contains_array(x.to_array(), tol)

    def __repr__(self) -> str:
        return f"Submodule(dim={self.dim} in {self.ambient})"


def closure_of_span(ambient: FreeModule, xs: np.ndarray, tol: float = DEFAULT_TOL) -> Submodule:
    """Submodule generated by the columns of ``xs`` (ambient coordinates)."""
    xs = np.asarray(xs, dtype=complex).reshape(ambient.dim, -1)
    if xs.shape[1] == 0:
        return ambient.zero()
    # x = sum_u x.e_uu, so right translates by the matrix units already span x.B
    moved = np.concatenate([r @ xs for r in ambient.unit_actions], axis=1)
    return Submodule(ambient, _orth(moved, tol), check=False)


def submodule_from_generators(
    gens: Iterable[ModuleVector],
    module: FreeModule | None = None,
    tol: float = DEFAULT_TOL,
) -> Submodule:
    """Smallest closed submodule containing ``gens``.

    ``module`` is needed only when ``gens`` is empty.
    """
    gens = list(gens)
    if not gens:
        if module is None:
            raise ValueError("an empty generator list needs an explicit module")
        return module.zero()
    ambient = gens[0].module
    for g in gens[1:]:
        _same_module(gens[0], g)
    if module is not None and module != ambient:
        raise ModuleMismatch(f"generators live in {ambient}, not {module}")
    return closure_of_span(ambient, np.stack([g.to_array() for g in gens], axis=1), tol)


def orthocomplement(
    s: Submodule, within: Submodule | None = None, tol: float = DEFAULT_TOL
) -> Submodule:
    """``{x in within : <x, y> = 0 for all y in s}``; ``within`` defaults to the ambient module.

    For right-invariant ``s`` this coincides with the complement for the trace
    pairing, which is what gets computed.
    """
    if within is None:
        within = s.ambient.full()
    if within.ambient != s.ambient:
        raise ModuleMismatch(f"{s.ambient} vs {within.ambient}")
    w = within.basis
    coeffs = _null(s.basis.conj().T @ w, tol)
    return Submodule(s.ambient, w @ coeffs, check=False)


def projection_distance(s: Submodule, t: Submodule) -> float:
    """Frobenius distance of the orthogonal projections onto ``s`` and ``t``."""
    if s.ambient != t.ambient:
        raise ModuleMismatch(f"{s.ambient} vs {t.ambient}")
    return float(np.linalg.norm(s.projector - t.projector))


def submodule_equal(s: Submodule, t: Submodule, tol: float = DEFAULT_TOL) -> bool:
    return projection_distance(s, t) <= tol


def submodule_contains(big: Submodule, small: Submodule, tol: float = DEFAULT_TOL) -> bool:
    """``small`` is contained in ``big``: ``|(1 - P_big) Q_small|_F <= tol``."""
    if big.ambient != small.ambient:
        raise ModuleMismatch(f"{big.ambient} vs {small.ambient}")
    resid = small.basis - big.basis @ (big.basis.conj().T @ small.basis)
    return float(np.linalg.norm(resid)) <= tol


def is_complemented(s: Submodule, tol: float = DEFAULT_TOL) -> bool:
    """``s + s^perp`` is the whole ambient module.

    Finite-dimensional modules are always complemented; this recomputes the
    complement and checks that the two bases together form a unitary.
    """
    comp = orthocomplement(s, tol=tol)
    joint = np.concatenate([s.basis, comp.basis], axis=1)
    n = s.ambient.dim
    if joint.shape[1] != n:
        return False
    return float(np.linalg.norm(joint.conj().T @ joint - np.eye(n))) <= tol * n


__all__ = [
    "ModuleMismatch",
    "FreeModule",
    "ModuleVector",
    "Submodule",
    "inner_product",
    "closure_of_span",
    "submodule_from_generators",
    "orthocomplement",
    "projection_distance",
    "submodule_equal",
    "submodule_contains",
    "is_complemented",
]
