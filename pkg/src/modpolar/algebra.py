"""Finite-dimensional C*-algebras realized as direct sums of matrix blocks.

An algebra ``B = M_{n_1} (+) ... (+) M_{n_K}`` is described by an
:class:`AlgebraSpec`; its elements are :class:`AlgebraElement` instances that
hold one square complex block per summand.  Everything here is immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-9


class Tolerance(float):
    """A non-negative relative tolerance.

    Behaves exactly like a float; construction only validates the value.
    """

    def __new__(cls, eps: float = DEFAULT_TOL) -> "Tolerance":
        eps = float(eps)
        if not eps >= 0.0:
            raise ValueError(f"tolerance must be non-negative, got {eps!r}")
        return super().__new__(cls, eps)


class NotPositive(ValueError):
    """Raised when a square root is requested of a non-positive element."""


@dataclass(frozen=True)
class AlgebraSpec:
    """Block structure ``(n_1, ..., n_K)`` of ``B = (+)_k M_{n_k}(C)``."""

    block_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.block_dims)
        if not dims:
            raise ValueError("an algebra needs at least one block")
        if any(n < 1 for n in dims):
            raise ValueError(f"block dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def dim(self) -> int:
        """Complex dimension of B."""
        return sum(n * n for n in self.block_dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for n in self.block_dims:
            out.append(acc)
            acc += n * n
        return tuple(out)

    def element(self, blocks: Sequence) -> "AlgebraElement":
        return AlgebraElement(self, blocks)

    def identity(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.eye(n) for n in self.block_dims])

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.zeros((n, n)) for n in self.block_dims])

    def scalar(self, c: complex) -> "AlgebraElement":
        return AlgebraElement(self, [c * np.eye(n) for n in self.block_dims])

    def matrix_units(self) -> list["AlgebraElement"]:
        """The linear basis ``e^{(k)}_{ij}`` of B, ordered like :meth:`AlgebraElement.to_vector`."""
        units = []
        for k, n in enumerate(self.block_dims):
            for i in range(n):
                for j in range(n):
                    blocks = [np.zeros((m, m)) for m in self.block_dims]
                    blocks[k][i, j] = 1.0
                    units.append(AlgebraElement(self, blocks))
        return units

    def from_vector(self, vec: np.ndarray) -> "AlgebraElement":
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {vec.shape}")
        blocks = [
            vec[off : off + n * n].reshape(n, n)
            for off, n in zip(self.offsets, self.block_dims)
        ]
        return AlgebraElement(self, blocks)

    def random(self, rng: np.random.Generator) -> "AlgebraElement":
        return AlgebraElement(
            self,
            [
                rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                for n in self.block_dims
            ],
        )

    def __str__(self) -> str:
        return " (+) ".join("C" if n == 1 else f"M_{n}" for n in self.block_dims)


class AlgebraElement:
    """An element of a block-diagonal matrix algebra."""

    __slots__ = ("spec", "blocks")

    def __init__(self, spec: AlgebraSpec, blocks: Sequence) -> None:
        if len(blocks) != len(spec.block_dims):
            raise ValueError(
                f"expected {len(spec.block_dims)} blocks for {spec}, got {len(blocks)}"
            )
        frozen = []
        for n, blk in zip(spec.block_dims, blocks):
            arr = np.array(blk, dtype=complex).reshape(np.shape(blk))
            if arr.shape == () and n == 1:
                arr = arr.reshape(1, 1)
            if arr.shape != (n, n):
                raise ValueError(f"block of shape {arr.shape} does not fit M_{n}")
            arr.flags.writeable = False
            frozen.append(arr)
        self.spec = spec
        self.blocks = tuple(frozen)

    def _check(self, other: "AlgebraElement") -> None:
        if other.spec != self.spec:
            raise ValueError(f"algebra mismatch: {self.spec} vs {other.spec}")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.spec, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.spec, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.spec, [-a for a in self.blocks])

    def __mul__(self, other) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            self._check(other)
            return AlgebraElement(self.spec, [a @ b for a, b in zip(self.blocks, other.blocks)])
        return AlgebraElement(self.spec, [a * other for a in self.blocks])

    def __rmul__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.spec, [other * a for a in self.blocks])

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.spec, [a.conj().T for a in self.blocks])

    def norm(self) -> float:
        """C*-norm: the largest spectral norm over the blocks."""
        return max(float(np.linalg.norm(a, 2)) for a in self.blocks)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([a.reshape(-1) for a in self.blocks])

    def dense(self) -> np.ndarray:
        """The element as one block-diagonal matrix."""
        size = sum(self.spec.block_dims)
        out = np.zeros((size, size), dtype=complex)
        pos = 0
        for a in self.blocks:
            n = a.shape[0]
            out[pos : pos + n, pos : pos + n] = a
            pos += n
        return out

    def allclose(self, other: "AlgebraElement", tol: float = DEFAULT_TOL) -> bool:
        self._check(other)
        scale = max(self.norm(), other.norm())
        return (self - other).norm() <= tol * scale

    def __repr__(self) -> str:
        body = ", ".join(np.array2string(a, precision=4) for a in self.blocks)
        return f"AlgebraElement({self.spec}, [{body}])"


def adjoint(x: AlgebraElement) -> AlgebraElement:
    return x.adjoint()


def norm(x: AlgebraElement) -> float:
    return x.norm()


def _is_psd_matrix(a: np.ndarray, tol: float, scale: float) -> bool:
    if np.linalg.norm(a - a.conj().T, 2) > tol * scale:
        return False
    if a.size == 0:
        return True
    return bool(np.linalg.eigvalsh((a + a.conj().T) / 2)[0] >= -tol * scale)


def is_positive(x: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    """Hermitian within ``tol`` and no eigenvalue below ``-tol * norm(x)``."""
    scale = x.norm()
    return all(_is_psd_matrix(a, tol, scale) for a in x.blocks)


def psd_sqrt(a: np.ndarray, tol: float = DEFAULT_TOL, scale: float | None = None) -> np.ndarray:
    """Positive square root of a Hermitian positive semidefinite matrix.

    Eigenvalues with ``|lambda| <= tol * scale`` are set to zero before taking
    roots; ``scale`` defaults to the spectral norm of ``a``.  Raises
    :class:`NotPositive` for eigenvalues below ``-tol * scale``.
    """
    if a.size == 0:
        return np.zeros_like(a, dtype=complex)
    h = (a + a.conj().T) / 2
    w, q = np.linalg.eigh(h)
    if scale is None:
        scale = float(np.max(np.abs(w)))
    if w[0] < -tol * scale:
        raise NotPositive(f"eigenvalue {w[0]:.3e} below -tol*norm = {-tol * scale:.3e}")
    w = np.where(w <= tol * scale, 0.0, w)
    return (q * np.sqrt(w)) @ q.conj().T


def sqrt_positive(x: AlgebraElement, tol: float = DEFAULT_TOL) -> AlgebraElement:
    """The positive square root, computed blockwise by eigendecomposition."""
    scale = x.norm()
    if not is_positive(x, tol):
        raise NotPositive(f"{x!r} is not positive within tol={tol}")
    return AlgebraElement(x.spec, [psd_sqrt(a, tol, scale) for a in x.blocks])


def is_invertible(x: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    scale = x.norm()
    if scale == 0.0:
        return False
    smallest = min(float(np.linalg.svd(a, compute_uv=False)[-1]) for a in x.blocks)
    return smallest > tol * scale


def c_star_defect(x: AlgebraElement) -> float:
    """``| norm(x* x) - norm(x)^2 |``; zero for a genuine C*-norm."""
    return abs((x.adjoint() * x).norm() - x.norm() ** 2)


def parse_block_dims(text: str) -> AlgebraSpec:
    """Parse ``"1,2"`` or ``"C+M2"`` style block descriptions."""
    parts = [p.strip() for p in text.replace("+", ",").split(",") if p.strip()]
    dims = []
    for p in parts:
        if p.upper() == "C":
            dims.append(1)
        elif p.upper().startswith("M"):
            dims.append(int(p[1:].lstrip("_")))
        else:
            dims.append(int(p))
    return AlgebraSpec(tuple(dims))


__all__ = [
    "DEFAULT_TOL",
    "Tolerance",
    "NotPositive",
    "AlgebraSpec",
    "AlgebraElement",
    "adjoint",
    "norm",
    "is_positive",
    "psd_sqrt",
    "sqrt_positive",
    "is_invertible",
    "c_star_defect",
    "parse_block_dims",
]
