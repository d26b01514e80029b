"""Seeded random B-linear operators with controlled spectra.

A B-linear map ``B^n -> B^m`` is a tuple of ordinary matrices ``T_k`` of shape
``(m n_k, n n_k)``, one per summand of B.  Operators are drawn as
``U_k S_k V_k^*`` with Haar-random unitaries and singular values either zero
or in ``[0.3, 2]``, so numerical ranks are unambiguous at the default
tolerance.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .module import FreeModule, Submodule, closure_of_span
from .operators import ModuleMap, as_submodule, block_operator_matrix

SPECTRUM = (0.3, 2.0)


def _unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(n, random_state=rng)


def _singular_values(rng: np.random.Generator, k: int, kernel_prob: float) -> np.ndarray:
    s = rng.uniform(*SPECTRUM, size=k)
    s[rng.random(k) < kernel_prob] = 0.0
    return s


def random_blocks(
    rng: np.random.Generator,
    dom: FreeModule,
    cod: FreeModule,
    kernel_prob: float = 0.25,
    spectrum: tuple[float, float] | None = None,
    full_rank: bool = False,
) -> list[np.ndarray]:
    blocks = []
    for nk in dom.algebra.block_dims:
        rows, cols = cod.rank * nk, dom.rank * nk
        k = min(rows, cols)
        if spectrum is None:
            s = _singular_values(rng, k, 0.0 if full_rank else kernel_prob)
        else:
            s = rng.uniform(*spectrum, size=k)
        sigma = np.zeros((rows, cols))
        sigma[:k, :k] = np.diag(s)
        blocks.append(_unitary(rng, rows) @ sigma @ _unitary(rng, cols).conj().T)
    return blocks


def random_operator(
    rng: np.random.Generator,
    dom: FreeModule,
    cod: FreeModule | None = None,
    kernel_prob: float = 0.25,
    full_rank: bool = False,
) -> ModuleMap:
    """A random B-linear map ``dom -> cod`` (``cod`` defaults to ``dom``)."""
    cod = dom if cod is None else cod
    blocks = random_blocks(rng, dom, cod, kernel_prob=kernel_prob, full_rank=full_rank)
    return ModuleMap.from_ambient(dom, cod, block_operator_matrix(blocks, dom, cod))


def random_unitary(rng: np.random.Generator, module: FreeModule) -> ModuleMap:
    blocks = [_unitary(rng, module.rank * nk) for nk in module.algebra.block_dims]
    return ModuleMap.from_ambient(module, module, block_operator_matrix(blocks, module, module))


def random_isometry(rng: np.random.Generator, dom: FreeModule, cod: FreeModule) -> ModuleMap:
    """An isometry ``B^n -> B^m`` (requires ``m >= n``)."""
    if cod.rank < dom.rank:
        raise ValueError("an isometry B^n -> B^m needs m >= n")
    blocks = []
    for nk in dom.algebra.block_dims:
        u = _unitary(rng, cod.rank * nk)
        blocks.append(u[:, : dom.rank * nk])
    return ModuleMap.from_ambient(dom, cod, block_operator_matrix(blocks, dom, cod))


def random_submodule(rng: np.random.Generator, module: FreeModule, ngens: int | None = None) -> Submodule:
    """Submodule generated by a few random vectors, some of them degenerate."""
    if ngens is None:
        ngens = int(rng.integers(0, module.rank + 1))
    gens = []
    for _ in range(ngens):
        # a random projection on the right keeps the generated submodule proper
        x = module.random_vector(rng)
        p = random_projection_element(rng, module.algebra)
        gens.append((x * p).to_array())
    if not gens:
        return module.zero()
    return closure_of_span(module, np.stack(gens, axis=1))


def random_projection_element(rng: np.random.Generator, algebra):
    blocks = []
    for n in algebra.block_dims:
        r = int(rng.integers(0, n + 1))
        u = _unitary(rng, n)
        blocks.append(u[:, :r] @ u[:, :r].conj().T)
    return algebra.element(blocks)


def random_orthogonal_projection(rng: np.random.Generator, module: FreeModule) -> ModuleMap:
    return ModuleMap.projection(module, random_submodule(rng, module))


def random_idempotent(rng: np.random.Generator, module: FreeModule) -> ModuleMap:
    """A non-Hermitian B-linear idempotent ``S P S^{-1}`` (``0 < rank P < dim``)."""
    blocks = []
    for nk in module.algebra.block_dims:
        size = module.rank * nk
        s = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        r = int(rng.integers(1, size)) if size > 1 else 1
        d = np.diag([1.0] * r + [0.0] * (size - r))
        blocks.append(s @ d @ np.linalg.inv(s))
    return ModuleMap.from_ambient(module, module, block_operator_matrix(blocks, module, module))


def random_partial_isometry(
    rng: np.random.Generator, dom: FreeModule, cod: FreeModule | None = None
) -> ModuleMap:
    """Projection onto a random submodule followed by an isometry into ``cod``."""
    cod = dom if cod is None else cod
    if cod.rank < dom.rank:
        raise ValueError("needs cod.rank >= dom.rank")
    p = ModuleMap.projection(dom, random_submodule(rng, dom))
    w = random_isometry(rng, dom, cod)
    return w @ p


def restrict_to_random_domain(rng: np.random.Generator, m: ModuleMap) -> ModuleMap:
    sub = random_submodule(rng, m.domain.ambient, m.domain.ambient.rank)
    if sub.is_zero:
        return m
    return ModuleMap(sub, m.codomain, m.matrix @ (as_submodule(m.domain).basis.conj().T @ sub.basis), check=False)


__all__ = [
    "random_blocks",
    "random_operator",
    "random_unitary",
    "random_isometry",
    "random_submodule",
    "random_projection_element",
    "random_orthogonal_projection",
    "random_idempotent",
    "random_partial_isometry",
    "restrict_to_random_domain",
]
