import numpy as np
import pytest
from hypothesis import given, settings

from modpolar.algebra import AlgebraSpec, is_positive
from modpolar.module import (
    FreeModule,
    ModuleMismatch,
    Submodule,
    closure_of_span,
    inner_product,
    is_complemented,
    orthocomplement,
    projection_distance,
    submodule_contains,
    submodule_equal,
    submodule_from_generators,
)
from modpolar.sampling import random_projection_element, random_submodule

from conftest import algebras, seeds

C = AlgebraSpec((1,))
M2 = AlgebraSpec((2,))


def test_dimensions():
    E = FreeModule(AlgebraSpec((1, 2)), 3)
    assert E.dim == 15
    with pytest.raises(ValueError):
        FreeModule(C, 0)


def test_basis_orthogonality():
    E = FreeModule(M2, 2)
    g = inner_product(E.basis_vector(0), E.basis_vector(1))
    assert g.allclose(M2.zero(), 0.0)


def test_rank_one_pairing(rng):
    E = FreeModule(M2, 1)
    u, w = M2.random(rng), M2.random(rng)
    g = inner_product(E.basis_vector(0) * u, E.basis_vector(0) * w)
    assert g.allclose(u.adjoint() * w, 1e-12)


def test_mismatched_modules():
    with pytest.raises(ModuleMismatch):
        inner_product(FreeModule(C, 2).basis_vector(0), FreeModule(C, 3).basis_vector(0))


def test_generated_submodule_examples():
    E = FreeModule(C, 2)
    s = submodule_from_generators([E.basis_vector(0)])
    assert s.dim == 1 and s.contains(E.basis_vector(0))
    assert submodule_from_generators([], module=E).is_zero
    with pytest.raises(ValueError):
        submodule_from_generators([])


def test_generated_by_projection_times_unit():
    # e_1 . p for a rank-one projection p in M_2: the submodule is e_1 (p M_2), of dimension 2
    E = FreeModule(M2, 2)
    p = M2.element([[[1, 0], [0, 0]]])
    s = submodule_from_generators([E.basis_vector(0) * p])
    assert s.dim == 2
    q = M2.element([np.ones((2, 2)) / 2])
    assert submodule_from_generators([E.basis_vector(1) * q]).dim == 2


def test_orthocomplement_examples():
    E = FreeModule(C, 2)
    s = submodule_from_generators([E.basis_vector(0)])
    t = submodule_from_generators([E.basis_vector(1)])
    assert submodule_equal(orthocomplement(s), t)
    assert submodule_equal(orthocomplement(E.zero()), E.full())


def test_equality_examples(rng):
    E = FreeModule(C, 3)
    s = submodule_from_generators([E.basis_vector(0)])
    t = submodule_from_generators([E.basis_vector(1)])
    assert submodule_equal(s, s)
    assert not submodule_equal(s, t)
    basis = np.stack([E.basis_vector(0).to_array(), E.basis_vector(1).to_array()], axis=1)
    mix = basis @ (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    assert submodule_equal(closure_of_span(E, basis), closure_of_span(E, mix))
    with pytest.raises(ModuleMismatch):
        submodule_equal(s, FreeModule(C, 2).full())


def test_invariance_is_checked():
    E = FreeModule(M2, 1)
    # a single vector is not closed under the right action of M_2
    with pytest.raises(ValueError):
        Submodule(E, E.basis_vector(0).to_array()[:, None])


@settings(max_examples=40, deadline=None)
@given(spec=algebras(), seed=seeds())
def test_inner_product_properties(spec, seed):
    rng = np.random.default_rng(seed)
    E = FreeModule(spec, 3)
    x, y, u = E.random_vector(rng), E.random_vector(rng), spec.random(rng)
    xy = inner_product(x, y)
    # entrywise oracle
    oracle = sum((a.adjoint() * b for a, b in zip(x.entries, y.entries)), spec.zero())
    assert xy.allclose(oracle, 1e-12)
    assert xy.adjoint().allclose(inner_product(y, x), 1e-12)
    assert is_positive(inner_product(x, x))
    assert inner_product(x, y * u).allclose(xy * u, 1e-12)
    assert inner_product(x * u, y).allclose(u.adjoint() * xy, 1e-12)
    # Cauchy-Schwarz at the norm level
    assert xy.norm() ** 2 <= inner_product(x, x).norm() * inner_product(y, y).norm() * (1 + 1e-12)
    # the complex trace of <x, y> is the coordinate dot product
    tr = sum(np.trace(b) for b in xy.blocks)
    assert np.isclose(tr, np.vdot(x.to_array(), y.to_array()))


@settings(max_examples=40, deadline=None)
@given(spec=algebras(), seed=seeds())
def test_complement_properties(spec, seed):
    rng = np.random.default_rng(seed)
    E = FreeModule(spec, 3)
    s = random_submodule(rng, E, 2)
    perp = orthocomplement(s)
    assert s.dim + perp.dim == E.dim
    assert submodule_equal(orthocomplement(perp), s, 1e-8)
    assert is_complemented(s)
    # B-valued orthogonality, not just trace orthogonality
    for x in s.vectors():
        for y in perp.vectors():
            assert inner_product(x, y).norm() <= 1e-10
    # trace-pairing oracle: null space of the conjugate basis
    _, sv, vh = np.linalg.svd(s.basis.conj().T) if s.dim else (None, np.zeros(0), np.eye(E.dim))
    oracle = vh[int(np.sum(sv > 1e-9)):].conj().T
    assert submodule_equal(perp, Submodule(E, oracle, check=False), 1e-8)


@settings(max_examples=30, deadline=None)
@given(spec=algebras(), seed=seeds())
def test_containment_and_distance(spec, seed):
    rng = np.random.default_rng(seed)
    E = FreeModule(spec, 2)
    s = random_submodule(rng, E, 2)
    big = closure_of_span(E, np.concatenate([s.basis, E.random_vector(rng).to_array()[:, None]], axis=1))
    assert submodule_contains(big, s)
    assert submodule_contains(E.full(), s)
    assert projection_distance(s, s) <= 1e-12


def test_projection_element_generates_proper_submodule(rng):
    E = FreeModule(M2, 1)
    p = M2.element([[[1, 0], [0, 0]]])
    s = submodule_from_generators([E.basis_vector(0) * p])
    assert 0 < s.dim < E.dim
    q = random_projection_element(rng, M2)
    assert (q * q).allclose(q, 1e-12)
