import numpy as np
import pytest
from hypothesis import given, settings

from modpolar.algebra import (
    AlgebraSpec,
    NotPositive,
    Tolerance,
    c_star_defect,
    is_invertible,
    is_positive,
    parse_block_dims,
    psd_sqrt,
    sqrt_positive,
)

from conftest import algebras, seeds

M2 = AlgebraSpec((2,))


def test_spec_validation():
    with pytest.raises(ValueError):
        AlgebraSpec(())
    with pytest.raises(ValueError):
        AlgebraSpec((1, 0))
    assert AlgebraSpec((1, 2)).dim == 5
    assert str(AlgebraSpec((1, 2))) == "C (+) M_2"


def test_tolerance_nonnegative():
    assert Tolerance() == 1e-9
    with pytest.raises(ValueError):
        Tolerance(-1.0)


def test_parse_block_dims():
    assert parse_block_dims("1,2").block_dims == (1, 2)
    assert parse_block_dims("C+M2").block_dims == (1, 2)
    assert parse_block_dims("M_3").block_dims == (3,)


def test_block_shape_checked():
    with pytest.raises(ValueError):
        M2.element([np.eye(3)])
    with pytest.raises(ValueError):
        AlgebraSpec((1, 2)).element([1.0])


def test_adjoint_examples():
    one = M2.identity()
    assert one.adjoint().allclose(one)
    x = M2.element([[[0, 1], [0, 0]]])
    np.testing.assert_allclose(x.adjoint().blocks[0], [[0, 0], [1, 0]])


def test_positivity_examples():
    assert is_positive(M2.identity())
    assert not is_positive(M2.element([np.diag([1.0, -1.0])]))
    assert is_positive(M2.element([[[2, 1], [1, 2]]]))
    assert not is_positive(M2.element([[[0, 1], [0, 0]]]))


def test_sqrt_examples():
    r = sqrt_positive(M2.element([np.diag([4.0, 9.0])]))
    np.testing.assert_allclose(r.blocks[0], np.diag([2.0, 3.0]), atol=1e-12)
    p = M2.element([[[0.5, 0.5], [0.5, 0.5]]])
    assert sqrt_positive(p).allclose(p, 1e-12)
    s3 = np.sqrt(3.0)
    expected = np.array([[s3 + 1, s3 - 1], [s3 - 1, s3 + 1]]) / 2
    r = sqrt_positive(M2.element([[[2, 1], [1, 2]]]))
    np.testing.assert_allclose(r.blocks[0], expected, atol=1e-12)


def test_sqrt_rejects_non_positive():
    with pytest.raises(NotPositive):
        sqrt_positive(M2.element([np.diag([1.0, -1.0])]))


def test_psd_sqrt_clamps_roundoff():
    a = np.diag([1.0, -1e-14])
    np.testing.assert_allclose(psd_sqrt(a), np.diag([1.0, 0.0]))


def test_invertible_examples():
    assert is_invertible(M2.identity())
    assert not is_invertible(M2.element([np.diag([1.0, 0.0])]))
    assert is_invertible(M2.element([[[2, 1], [1, 2]]]))
    assert not is_invertible(M2.zero())


@settings(max_examples=60, deadline=None)
@given(spec=algebras(), seed=seeds())
def test_involution_and_anti_multiplicativity(spec, seed):
    rng = np.random.default_rng(seed)
    x, y = spec.random(rng), spec.random(rng)
    assert x.adjoint().adjoint().allclose(x, 0.0)
    assert (x * y).adjoint().allclose(y.adjoint() * x.adjoint(), 1e-12)
    # entrywise oracle on the dense block-diagonal form
    np.testing.assert_allclose(x.adjoint().dense(), x.dense().conj().T)
    assert abs(x.adjoint().norm() - x.norm()) <= 1e-12 * x.norm()


@settings(max_examples=60, deadline=None)
@given(spec=algebras(), seed=seeds())
def test_c_star_identity(spec, seed):
    x = spec.random(np.random.default_rng(seed))
    assert c_star_defect(x) <= 1e-9
    assert np.isclose((x.adjoint() * x).norm(), x.norm() ** 2, rtol=1e-9)


@settings(max_examples=60, deadline=None)
@given(spec=algebras(), seed=seeds())
def test_sqrt_properties(spec, seed):
    y = spec.random(np.random.default_rng(seed))
    x = y.adjoint() * y
    assert is_positive(x)
    r = sqrt_positive(x)
    assert is_positive(r)
    assert (r * r).allclose(x, 1e-9)
    assert (r * x).allclose(x * r, 1e-9)
    # sqrt(r^2) = r for positive r
    assert sqrt_positive(r * r).allclose(r, 1e-8)


@settings(max_examples=40, deadline=None)
@given(spec=algebras(), seed=seeds())
def test_vector_roundtrip(spec, seed):
    x = spec.random(np.random.default_rng(seed))
    assert spec.from_vector(x.to_vector()).allclose(x, 0.0)
    units = spec.matrix_units()
    assert len(units) == spec.dim
    total = sum((u * c for u, c in zip(units, x.to_vector())), spec.zero())
    assert total.allclose(x, 1e-14)
