import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modpolar.function import (
    GRID,
    DegenerateGenerators,
    FnModuleMap,
    FnModuleVector,
    FnSubmodule,
    LengthMismatch,
    Poly,
    Sqrt,
    chebyshev_grid,
    fiber_rank_profile,
    fn_inner_product,
    fn_is_complemented,
    fn_is_invertible,
    fn_is_positive,
    fn_kernel,
    fn_polar_decompose,
    fn_range_closure,
    fn_solve_modularity,
    fn_submodule_equal,
    fn_try_adjoint,
)
from modpolar.function.scenarios import fn_polar_scenarios

t = Poly.t()
ONE = Poly([1.0])


def test_grid():
    g = chebyshev_grid()
    assert len(g) == GRID == 257
    assert g[0] == 0.0 and g[-1] == 1.0 and np.all(np.diff(g) > 0)


def test_inner_product_examples():
    assert fn_inner_product(FnModuleVector([ONE]), FnModuleVector([t])) == t
    assert fn_inner_product(FnModuleVector([t]), FnModuleVector([t])) == Poly([0, 0, 1])
    assert fn_inner_product(FnModuleVector([ONE, t]), FnModuleVector([t, ONE])) == Poly([0, 2])
    with pytest.raises(LengthMismatch):
        fn_inner_product(FnModuleVector([ONE]), FnModuleVector([ONE, t]))


def test_inner_product_conjugates_left():
    x = FnModuleVector([Poly([1j])])
    assert fn_inner_product(x, x) == ONE


def test_rank_profile_examples():
    p = fiber_rank_profile(FnSubmodule(1, [[ONE]]))
    assert p.generic_rank == 1 and not p.drop_points and set(p.ranks) == {1}
    p = fiber_rank_profile(FnSubmodule(1, [[t]]))
    assert p.drop_points == (0.0,) and p.ranks[0] == 0 and set(p.ranks[1:]) == {1}
    p = fiber_rank_profile(FnSubmodule(2, [[ONE, t], [t, ONE]]))
    assert p.generic_rank == 2 and abs(p.drop_points[0] - 1.0) <= 1e-8
    assert p.ranks[-1] == 1 and set(p.ranks[:-1]) == {2}
    with pytest.raises(DegenerateGenerators):
        fiber_rank_profile(FnSubmodule(1, [[Poly([0.0])]]))


def test_complemented_examples():
    assert fn_is_complemented(FnSubmodule(1, [[ONE]]))
    v = fn_is_complemented(FnSubmodule(1, [[t]]))
    assert not v and v.drop_points == (0.0,)
    assert fn_is_complemented(FnSubmodule(1, [[t + ONE]]))


def test_kernel_examples():
    assert fn_kernel(FnModuleMap([[t]])).is_zero
    assert fn_kernel(FnModuleMap([[Poly([0.0])]])).generic_rank == 1
    assert fn_kernel(FnModuleMap([[t, 0.0], [0.0, 1.0]])).is_zero
    k = fn_kernel(FnModuleMap([[ONE, t]]))
    assert fn_submodule_equal(k, FnSubmodule(2, [[-t, ONE]]))


def test_adjoint_examples():
    out = fn_try_adjoint(FnModuleMap([[t]]))
    assert out.ok and out.matrix[0][0] == t
    out = fn_try_adjoint(FnModuleMap([[ONE]], domain=FnSubmodule(1, [[t]])))
    assert not out.ok and out.witness["t"] == 0.0 and out.jump > 1e-3
    out = fn_try_adjoint(FnModuleMap([[t + ONE]]))
    assert out.ok and out.matrix[0][0] == t + ONE


def test_modularity_examples():
    cert = fn_solve_modularity(FnModuleMap([[Sqrt(t)]]))
    assert cert.b.entries[0][0] == t and cert.residual <= 1e-12
    cert = fn_solve_modularity(FnModuleMap([[ONE]], domain=FnSubmodule(1, [[t]])))
    assert cert.b.entries[0][0] == ONE and cert.exact


def test_positivity_examples():
    b = FnModuleMap([[t]])
    assert fn_is_positive(b) and not fn_is_invertible(b)
    assert fn_is_invertible(FnModuleMap([[t + ONE]]))
    assert not fn_is_positive(FnModuleMap([[t - 0.5]]))


def test_polar_sqrt_refused():
    rep = fn_polar_decompose(FnModuleMap([[Sqrt(t)]]))
    assert rep.modular and not rep.has_v
    assert rep.refusal.kind == "EaNotComplemented"


def test_builtin_scenarios():
    results = fn_polar_scenarios()
    assert [r.name for r in results] == ["inclusion", "strictly_positive", "sqrt_t"]
    for r in results:
        assert r.passed, (r.name, r.mismatches(), r.verdict)


# random polynomials with roots placed in or out of [0,1]
roots = st.lists(st.floats(-2.0, 3.0, allow_nan=False).map(lambda x: round(x, 3)), min_size=1, max_size=3)


def _poly_from_roots(rs):
    p = ONE
    for r in rs:
        p = Poly([-r, 1.0]) * p
    return p


@settings(max_examples=40, deadline=None)
@given(rs=roots)
def test_complemented_iff_inclusion_adjointable(rs):
    g = _poly_from_roots(rs)
    s = FnSubmodule(1, [[g]])
    verdict = fn_is_complemented(s)
    inside = sorted({r for r in rs if 0.0 <= r <= 1.0})
    assert bool(verdict) == (not inside)
    np.testing.assert_allclose(verdict.drop_points, inside, atol=1e-8)
    out = fn_try_adjoint(FnModuleMap([[ONE]], domain=s))
    assert out.ok == bool(verdict)


@settings(max_examples=40, deadline=None)
@given(rs=st.lists(st.sampled_from([-1.5, -0.25, 1.25, 2.0]), min_size=1, max_size=3))
def test_rootless_multiplier(rs):
    g = _poly_from_roots(rs)
    m = FnModuleMap([[g]])
    assert fn_is_complemented(fn_range_closure(m))
    assert fn_is_invertible(m)
    assert all(abs(g.evaluate(x)) > 0 for x in chebyshev_grid())


@settings(max_examples=30, deadline=None)
@given(a=st.integers(-3, 3), b=st.integers(-3, 3), r=st.sampled_from([0.0, 0.5, 1.0, 1.5]))
def test_rank_profile_semicontinuous(a, b, r):
    # two generators in C[0,1]^2 whose determinant vanishes at t = r
    c1 = [ONE, Poly([float(a), 1.0])]
    c2 = [Poly([-r, 1.0]), Poly([-r, 1.0]) * Poly([float(a), 1.0]) + Poly([-r, 1.0]) * 0 + Poly([-r, 1.0])]
    s = FnSubmodule(2, [c1, c2])
    p = fiber_rank_profile(s)
    assert p.generic_rank == 2
    drops = [x for x in p.drop_points]
    assert all(p.ranks[i] <= p.generic_rank for i in range(len(p.points)))
    for x, rank in zip(p.points, p.ranks):
        if all(abs(x - d) > 1e-8 for d in drops):
            assert rank == 2
    if 0.0 <= r <= 1.0:
        assert drops and abs(drops[0] - r) <= 1e-8
    # pointwise numeric rank agrees with the exact profile
    for x in (0.0, 0.5, 1.0):
        assert np.linalg.matrix_rank(s.generator_matrix(x), tol=1e-9) == s.rank_at(x)


@settings(max_examples=20, deadline=None)
@given(coeffs=st.lists(st.integers(-3, 3), min_size=1, max_size=3).filter(any))
def test_pointwise_gram_consistency(coeffs):
    a = FnModuleMap([[Poly([float(c) for c in coeffs])]])
    cert = fn_solve_modularity(a)
    for x in chebyshev_grid(33):
        ax = a.evaluate(x)
        np.testing.assert_allclose(cert.b.evaluate(x), ax.conj().T @ ax, atol=1e-9)
