"""Modular operators, their modulus, and the generalized polar decomposition.

A map ``a: E -> F`` is *modular* when some ``b: E -> E`` satisfies
``<x, b y> = <a x, a y>`` for all ``x, y``.  Such ``b`` is unique and
positive; ``|a| := sqrt(b)``.  With ``E_a`` the closure of ``|a| E``:

* ``|a| x -> a x`` extends to a unique isometry ``v_a: E_a -> F``;
* a partial isometry ``v`` with ``v E = closure(a E)`` and ``a = v |a|``
  exists exactly when ``E_a`` is complemented in ``E``; then ``v = v_a P``.

Refusals (not modular, ``E_a`` not complemented, range not dense) are returned
as :class:`Refusal` values rather than raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import DEFAULT_TOL, NotPositive, psd_sqrt
from .module import (
    Submodule,
    is_complemented,
    orthocomplement,
    projection_distance,
    submodule_contains,
    submodule_equal,
)
from .operators import (
    AdjointOutcome,
    ModuleMap,
    b_linearity_defect,
    compose,
    gram_defect,
    is_isometry,
    is_partial_isometry,
    kernel,
    range_closure,
    restrict,
    try_adjoint,
)


@dataclass(frozen=True)
class Refusal:
    """A negative outcome reported as a value.

    ``kind`` is one of ``NotModular``, ``EaNotComplemented``, ``RangeNotDense``.
    """

    kind: str
    reason: str
    witness: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class ModularityCertificate:
    b: ModuleMap
    residual: float
    positive: bool
    self_adjoint: bool = True


def _hermitian_basis(d: int) -> np.ndarray:
    """Real basis of the ``d x d`` Hermitian matrices, shape ``(d*d, d, d)``."""
    out = []
    for i in range(d):
        h = np.zeros((d, d), dtype=complex)
        h[i, i] = 1.0
        out.append(h)
    for i in range(d):
        for j in range(i + 1, d):
            h = np.zeros((d, d), dtype=complex)
            h[i, j] = h[j, i] = 1.0
            out.append(h)
            h = np.zeros((d, d), dtype=complex)
            h[i, j], h[j, i] = -1j, 1j
            out.append(h)
    return np.array(out).reshape(d * d, d, d)


_HERMITIAN_CACHE: dict[int, np.ndarray] = {}


def _hermitian(d: int) -> np.ndarray:
    if d not in _HERMITIAN_CACHE:
        _HERMITIAN_CACHE[d] = _hermitian_basis(d)
    return _HERMITIAN_CACHE[d]


def solve_modularity(a: ModuleMap, tol: float = DEFAULT_TOL) -> ModularityCertificate | Refusal:
    """Find the ``b`` with ``<x_i, b x_j> = <a x_i, a x_j>`` on the domain basis.

    ``b`` is sought among Hermitian matrices (self-adjoint maps), as a real
    least-squares problem.  The solution is accepted when the relative residual
    is at most ``tol`` and it is B-linear.
    """
    E = a.domain
    d = E.dim
    if d == 0:
        return ModularityCertificate(ModuleMap(E, E, np.zeros((0, 0)), check=False), 0.0, True)
    gram = E.ambient.gram(E.basis, E.basis)  # (d, d, D)
    img = a.image_array()
    target = a.codomain.ambient.gram(img, img)  # (d, d, D)
    herm = _hermitian(d)
    # <x_i, H x_j> = sum_l G[i, l] H[l, j]
    cols = np.tensordot(herm, gram, axes=([1], [1])).transpose(0, 2, 1, 3).reshape(d * d, -1)
    lhs = np.concatenate([cols.real, cols.imag], axis=1).T
    rhs = np.concatenate([target.real.reshape(-1), target.imag.reshape(-1)])
    # normal equations: lhs is injective and well conditioned (the trace of
    # <x_i, z> recovers the coordinates of z), and the residual is re-checked
    coef = np.linalg.solve(lhs.T @ lhs, lhs.T @ rhs)
    b = np.tensordot(coef, herm, axes=1)
    err = np.tensordot(gram, b, axes=([1], [0])).transpose(0, 2, 1) - target
    scale = float(np.linalg.norm(target))
    residual = float(np.linalg.norm(err)) / scale if scale > 0 else float(np.linalg.norm(err))
    if residual > tol:
        i, j = _worst(err)
        return Refusal("NotModular", f"no b solves <x,by> = <ax,ay> (residual {residual:.3e})",
                       {"residual": residual, "pair": [i, j]})
    bnorm = float(np.linalg.norm(b, 2))
    if b_linearity_defect(E, E, b) > tol * max(bnorm, 1.0):
        i, j = _worst(err)
        return Refusal("NotModular", "the solution of <x,by> = <ax,ay> is not B-linear",
                       {"residual": residual, "pair": [i, j]})
    positive = bool(np.linalg.eigvalsh(b)[0] >= -tol * bnorm)
    return ModularityCertificate(ModuleMap(E, E, b, check=False), residual, positive)


def _worst(err: np.ndarray) -> tuple[int, int]:
    mag = np.linalg.norm(err, axis=2)
    i, j = np.unravel_index(int(np.argmax(mag)), mag.shape)
    return int(i), int(j)


def modulus_from_certificate(cert: ModularityCertificate, tol: float = DEFAULT_TOL) -> ModuleMap:
    b = cert.b
    return ModuleMap(b.domain, b.domain, psd_sqrt(b.matrix, tol), check=False)


def modulus(a: ModuleMap, tol: float = DEFAULT_TOL) -> ModuleMap | Refusal:
    """``|a| = sqrt(b)``."""
    cert = solve_modularity(a, tol)
    if isinstance(cert, Refusal):
        return cert
    try:
        return modulus_from_certificate(cert, tol)
    except NotPositive as exc:
        return Refusal("NotModular", f"b is not positive: {exc}")


def range_module_Ea(a: ModuleMap, tol: float = DEFAULT_TOL) -> Submodule | Refusal:
    """``E_a``: the closure of ``|a| E`` (equal to the closure of ``b E``)."""
    mod = modulus(a, tol)
    if isinstance(mod, Refusal):
        return mod
    return range_closure(mod, tol)


def _va_from(a: ModuleMap, mod: ModuleMap, Ea: Submodule, tol: float) -> ModuleMap:
    E = a.domain
    pinv = np.linalg.pinv(mod.matrix, rcond=tol, hermitian=True) if E.dim else mod.matrix
    embed = E.basis.conj().T @ Ea.basis  # E_a coordinates -> E coordinates
    return ModuleMap(Ea, a.codomain, a.matrix @ pinv @ embed, check=False)


def build_va(a: ModuleMap, tol: float = DEFAULT_TOL) -> ModuleMap | Refusal:
    """The isometry ``v_a: E_a -> F`` with ``v_a |a| = a``."""
    mod = modulus(a, tol)
    if isinstance(mod, Refusal):
        return mod
    return _va_from(a, mod, range_closure(mod, tol), tol)


def _rel(x: np.ndarray, y: np.ndarray, scale: float) -> float:
    diff = float(np.linalg.norm(x - y, 2)) if x.size else 0.0
    return diff / scale if scale > 0 else diff


@dataclass
class PolarReport:
    """Everything :func:`polar_decompose` learned about ``a``.

    ``checks`` holds pass/fail identities; ``facts`` holds comparisons that are
    reported but not required to hold (e.g. whether ``E_a = (ker a)^perp``).
    """

    a: ModuleMap
    certificate: ModularityCertificate | Refusal
    modulus: ModuleMap | None = None
    Ea: Submodule | None = None
    va: ModuleMap | None = None
    Ea_complemented: bool | None = None
    v: ModuleMap | Refusal | None = None
    checks: dict[str, bool] = field(default_factory=dict)
    residuals: dict[str, float] = field(default_factory=dict)
    facts: dict[str, bool] = field(default_factory=dict)

    @property
    def modular(self) -> bool:
        return isinstance(self.certificate, ModularityCertificate)

    @property
    def has_v(self) -> bool:
        return isinstance(self.v, ModuleMap)

    @property
    def refusal(self) -> Refusal | None:
        if isinstance(self.certificate, Refusal):
            return self.certificate
        if isinstance(self.v, Refusal):
            return self.v
        return None

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return sorted(k for k, passed in self.checks.items() if not passed)


def polar_decompose(a: ModuleMap, tol: float = DEFAULT_TOL, complemented=None) -> PolarReport:
    """Run the full pipeline: ``b``, ``|a|``, ``E_a``, ``v_a`` and, if allowed, ``v``.

    ``complemented`` overrides the complementedness test for ``E_a`` (a
    callable ``Submodule -> bool``); the default is :func:`is_complemented`.
    """
    cert = solve_modularity(a, tol)
    report = PolarReport(a=a, certificate=cert)
    if isinstance(cert, Refusal):
        return report
    report.residuals["modularity"] = cert.residual
    report.checks["b_positive"] = cert.positive
    try:
        mod = modulus_from_certificate(cert, tol)
    except NotPositive as exc:
        report.certificate = Refusal("NotModular", f"b is not positive: {exc}")
        return report
    report.modulus = mod
    E = a.domain
    b = cert.b

    mod_sq = mod.matrix @ mod.matrix
    bscale = max(b.norm(), 1e-300)
    report.residuals["modulus_squared"] = _rel(mod_sq, b.matrix, bscale)
    report.checks["modulus_squared_is_b"] = report.residuals["modulus_squared"] <= tol * 10
    report.checks["modulus_preserves_gram"] = _modulus_gram_defect(a, mod) <= tol * max(a.norm() ** 2, 1.0) * 10

    Ea = range_closure(mod, tol)
    Eb = range_closure(b, tol)
    report.Ea = Ea
    report.residuals["Ea_vs_Eb"] = projection_distance(Ea, Eb)
    report.checks["Ea_equals_Eb"] = report.residuals["Ea_vs_Eb"] <= tol * 10

    va = _va_from(a, mod, Ea, tol)
    report.va = va
    ascale = max(a.norm(), 1e-300)
    va_mod = compose(va, _corestrict_to(mod, Ea))
    report.residuals["va_modulus"] = _rel(va_mod.matrix, a.matrix, ascale)
    report.checks["va_modulus_is_a"] = report.residuals["va_modulus"] <= tol * 10
    report.residuals["va_gram"] = gram_defect(va)
    report.checks["va_isometry"] = report.residuals["va_gram"] <= tol * 10
    ran_a = range_closure(a, tol)
    report.checks["range_va_is_range_a"] = submodule_equal(range_closure(va, tol), ran_a, tol * 10)

    ker_a = kernel(a, tol)
    Ea_perp = orthocomplement(Ea, within=E, tol=tol)
    report.checks["ker_a_is_Ea_perp"] = submodule_equal(ker_a, Ea_perp, tol * 10)
    ker_a_perp = orthocomplement(ker_a, within=E, tol=tol)
    report.checks["Ea_in_ker_a_perp"] = submodule_contains(ker_a_perp, Ea, tol * 10)
    report.facts["Ea_equals_ker_a_perp"] = submodule_equal(Ea, ker_a_perp, tol * 10)

    test = complemented if complemented is not None else (lambda s: is_complemented(s, tol))
    report.Ea_complemented = bool(test(Ea))
    if not report.Ea_complemented:
        report.v = Refusal("EaNotComplemented", "E_a is not complemented in E", {"Ea_dim": Ea.dim})
        return report

    # v = v_a o P_{E_a}, with P_{E_a} viewed as E -> E_a
    to_Ea = ModuleMap(E, Ea, Ea.basis.conj().T @ E.basis, check=False)
    v = compose(va, to_Ea)
    report.v = v
    v_mod = compose(v, mod)
    report.residuals["v_modulus"] = _rel(v_mod.matrix, a.matrix, ascale)
    report.checks["v_modulus_is_a"] = report.residuals["v_modulus"] <= tol * 10
    report.checks["range_v_is_range_a"] = submodule_equal(range_closure(v, tol), ran_a, tol * 10)
    report.checks["v_partial_isometry"] = is_partial_isometry(v, tol * 10)
    ker_v = kernel(v, tol)
    report.checks["ker_v_is_Ea_perp"] = submodule_equal(ker_v, Ea_perp, tol * 10)
    report.checks["ker_v_is_ker_a"] = submodule_equal(ker_v, ker_a, tol * 10)
    return report


def _corestrict_to(m: ModuleMap, target: Submodule) -> ModuleMap:
    return ModuleMap(m.domain, target, target.basis.conj().T @ m.image_array(), check=False)


def _modulus_gram_defect(a: ModuleMap, mod: ModuleMap) -> float:
    """``max |<|a| x_i, |a| x_j> - <a x_i, a x_j>|``."""
    E = a.domain
    if E.dim == 0:
        return 0.0
    ia, im = a.image_array(), mod.image_array()
    return float(np.max(np.abs(E.ambient.gram(im, im) - a.codomain.ambient.gram(ia, ia))))


def kernel_invariants(a: ModuleMap, tol: float = DEFAULT_TOL) -> dict[str, bool] | Refusal:
    """Kernel and range facts for a modular ``a`` with ``b`` and ``|a|``.

    ``ker a = ker |a| = ker b``, ``ker b = E_b^perp``,
    ``E_b`` inside ``(ker b)^perp``, ``E_b = E_{sqrt b}``, and ``b`` injective on ``E_b``.
    Subspace comparisons use projection distance at ``10 * tol``.
    """
    cert = solve_modularity(a, tol)
    if isinstance(cert, Refusal):
        return cert
    try:
        mod = modulus_from_certificate(cert, tol)
    except NotPositive as exc:
        return Refusal("NotModular", f"b is not positive: {exc}")
    b = cert.b
    E = a.domain
    eps = tol * 10
    ker_a, ker_mod, ker_b = kernel(a, tol), kernel(mod, tol), kernel(b, tol)
    Eb, Esqrt = range_closure(b, tol), range_closure(mod, tol)
    ker_b_perp = orthocomplement(ker_b, within=E, tol=tol)
    b_on_Eb = restrict(b, Eb, tol)
    return {
        "ker_a_eq_ker_modulus": submodule_equal(ker_a, ker_mod, eps),
        "ker_modulus_eq_ker_b": submodule_equal(ker_mod, ker_b, eps),
        "ker_b_eq_Eb_perp": submodule_equal(ker_b, orthocomplement(Eb, within=E, tol=tol), eps),
        "Eb_in_ker_b_perp": submodule_contains(ker_b_perp, Eb, eps),
        "Eb_eq_Esqrtb": submodule_equal(Eb, Esqrt, eps),
        "b_injective_on_Eb": kernel(b_on_Eb, tol).dim == 0,
    }


@dataclass
class ObservationResult:
    """The isometry ``w: F -> E`` obtained from a unitary ``v_a``."""

    w: ModuleMap
    va: ModuleMap
    Ea: Submodule
    adjoint: AdjointOutcome
    Ea_complemented: bool
    checks: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def observation_isometry(a: ModuleMap, tol: float = DEFAULT_TOL) -> ObservationResult | Refusal:
    """For modular ``a`` with dense range, invert ``v_a`` and embed into ``E``.

    ``w`` is an isometry; it is adjointable exactly when ``E_a`` is
    complemented.  If it is adjointable and ``(ker a)^perp = 0`` then ``a = 0``.
    """
    mod = modulus(a, tol)
    if isinstance(mod, Refusal):
        return mod
    F = a.codomain
    ran = range_closure(a, tol)
    if ran.dim != F.dim:
        return Refusal("RangeNotDense", "the range of a is not dense in F",
                       {"range_dim": ran.dim, "codomain_dim": F.dim})
    Ea = range_closure(mod, tol)
    va = _va_from(a, mod, Ea, tol)
    E = a.domain
    checks: dict[str, bool] = {}
    checks["va_isometry"] = is_isometry(va, tol * 10)
    checks["va_onto"] = range_closure(va, tol).dim == F.dim
    inv = np.linalg.inv(va.matrix) if F.dim else va.matrix.T
    w = ModuleMap(F, E, (E.basis.conj().T @ Ea.basis) @ inv, check=False)
    checks["w_isometry"] = is_isometry(w, tol * 10)
    adj = try_adjoint(w, tol)
    Ea_comp = is_complemented(Ea, tol)
    checks["adjointable_iff_complemented"] = adj.ok == Ea_comp
    ker_perp = orthocomplement(kernel(a, tol), within=E, tol=tol)
    if adj.ok and ker_perp.dim == 0:
        checks["trivial_ker_perp_forces_zero"] = a.norm() == 0.0 or a.norm() <= tol
    return ObservationResult(w=w, va=va, Ea=Ea, adjoint=adj, Ea_complemented=Ea_comp, checks=checks)


__all__ = [
    "Refusal",
    "ModularityCertificate",
    "PolarReport",
    "ObservationResult",
    "solve_modularity",
    "modulus",
    "modulus_from_certificate",
    "range_module_Ea",
    "build_va",
    "polar_decompose",
    "kernel_invariants",
    "observation_isometry",
]
