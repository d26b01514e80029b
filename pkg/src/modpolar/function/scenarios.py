"""Structured verdicts for operators over C[0,1] and the built-in scenarios."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..algebra import DEFAULT_TOL
from .analysis import (
    GRID,
    FnModuleMap,
    FnSubmodule,
    Undecidable,
    chebyshev_grid,
    fn_is_isometry_exact,
    fn_polar_decompose,
    fn_positive_facts,
    fn_submodule_equal,
    fn_try_adjoint,
    isometry_defect,
)
from .poly import Poly, Sqrt


def _is_identity(m: FnModuleMap) -> bool:
    return m.m == m.n and all(
        m.entries[i][j] == (Poly([1.0]) if i == j else Poly([0.0]))
        for i in range(m.m)
        for j in range(m.n)
    )


def adjoint_verdict(a: FnModuleMap) -> dict:
    out = fn_try_adjoint(a)
    verdict = {"adjointable": out.ok, "adjoint_jump": out.jump}
    if not out.ok:
        verdict["adjoint_witness_t"] = out.witness["t"]
    return verdict


def modularity_verdict(a: FnModuleMap, tol: float = DEFAULT_TOL, grid: int = GRID) -> dict:
    report = fn_polar_decompose(a, tol, grid)
    verdict = {"modular": report.modular}
    if report.modular:
        cert = report.certificate
        verdict.update(
            b=str(cert.b.entries if cert.b.m > 1 else cert.b.entries[0][0]),
            b_is_identity=_is_identity(cert.b),
            residual=cert.residual,
            residual_exact=cert.exact,
        )
    verdict.update(adjoint_verdict(a))
    return verdict


def polar_verdict(a: FnModuleMap, tol: float = DEFAULT_TOL, grid: int = GRID) -> dict:
    report = fn_polar_decompose(a, tol, grid)
    verdict: dict = {"modular": report.modular}
    if not report.modular:
        verdict["refusal"] = report.refusal.kind
        return verdict
    points = chebyshev_grid(grid)
    verdict.update(
        modulus=str(report.modulus.entries[0][0]) if report.modulus.n == 1 else "matrix",
        Ea_equals_Eb=report.checks["Ea_equals_Eb"],
        Ea_equals_domain=fn_submodule_equal(report.Ea, a.domain),
        Ea_complemented=report.Ea_complemented.complemented,
        Ea_drop_points=list(report.Ea.drop_points),
        va_isometry_defect=isometry_defect(report.va, points),
        va_isometric=report.checks["va_isometry"],
        checks_passed=report.ok,
        failed_checks=report.failed(),
        refusal=report.refusal.kind if report.refusal is not None else None,
        has_v=report.has_v,
    )
    if report.has_v:
        dom = a.domain
        diff = max(
            float(np.linalg.norm((report.v(t) - a.evaluate(t)) @ dom.fiber_projector(t), 2))
            for t in points
        )
        verdict["v_minus_a"] = diff
        verdict["v_equals_a"] = diff <= 10 * tol
        verdict["v_partial_isometry"] = report.checks["v_partial_isometry"]
        if a.is_polynomial:
            verdict["a_isometry_residual"] = fn_is_isometry_exact(a)
    return verdict


def positivity_verdict(b: FnModuleMap, grid: int = GRID) -> dict:
    facts = fn_positive_facts(b, grid)
    return {
        "positive": facts.positive,
        "strictly_positive": facts.strictly_positive,
        "invertible": facts.invertible,
        "ker_b_zero": facts.kernel_zero,
        "ker_b_perp_is_E": facts.kernel_perp_is_E,
        "Eb_complemented": facts.Eb_complemented.complemented,
        "Eb_drop_points": list(facts.Eb_complemented.drop_points),
        "Eb_equals_ker_b_perp": facts.Eb_equals_kernel_perp,
    }


@dataclass
class ScenarioResult:
    name: str
    description: str
    verdict: dict
    expected: dict = field(default_factory=dict)

    def mismatches(self) -> list[str]:
        return [k for k, v in self.expected.items() if self.verdict.get(k) != v]

    @property
    def passed(self) -> bool:
        return not self.mismatches()


def inclusion_scenario() -> tuple[FnModuleMap, str]:
    t = Poly.t()
    E = FnSubmodule(1, [[t]])
    return FnModuleMap([[1.0]], domain=E), "inclusion of the submodule generated by t into C[0,1]"


def strictly_positive_scenario() -> tuple[FnModuleMap, str]:
    return FnModuleMap([[Poly.t()]]), "multiplication by t on C[0,1]"


def sqrt_scenario() -> tuple[FnModuleMap, str]:
    return FnModuleMap([[Sqrt(Poly.t())]]), "multiplication by sqrt(t) on C[0,1]"


def fn_polar_scenarios(tol: float = DEFAULT_TOL, grid: int = GRID) -> list[ScenarioResult]:
    """The three C[0,1] scenarios with their expected verdicts."""
    out = []
    a, desc = inclusion_scenario()
    verdict = modularity_verdict(a, tol, grid)
    verdict.update(polar_verdict(a, tol, grid))
    out.append(
        ScenarioResult(
            "inclusion",
            desc,
            verdict,
            {
                "modular": True,
                "b_is_identity": True,
                "adjointable": False,
                "adjoint_witness_t": 0.0,
                "Ea_equals_domain": True,
                "Ea_complemented": True,
                "has_v": True,
                "v_equals_a": True,
                "v_partial_isometry": True,
            },
        )
    )
    b, desc = strictly_positive_scenario()
    out.append(
        ScenarioResult(
            "strictly_positive",
            desc,
            positivity_verdict(b, grid),
            {
                "positive": True,
                "strictly_positive": True,
                "invertible": False,
                "ker_b_zero": True,
                "ker_b_perp_is_E": True,
                "Eb_complemented": False,
                "Eb_drop_points": [0.0],
                "Eb_equals_ker_b_perp": False,
            },
        )
    )
    a, desc = sqrt_scenario()
    verdict = polar_verdict(a, tol, grid)
    verdict["b"] = modularity_verdict(a, tol, grid).get("b")
    out.append(
        ScenarioResult(
            "sqrt_t",
            desc,
            verdict,
            {
                "modular": True,
                "b": str(Poly.t()),
                "Ea_equals_Eb": True,
                "Ea_complemented": False,
                "Ea_drop_points": [0.0],
                "va_isometric": True,
                "refusal": "EaNotComplemented",
                "has_v": False,
            },
        )
    )
    return out


__all__ = [
    "Undecidable",
    "adjoint_verdict",
    "modularity_verdict",
    "polar_verdict",
    "positivity_verdict",
    "ScenarioResult",
    "inclusion_scenario",
    "strictly_positive_scenario",
    "sqrt_scenario",
    "fn_polar_scenarios",
]
