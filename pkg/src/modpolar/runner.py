"""Executing scenarios, the built-in gallery and the seeded fuzzer.

Reports are plain dictionaries (JSON-serialisable after :func:`normalize`).
Every request yields a status: ``ok``, ``refused`` (a structured negative
outcome such as ``EaNotComplemented``) or ``fail`` (an identity that should
hold did not).  Expectations in the scenario turn verdict values into checks.
"""

from __future__ import annotations

import math
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .algebra import DEFAULT_TOL, AlgebraSpec, _is_psd_matrix
from .function.analysis import (
    GRID,
    FnModularity,
    FnModuleMap,
    FnSubmodule,
    fn_is_isometry_exact,
    fn_solve_modularity,
)
from .function.scenarios import adjoint_verdict, modularity_verdict, polar_verdict, positivity_verdict
from .module import (
    FreeModule,
    Submodule,
    closure_of_span,
    is_complemented,
    orthocomplement,
    submodule_equal,
)
from .operators import (
    ModuleMap,
    is_coisometry,
    is_contractive,
    is_isometry,
    is_partial_isometry,
    is_projection_gram,
    kernel,
    projection_defects,
    range_closure,
    try_adjoint,
)
from .polar import (
    ModularityCertificate,
    Refusal,
    kernel_invariants,
    observation_isometry,
    polar_decompose,
    solve_modularity,
)
from .sampling import random_operator
from .scenario import Scenario, algebra_element, load_scenario, parse_scenario

REPORT_SCHEMA = "modpolar.report/1"
GALLERY_SCHEMA = "modpolar.gallery/1"
FUZZ_SCHEMA = "modpolar.fuzz/1"
DIGITS = 3


class ScenarioError(ValueError):
    """A scenario that parses but cannot be instantiated."""


# ---------------------------------------------------------------- output helpers


def normalize(obj):
    """JSON-ready copy with floats rounded to ``DIGITS`` significant digits."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{DIGITS - 1}e}")
    return obj


def _values_match(actual, expected) -> bool:
    if isinstance(expected, bool) or isinstance(actual, bool):
        return isinstance(actual, bool) and isinstance(expected, bool) and actual == expected
    if isinstance(expected, (int, float)) and isinstance(actual, (int, float)):
        return abs(actual - expected) <= 1e-8 * max(1.0, abs(expected))
    if isinstance(expected, list) and isinstance(actual, (list, tuple)):
        return len(expected) == len(actual) and all(_values_match(a, e) for a, e in zip(actual, expected))
    return actual == expected


# ---------------------------------------------------------------- finite backend


def _finite_objects(s: Scenario, tol: float):
    spec = s.algebra_spec
    spaces: dict[str, FreeModule | Submodule] = {}
    for m in s.modules:
        if m.parent is None:
            spaces[m.name] = FreeModule(spec, m.rank)
            continue
        ambient = spaces[m.parent]
        if not m.generators:
            spaces[m.name] = ambient.zero()
            continue
        cols = [ambient.vector([algebra_element(e, spec) for e in g]).to_array() for g in m.generators]
        spaces[m.name] = closure_of_span(ambient, np.stack(cols, axis=1), tol)
    ops = {}
    for op in s.operators:
        entries = [[algebra_element(e, spec) for e in row] for row in op.matrix]
        try:
            ops[op.name] = ModuleMap.left_multiplication(entries, spaces[op.source], spaces[op.target], tol)
        except ValueError as exc:
            raise ScenarioError(f"operator {op.name}: {exc}") from None
    return spaces, ops


def _status(verdict: dict, failed: Sequence[str] = (), refusal: str | None = None) -> dict:
    status = "fail" if failed else ("refused" if refusal else "ok")
    return {"status": status, "verdict": verdict}


def _refused(r: Refusal) -> dict:
    return _status({"refusal": r.kind, "reason": r.reason, "witness": dict(r.witness)}, refusal=r.kind)


def finite_modularity(a: ModuleMap, tol: float) -> dict:
    cert = solve_modularity(a, tol)
    if isinstance(cert, Refusal):
        return _refused(cert)
    b = cert.b.matrix
    verdict = {
        "modular": True,
        "residual": cert.residual,
        "b_positive": cert.positive,
        "b_is_identity": bool(np.allclose(b, np.eye(b.shape[0]), atol=10 * tol)),
    }
    adj = try_adjoint(a, tol)
    if adj.ok:
        oracle = adj.adjoint.matrix @ a.matrix
        scale = max(float(np.linalg.norm(oracle, 2)), 1e-300)
        err = float(np.linalg.norm(b - oracle, 2)) / scale if b.size else 0.0
        verdict["b_oracle_error"] = err
        verdict["b_matches_oracle"] = err <= 10 * tol
    failed = [k for k in ("b_positive", "b_matches_oracle") if verdict.get(k) is False]
    return _status(verdict, failed)


def finite_polar(a: ModuleMap, tol: float) -> dict:
    rep = polar_decompose(a, tol)
    if not rep.modular:
        return _refused(rep.certificate)
    verdict = {
        "modular": True,
        "E_dim": a.domain.dim,
        "Ea_dim": rep.Ea.dim,
        "Ea_complemented": rep.Ea_complemented,
        "has_v": rep.has_v,
        "checks_passed": rep.ok,
        "failed_checks": rep.failed(),
        "max_residual": max(rep.residuals.values(), default=0.0),
        "Ea_equals_ker_a_perp": rep.facts.get("Ea_equals_ker_a_perp"),
        "refusal": rep.refusal.kind if rep.refusal else None,
    }
    if rep.has_v:
        verdict["v_norm"] = rep.v.norm()
        verdict["v_is_zero"] = rep.v.norm() <= tol
    return _status(verdict, rep.failed(), verdict["refusal"])


def finite_invariants(a: ModuleMap, tol: float) -> dict:
    inv = kernel_invariants(a, tol)
    if isinstance(inv, Refusal):
        return _refused(inv)
    verdict = dict(inv)
    verdict["all_hold"] = all(inv.values())
    return _status(verdict, [k for k, v in inv.items() if not v])


def finite_predicates(a: ModuleMap, tol: float) -> dict:
    adj = try_adjoint(a, tol)
    verdict = {
        "norm": a.norm(),
        "is_isometry": is_isometry(a, tol),
        "is_coisometry": is_coisometry(a, tol),
        "is_partial_isometry": is_partial_isometry(a, tol),
        "is_contractive": is_contractive(a, tol),
        "adjointable": adj.ok,
    }
    if submodule_equal(a.domain, a.codomain, tol):
        gram = is_projection_gram(a, tol)
        verdict["is_projection_gram"] = gram
        if gram:
            sa, idem = projection_defects(a)
            verdict["self_adjoint_defect"] = sa
            verdict["idempotent_defect"] = idem
    return _status(verdict)


def finite_observation(a: ModuleMap, tol: float) -> dict:
    obs = observation_isometry(a, tol)
    if isinstance(obs, Refusal):
        return _refused(obs)
    verdict = dict(obs.checks)
    verdict["w_adjointable"] = obs.adjoint.ok
    verdict["Ea_complemented"] = obs.Ea_complemented
    return _status(verdict, [k for k, v in obs.checks.items() if not v])


def finite_positivity(b: ModuleMap, tol: float) -> dict:
    E = b.domain
    if not submodule_equal(E, b.codomain, tol) or not _is_psd_matrix(b.matrix, tol, max(b.norm(), 1.0)):
        return _refused(Refusal("NotPositive", "b is not a positive map E -> E"))
    ker = kernel(b, tol)
    Eb = range_closure(b, tol)
    s = np.linalg.svd(b.matrix, compute_uv=False) if b.matrix.size else np.zeros(0)
    ker_perp = orthocomplement(ker, within=E, tol=tol)
    verdict = {
        "positive": True,
        "ker_b_dim": ker.dim,
        "ker_b_zero": ker.dim == 0,
        "strictly_positive": ker.dim == 0,
        "invertible": bool(s.size == 0 or s.min() > tol * s.max()),
        "Eb_dim": Eb.dim,
        "Eb_complemented": is_complemented(Eb, tol),
        "Eb_equals_ker_b_perp": submodule_equal(Eb, ker_perp, 10 * tol),
    }
    return _status(verdict)


_FINITE = {
    "modularity": finite_modularity,
    "polar": finite_polar,
    "invariants": finite_invariants,
    "predicates": finite_predicates,
    "observation": finite_observation,
    "positivity": finite_positivity,
}


# ---------------------------------------------------------------- function backend


def _function_objects(s: Scenario):
    spaces: dict[str, FnSubmodule] = {}
    for m in s.modules:
        if m.parent is None:
            spaces[m.name] = FnSubmodule.full(m.rank)
        else:
            spaces[m.name] = FnSubmodule(m.rank, m.generators)
    ops = {}
    for op in s.operators:
        ops[op.name] = FnModuleMap(op.matrix, domain=spaces[op.source], codomain=spaces[op.target])
    return spaces, ops


def _fn_status(verdict: dict) -> dict:
    return _status(verdict, verdict.get("failed_checks", []), verdict.get("refusal"))


def function_request(kind: str, a: FnModuleMap, tol: float, grid: int) -> dict:
    if kind == "modularity":
        return _fn_status(modularity_verdict(a, tol, grid))
    if kind == "polar":
        return _fn_status(polar_verdict(a, tol, grid))
    if kind == "positivity":
        return _status(positivity_verdict(a, grid))
    if kind == "invariants":
        cert = fn_solve_modularity(a, tol, grid)
        if not isinstance(cert, FnModularity):
            return _refused(cert)
        return _status(positivity_verdict(cert.b, grid))
    if kind == "predicates":
        verdict = adjoint_verdict(a)
        if a.is_polynomial:
            res = fn_is_isometry_exact(a)
            verdict["isometry_residual"] = res
            verdict["is_isometry"] = res <= tol
        return _status(verdict)
    return _refused(Refusal("Unsupported", f"'{kind}' is not available on the function backend"))


# ---------------------------------------------------------------- run


def run(s: Scenario, tol: float = DEFAULT_TOL, grid: int = GRID, fail_fast: bool = False) -> dict:
    """Execute every request of ``s`` and evaluate its expectations."""
    if s.backend == "finite":
        _, ops = _finite_objects(s, tol)

        def execute(kind, name):
            return _FINITE[kind](ops[name], tol)
    else:
        _, ops = _function_objects(s)

        def execute(kind, name):
            return function_request(kind, ops[name], tol, grid)

    results = []
    for req in s.requests:
        try:
            out = execute(req.analysis, req.operator)
        except ValueError as exc:
            out = {"status": "fail", "verdict": {"error": f"{type(exc).__name__}: {exc}"}}
        results.append({"analysis": req.analysis, "operator": req.operator, **out})
        if fail_fast and out["status"] == "fail":
            break

    expectations = []
    for key in sorted(s.expect):
        op, kind, field = key.split(".")
        expected = s.expect[key]
        found = [r for r in results if r["operator"] == op and r["analysis"] == kind]
        actual = normalize(found[0]["verdict"].get(field)) if found else None
        passed = bool(found) and field in found[0]["verdict"] and _values_match(actual, expected)
        expectations.append({"key": key, "expected": expected, "actual": actual, "passed": passed})

    counts = {st: sum(r["status"] == st for r in results) for st in ("ok", "refused", "fail")}
    failed_expect = sum(not e["passed"] for e in expectations)
    return {
        "schema": REPORT_SCHEMA,
        "scenario": s.name,
        "backend": s.backend,
        "algebra": s.algebra if isinstance(s.algebra, str) else str(AlgebraSpec(s.algebra)),
        "tol": tol,
        "results": results,
        "expectations": expectations,
        "summary": {
            **counts,
            "expectations_failed": failed_expect,
            "passed": counts["fail"] == 0 and failed_expect == 0,
        },
    }


def run_text(text: str, **kw) -> dict:
    return run(parse_scenario(text), **kw)


def restrict_requests(s: Scenario, kinds: Iterable[str]) -> Scenario:
    """Copy of ``s`` with only the requests (and expectations) of the given kinds."""
    kinds = set(kinds)
    from dataclasses import replace

    return replace(
        s,
        requests=tuple(r for r in s.requests if r.analysis in kinds),
        expect={k: v for k, v in s.expect.items() if k.split(".")[1] in kinds},
    )


# ---------------------------------------------------------------- gallery


def gallery_scenarios() -> list[Scenario]:
    files = sorted(
        (p for p in resources.files("modpolar").joinpath("gallery").iterdir() if p.name.endswith(".yaml")),
        key=lambda p: p.name,
    )
    return [parse_scenario(p.read_text(encoding="utf-8")) for p in files]


def gallery(tol: float = DEFAULT_TOL, grid: int = GRID, fail_fast: bool = False) -> dict:
    reports = []
    for s in sorted(gallery_scenarios(), key=lambda s: s.name):
        rep = run(s, tol, grid)
        reports.append(rep)
        if fail_fast and not rep["summary"]["passed"]:
            break
    return {
        "schema": GALLERY_SCHEMA,
        "tol": tol,
        "grid": grid,
        "reports": reports,
        "summary": {
            "scenarios": len(reports),
            "passed": sum(r["summary"]["passed"] for r in reports),
            "all_passed": all(r["summary"]["passed"] for r in reports),
        },
    }


# ---------------------------------------------------------------- fuzz


def fuzz_case(a: ModuleMap, tol: float) -> dict:
    """Polar pipeline, kernel invariants and the adjoint oracle for one operator."""
    eps = 10 * tol
    rep = polar_decompose(a, tol)
    failed: list[str] = []
    case: dict = {}
    if not rep.modular:
        return {"passed": False, "failed": ["modular"]}
    failed += rep.failed()
    if not rep.has_v:
        failed.append("has_v")
    cert: ModularityCertificate = rep.certificate
    adj = try_adjoint(a, tol)
    if not adj.ok:
        failed.append("adjoint_oracle")
    else:
        oracle = adj.adjoint.matrix @ a.matrix
        scale = float(np.linalg.norm(oracle, 2))
        err = float(np.linalg.norm(cert.b.matrix - oracle, 2)) / scale if scale > 0 else 0.0
        case["b_oracle_error"] = err
        if err > eps:
            failed.append("b_equals_oracle")
    case["factorization_residual"] = rep.residuals.get("v_modulus", float("nan"))
    inv = kernel_invariants(a, tol)
    if isinstance(inv, Refusal):
        failed.append("invariants")
    else:
        failed += [k for k, v in inv.items() if not v]
    case["passed"] = not failed
    case["failed"] = sorted(failed)
    return case


def parse_ranks(text: str | int | Sequence[int]) -> list[int]:
    """``"3"``, ``"1-4"`` or ``"1,2,3"`` -> list of ranks."""
    if isinstance(text, int):
        return [text]
    if not isinstance(text, str):
        return [int(r) for r in text]
    text = text.strip()
    if "-" in text:
        lo, hi = text.split("-", 1)
        ranks = list(range(int(lo), int(hi) + 1))
    else:
        ranks = [int(x) for x in text.split(",") if x.strip()]
    if not ranks or min(ranks) < 1:
        raise ValueError(f"invalid rank list {text!r}")
    return ranks


def fuzz(
    seed: int,
    count: int,
    algebra: AlgebraSpec,
    ranks: Sequence[int],
    tol: float = DEFAULT_TOL,
    fail_fast: bool = False,
) -> dict:
    """``count`` random operators over ``algebra``, ranks cycling through ``ranks``."""
    rng = np.random.default_rng(seed)
    modules = {r: FreeModule(algebra, r) for r in ranks}
    cases = []
    for i in range(count):
        r = ranks[i % len(ranks)]
        a = random_operator(rng, modules[r])
        case = {"index": i, "rank": r, **fuzz_case(a, tol)}
        cases.append(case)
        if fail_fast and not case["passed"]:
            break
    passed = sum(c["passed"] for c in cases)
    return {
        "schema": FUZZ_SCHEMA,
        "seed": seed,
        "count": count,
        "algebra": str(algebra),
        "ranks": list(ranks),
        "tol": tol,
        "cases": cases,
        "summary": {"cases": len(cases), "passed": passed, "failed": len(cases) - passed,
                    "all_passed": passed == len(cases) == count},
    }


__all__ = [
    "REPORT_SCHEMA",
    "GALLERY_SCHEMA",
    "FUZZ_SCHEMA",
    "ScenarioError",
    "normalize",
    "run",
    "run_text",
    "restrict_requests",
    "gallery_scenarios",
    "gallery",
    "fuzz_case",
    "parse_ranks",
    "fuzz",
    "load_scenario",
]
