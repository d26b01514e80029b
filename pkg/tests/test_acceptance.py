"""Acceptance criteria 1-10.

Each test records one ``PASS``/``FAIL`` line (printed immediately and again in
the terminal summary) and then asserts.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from modpolar.algebra import AlgebraSpec
from modpolar.module import FreeModule, Submodule, is_complemented
from modpolar.operators import (
    ModuleMap,
    compose,
    gram_defect,
    is_partial_isometry,
    is_projection_gram,
    projection_defects,
    try_adjoint,
)
from modpolar.function.analysis import chebyshev_grid, fn_polar_decompose, isometry_defect
from modpolar.function.scenarios import fn_polar_scenarios, inclusion_scenario, sqrt_scenario
from modpolar.polar import kernel_invariants, observation_isometry, polar_decompose, solve_modularity
from modpolar.sampling import (
    random_idempotent,
    random_isometry,
    random_operator,
    random_orthogonal_projection,
    random_partial_isometry,
    random_unitary,
)

RESULTS: list[str] = []
SEED = 20240601
PER_ALGEBRA = 500
# (algebra, cycling ranks)
CORPUS_SPECS = [(AlgebraSpec((1,)), [1, 2, 3, 4]), (AlgebraSpec((2,)), [1, 2, 3]), (AlgebraSpec((1, 2)), [2])]


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def corpus():
    rng = np.random.default_rng(SEED)
    ops = []
    for spec, ranks in CORPUS_SPECS:
        modules = {r: FreeModule(spec, r) for r in ranks}
        for i in range(PER_ALGEBRA):
            ops.append(random_operator(rng, modules[ranks[i % len(ranks)]]))
    return ops


def _rel(x, y):
    scale = np.linalg.norm(y, 2)
    return np.linalg.norm(x - y, 2) / scale if scale > 0 else np.linalg.norm(x, 2)


def test_criterion_01_oracle_equivalence(corpus):
    start = time.perf_counter()
    bad = []
    worst_b = worst_v = 0.0
    for k, a in enumerate(corpus):
        rep = polar_decompose(a)
        adj = try_adjoint(a)
        if not (rep.modular and rep.has_v and adj.ok):
            bad.append(k)
            continue
        err_b = _rel(rep.certificate.b.matrix, adj.adjoint.matrix @ a.matrix)
        err_v = _rel(compose(rep.v, rep.modulus).matrix, a.matrix)
        worst_b, worst_v = max(worst_b, err_b), max(worst_v, err_v)
        if err_b > 1e-8 or err_v > 1e-8 or not is_partial_isometry(rep.v) or not rep.ok:
            bad.append(k)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10.0
    record(1, ok, f"{len(corpus) - len(bad)}/{len(corpus)} operators, max |b - a*a| {worst_b:.1e}, "
                  f"max |v|a| - a| {worst_v:.1e}, {elapsed:.2f}s")


def test_criterion_02_kernel_invariants(corpus):
    failures = 0
    for a in corpus:
        inv = kernel_invariants(a)
        failures += not (isinstance(inv, dict) and all(inv.values()))
    record(2, failures == 0, f"{failures} failures over {len(corpus)} operators")


def test_criterion_03_uniqueness():
    rng = np.random.default_rng(SEED + 3)
    specs = [AlgebraSpec((1,)), AlgebraSpec((2,)), AlgebraSpec((1, 2))]
    worst_perm, min_resid, bad = 0.0, np.inf, 0
    for i in range(100):
        E = FreeModule(specs[i % 3], 2)
        a = random_operator(rng, E)
        while a.norm() == 0:
            a = random_operator(rng, E)
        # permuted basis
        perm = rng.permutation(E.dim)
        a2 = ModuleMap(Submodule(E, E.full().basis[:, perm]), E, a.matrix[:, perm])
        b = solve_modularity(a).b.matrix
        b2 = solve_modularity(a2).b.matrix
        err = np.linalg.norm(b2 - b[np.ix_(perm, perm)]) / max(np.linalg.norm(b), 1e-300)
        worst_perm = max(worst_perm, err)
        # competitor: v + 1e-3 (unitary) P_{E_a}, which differs from v on E_a
        rep = polar_decompose(a)
        u = random_unitary(rng, E)
        proj = rep.Ea.projector  # ambient projector onto E_a
        competitor = ModuleMap(E, E, rep.v.matrix + 1e-3 * u.matrix @ proj)
        resid = np.linalg.norm(compose(competitor, rep.modulus).matrix - a.matrix, 2)
        min_resid = min(min_resid, resid)
        bad += err > 1e-8 or resid < 1e-4
    record(3, bad == 0, f"max permuted-basis error {worst_perm:.1e}, min competitor residual {min_resid:.1e}")


def _scenario(name):
    return {r.name: r for r in fn_polar_scenarios()}[name]


def test_criterion_04_sqrt_negative_case():
    a, _ = sqrt_scenario()
    rep = fn_polar_decompose(a)
    drops = rep.Ea_complemented.drop_points
    defect = isometry_defect(rep.va, chebyshev_grid(257))
    ok = (
        rep.modular
        and not rep.Ea_complemented.complemented
        and len(drops) == 1 and abs(drops[0]) <= 1e-8
        and defect <= 1e-9
        and rep.refusal is not None and rep.refusal.kind == "EaNotComplemented"
        and not rep.has_v
        and _scenario("sqrt_t").passed
    )
    record(4, ok, f"E_a drop points {list(drops)}, v_a isometry defect {defect:.1e}, "
                  f"refusal {getattr(rep.refusal, 'kind', None)}")


def test_criterion_05_inclusion():
    v = _scenario("inclusion").verdict
    ok = (
        v["modular"] and v["b_is_identity"] and v["residual"] <= 1e-12
        and v["adjointable"] is False and v["adjoint_witness_t"] == 0.0
        and v["has_v"] and v["v_equals_a"] and v["v_partial_isometry"]
    )
    record(5, ok, f"b = {v['b']} (residual {v['residual']:.1e}), adjointable {v['adjointable']} "
                  f"(witness t = {v.get('adjoint_witness_t')}), v = a {v.get('v_equals_a')}")


def test_criterion_06_strictly_positive():
    r = _scenario("strictly_positive")
    v = r.verdict
    ok = (
        r.passed and v["ker_b_zero"] and v["ker_b_perp_is_E"]
        and not v["Eb_complemented"] and not v["Eb_equals_ker_b_perp"]
    )
    record(6, ok, f"ker b = 0 {v['ker_b_zero']}, (ker b)^perp = E {v['ker_b_perp_is_E']}, "
                  f"E_b complemented {v['Eb_complemented']}, E_b = (ker b)^perp {v['Eb_equals_ker_b_perp']}")


def test_criterion_07_predicates():
    rng = np.random.default_rng(SEED + 7)
    specs = [AlgebraSpec((1,)), AlgebraSpec((2,)), AlgebraSpec((1, 2))]
    agree = isometries = too_big = 0
    for i in range(200):
        spec = specs[i % 3]
        E, F = FreeModule(spec, 2), FreeModule(spec, 3)
        v = random_partial_isometry(rng, E, F)
        adj = try_adjoint(v)
        classical = adj.ok and np.linalg.norm(v.matrix @ adj.adjoint.matrix @ v.matrix - v.matrix, 2) <= 1e-8
        agree += is_partial_isometry(v) == classical
        isometries += is_partial_isometry(random_isometry(rng, E, F))
        # norm strictly above 1 + 1e-9
        scale = 1.0 + 10 ** rng.uniform(-8.5, 0)
        big = ModuleMap(E, F, scale * v.matrix / max(v.norm(), 1e-300)) if v.norm() > 0 else None
        if big is None:
            big = ModuleMap(E, F, scale * random_isometry(rng, E, F).matrix)
        too_big += not is_partial_isometry(big)
    ok = agree == isometries == too_big == 200
    record(7, ok, f"agreement {agree}/200, isometries {isometries}/200, norm > 1 rejected {too_big}/200")


def test_criterion_08_projections():
    rng = np.random.default_rng(SEED + 8)
    specs = [AlgebraSpec((1,)), AlgebraSpec((2,)), AlgebraSpec((1, 2))]
    true_ok = derived_ok = 0
    for i in range(100):
        p = random_orthogonal_projection(rng, FreeModule(specs[i % 3], 3))
        if is_projection_gram(p):
            true_ok += 1
            sa, idem = projection_defects(p)
            derived_ok += sa <= 1e-9 and idem <= 1e-9
    false_ok = sum(
        not is_projection_gram(random_idempotent(rng, FreeModule(specs[i % 3], 2))) for i in range(20)
    )
    ok = true_ok == derived_ok == 100 and false_ok == 20
    record(8, ok, f"projections {true_ok}/100 (derived identities {derived_ok}/100), "
                  f"non-Hermitian idempotents rejected {false_ok}/20")


def test_criterion_09_observation():
    rng = np.random.default_rng(SEED + 9)
    specs = [AlgebraSpec((1,)), AlgebraSpec((2,)), AlgebraSpec((1, 2))]
    good, worst = 0, 0.0
    for i in range(50):
        E = FreeModule(specs[i % 3], 1 + i % 3)
        a = random_operator(rng, E, full_rank=True)
        obs = observation_isometry(a)
        if not hasattr(obs, "w"):
            continue
        defect = gram_defect(obs.w)
        worst = max(worst, defect)
        good += defect <= 1e-8 and obs.adjoint.ok and obs.Ea_complemented and is_complemented(obs.Ea) and obs.ok
    record(9, good == 50, f"{good}/50 surjective operators, max w Gram defect {worst:.1e}")


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "modpolar.cli", *args], capture_output=True, check=False).stdout


def test_criterion_10_determinism():
    runs = {}
    for name, args in (("gallery", ("gallery",)), ("fuzz", ("fuzz", "--seed", "7", "--count", "50"))):
        first = _cli(*args, "--format", "machine")
        second = _cli(*args, "--format", "machine")
        runs[name] = bool(first) and first == second
    record(10, all(runs.values()), ", ".join(f"{k} byte-identical {v}" for k, v in runs.items()))
