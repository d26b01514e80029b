import numpy as np
import pytest
from hypothesis import strategies as st

from modpolar import AlgebraSpec, FreeModule, ModuleMap

ALGEBRAS = [AlgebraSpec((1,)), AlgebraSpec((2,)), AlgebraSpec((1, 2))]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def scalar_map(matrix, dom=None, cod=None):
    """Left multiplication by a complex matrix on (C)^n, or with scalar entries over any B."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    m, n = matrix.shape
    spec = (dom.algebra if isinstance(dom, FreeModule) else None) or AlgebraSpec((1,))
    dom = dom if dom is not None else FreeModule(spec, n)
    cod = cod if cod is not None else FreeModule(spec, m)
    entries = [[spec.scalar(matrix[i, j]) for j in range(n)] for i in range(m)]
    return ModuleMap.left_multiplication(entries, dom, cod)


def seeds():
    return st.integers(min_value=0, max_value=2**32 - 1)


def algebras():
    return st.sampled_from(ALGEBRAS)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
