"""Scenario files: parsing, validation and emission.

A scenario is a YAML document::

    name: nilpotent
    backend: finite            # or: function
    algebra: [1]               # block sizes of B, or "C[0,1]"
    modules:
      E: {rank: 2}
      S: {in: E, generators: [[1, 0]]}
    operators:
      a: {from: E, to: E, matrix: [[0, 1], [0, 0]]}
    requests:
      - {analysis: polar, operator: a}
    expect:
      a.polar.has_v: true

Complex numbers are written ``re`` or ``re+imi`` (``2i``, ``-i``, ``1e-3-2i``).
On the finite backend a matrix entry is an algebra element: a scalar
(a multiple of the unit), an ``n x n`` matrix when B has one block, or a list
of blocks.  On the function backend an entry is a scalar, a coefficient list
in ascending degree (``[0, 1]`` is ``t``), or ``{sqrt: [...]}`` /
``{abs: [...]}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

import yaml

from .algebra import AlgebraSpec, AlgebraElement
from .function.poly import Abs, Poly, PolyFunction, Sqrt

ANALYSES = ("modularity", "polar", "invariants", "predicates", "observation", "positivity")
BACKENDS = ("finite", "function")
FUNCTION_ALGEBRA = "C[0,1]"

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_REAL = re.compile(rf"[+-]?{_NUM}")
_IMAG = re.compile(rf"([+-]?)({_NUM})?i")
_BOTH = re.compile(rf"([+-]?{_NUM})([+-])({_NUM})?i")


class ParseError(ValueError):
    """Malformed scenario text; carries the field path and source line."""

    def __init__(self, message: str, field: str = "", line: int | None = None) -> None:
        self.field = field
        self.line = line
        where = f"{field}: " if field else ""
        at = f" (line {line})" if line is not None else ""
        super().__init__(f"{where}{message}{at}")


class ShapeError(ParseError):
    """Entries, ranks or generator lengths are inconsistent."""


# ---------------------------------------------------------------- literals


def parse_complex(value: Any, path: str = "", line: int | None = None) -> complex:
    if isinstance(value, bool):
        raise ParseError(f"expected a complex number, got {value!r}", path, line)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        s = value.replace(" ", "")
        if _REAL.fullmatch(s):
            return complex(float(s))
        m = _BOTH.fullmatch(s)
        if m:
            im = float(m.group(3)) if m.group(3) else 1.0
            return complex(float(m.group(1)), -im if m.group(2) == "-" else im)
        m = _IMAG.fullmatch(s)
        if m:
            im = float(m.group(2)) if m.group(2) else 1.0
            return complex(0.0, -im if m.group(1) == "-" else im)
    raise ParseError(f"malformed complex literal {value!r}", path, line)


def format_complex(c: complex) -> float | str:
    """Inverse of :func:`parse_complex`; real numbers stay numeric."""
    c = complex(c)
    if c.imag == 0:
        return float(c.real)
    return f"{c.real!r}{'+' if c.imag >= 0 else '-'}{abs(c.imag)!r}i"


# ---------------------------------------------------------------- model


@dataclass(frozen=True)
class ModuleDecl:
    name: str
    rank: int
    parent: str | None = None
    # generator columns: each a tuple of ``rank`` entries (algebra elements)
    generators: tuple | None = None


@dataclass(frozen=True)
class OperatorDecl:
    name: str
    source: str
    target: str
    # rows of entries; finite entries are tuples of blocks, function entries
    # are PolyFunction values
    matrix: tuple


@dataclass(frozen=True)
class Request:
    analysis: str
    operator: str


@dataclass
class Scenario:
    name: str
    backend: str
    algebra: tuple[int, ...] | str
    modules: tuple[ModuleDecl, ...]
    operators: tuple[OperatorDecl, ...]
    requests: tuple[Request, ...]
    expect: dict = field(default_factory=dict)
    description: str = ""

    @property
    def algebra_spec(self) -> AlgebraSpec:
        if self.backend != "finite":
            raise ValueError("the function backend has no finite algebra")
        return AlgebraSpec(self.algebra)

    def module(self, name: str) -> ModuleDecl:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)

    def operator(self, name: str) -> OperatorDecl:
        for op in self.operators:
            if op.name == name:
                return op
        raise KeyError(name)


# ---------------------------------------------------------------- source lines


def _line_index(node: yaml.Node, path: tuple = (), out: dict | None = None) -> dict:
    """Map from field paths to 1-based source lines."""
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = k.value
            out[path + (key,)] = k.start_mark.line + 1
            _line_index(v, path + (key,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_index(v, path + (i,), out)
    return out


class _Ctx:
    def __init__(self, lines: dict) -> None:
        self.lines = lines

    def line(self, path: tuple) -> int | None:
        while path and path not in self.lines:
            path = path[:-1]
        return self.lines.get(path)

    def fail(self, msg: str, path: tuple, shape: bool = False):
        cls = ShapeError if shape else ParseError
        raise cls(msg, ".".join(str(p) for p in path), self.line(path))

    def complex(self, value, path: tuple) -> complex:
        return parse_complex(value, ".".join(str(p) for p in path), self.line(path))


# ---------------------------------------------------------------- entries


def _parse_matrix_block(ctx: _Ctx, value, n: int, path: tuple) -> tuple:
    if not isinstance(value, list):
        c = ctx.complex(value, path)
        return tuple(tuple(c if i == j else 0j for j in range(n)) for i in range(n))
    if n == 1 and len(value) == 1 and not isinstance(value[0], list):
        return ((ctx.complex(value[0], path + (0,)),),)
    if len(value) != n or not all(isinstance(r, list) and len(r) == n for r in value):
        ctx.fail(f"expected a {n}x{n} matrix", path, shape=True)
    return tuple(
        tuple(ctx.complex(x, path + (i, j)) for j, x in enumerate(row)) for i, row in enumerate(value)
    )


def _parse_algebra_entry(ctx: _Ctx, value, spec: AlgebraSpec, path: tuple) -> tuple:
    dims = spec.block_dims
    if not isinstance(value, list):
        return tuple(_parse_matrix_block(ctx, value, n, path) for n in dims)
    if len(dims) == 1:
        return (_parse_matrix_block(ctx, value, dims[0], path),)
    if len(value) != len(dims):
        ctx.fail(f"expected {len(dims)} blocks", path, shape=True)
    return tuple(_parse_matrix_block(ctx, v, n, path + (k,)) for k, (v, n) in enumerate(zip(value, dims)))


def _emit_algebra_entry(entry: tuple, spec: AlgebraSpec):
    def block(b, n):
        if n == 1:
            return format_complex(b[0][0])
        return [[format_complex(x) for x in row] for row in b]

    dims = spec.block_dims
    if len(dims) == 1:
        return block(entry[0], dims[0])
    return [block(b, n) for b, n in zip(entry, dims)]


def _parse_poly(ctx: _Ctx, value, path: tuple) -> Poly:
    if isinstance(value, list):
        if not value:
            ctx.fail("empty coefficient list", path, shape=True)
        return Poly([ctx.complex(x, path + (i,)) for i, x in enumerate(value)])
    return Poly([ctx.complex(value, path)])


def _parse_function_entry(ctx: _Ctx, value, path: tuple) -> PolyFunction:
    if isinstance(value, dict):
        if len(value) != 1:
            ctx.fail("expected exactly one of 'sqrt', 'abs'", path)
        (kind, arg), = value.items()
        poly = _parse_poly(ctx, arg, path + (kind,))
        if kind == "sqrt":
            if not poly.is_real():
                ctx.fail("sqrt needs a real polynomial", path + (kind,))
            return Sqrt(poly)
        if kind == "abs":
            return Abs(poly)
        ctx.fail(f"unknown function node {kind!r}", path)
    return _parse_poly(ctx, value, path)


def _emit_function_entry(entry: PolyFunction):
    if isinstance(entry, Poly):
        return [format_complex(c) for c in entry.coeffs]
    if isinstance(entry, Sqrt):
        return {"sqrt": [format_complex(c) for c in entry.arg.coeffs]}
    if isinstance(entry, Abs):
        return {"abs": [format_complex(c) for c in entry.arg.coeffs]}
    raise ValueError(f"{entry!r} has no scenario representation")


# ---------------------------------------------------------------- parsing


def _require(ctx: _Ctx, data: dict, key: str, path: tuple):
    if key not in data:
        ctx.fail(f"missing field '{key}'", path + (key,))
    return data[key]


def _name(ctx: _Ctx, value, path: tuple) -> str:
    if not isinstance(value, str) or not value:
        ctx.fail("expected a non-empty name", path)
    return value


def _parse_algebra(ctx: _Ctx, backend: str, value) -> tuple[int, ...] | str:
    path = ("algebra",)
    if backend == "function":
        if value != FUNCTION_ALGEBRA:
            ctx.fail(f"the function backend works over {FUNCTION_ALGEBRA}", path)
        return FUNCTION_ALGEBRA
    if isinstance(value, int) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        ctx.fail("expected a non-empty list of block sizes", path)
    for i, n in enumerate(value):
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            ctx.fail("block sizes must be positive integers", path + (i,))
    return tuple(value)


def _entry_parser(ctx: _Ctx, backend: str, algebra):
    if backend == "function":
        return lambda v, p: _parse_function_entry(ctx, v, p)
    spec = AlgebraSpec(algebra)
    return lambda v, p: _parse_algebra_entry(ctx, v, spec, p)


def _parse_modules(ctx: _Ctx, value, entry) -> tuple[ModuleDecl, ...]:
    if not isinstance(value, dict) or not value:
        ctx.fail("expected a mapping of module declarations", ("modules",))
    out: dict[str, ModuleDecl] = {}
    for name, decl in value.items():
        path = ("modules", name)
        _name(ctx, name, path)
        if not isinstance(decl, dict):
            ctx.fail("expected {rank: n} or {in: parent, generators: [...]}", path)
        if "in" in decl:
            parent = _name(ctx, decl["in"], path + ("in",))
            if parent not in out:
                ctx.fail(f"unknown parent module {parent!r}", path + ("in",))
            if out[parent].parent is not None:
                ctx.fail("submodules are declared inside free modules", path + ("in",))
            rank = out[parent].rank
            gens = _require(ctx, decl, "generators", path)
            if not isinstance(gens, list):
                ctx.fail("expected a list of generators", path + ("generators",))
            cols = []
            for j, g in enumerate(gens):
                gpath = path + ("generators", j)
                if not isinstance(g, list) or len(g) != rank:
                    ctx.fail(f"generator must have {rank} entries", gpath, shape=True)
                cols.append(tuple(entry(x, gpath + (i,)) for i, x in enumerate(g)))
            out[name] = ModuleDecl(name, rank, parent, tuple(cols))
        else:
            rank = _require(ctx, decl, "rank", path)
            if not isinstance(rank, int) or isinstance(rank, bool) or rank < 1:
                ctx.fail("rank must be a positive integer", path + ("rank",))
            out[name] = ModuleDecl(name, rank)
        extra = set(decl) - {"rank", "in", "generators"}
        if extra:
            ctx.fail(f"unknown fields {sorted(extra)}", path)
    return tuple(out.values())


def _parse_operators(ctx: _Ctx, value, modules: dict, entry) -> tuple[OperatorDecl, ...]:
    if not isinstance(value, dict) or not value:
        ctx.fail("expected a mapping of operators", ("operators",))
    out = []
    for name, decl in value.items():
        path = ("operators", name)
        _name(ctx, name, path)
        if not isinstance(decl, dict):
            ctx.fail("expected {from: ..., to: ..., matrix: ...}", path)
        src = _name(ctx, _require(ctx, decl, "from", path), path + ("from",))
        dst = _name(ctx, _require(ctx, decl, "to", path), path + ("to",))
        for key, mod in (("from", src), ("to", dst)):
            if mod not in modules:
                ctx.fail(f"unknown module {mod!r}", path + (key,))
        rows_n, cols_n = modules[dst].rank, modules[src].rank
        mat = _require(ctx, decl, "matrix", path)
        mpath = path + ("matrix",)
        if not isinstance(mat, list) or len(mat) != rows_n:
            ctx.fail(f"expected {rows_n} rows", mpath, shape=True)
        rows = []
        for i, row in enumerate(mat):
            if not isinstance(row, list) or len(row) != cols_n:
                ctx.fail(f"expected {cols_n} entries", mpath + (i,), shape=True)
            rows.append(tuple(entry(x, mpath + (i, j)) for j, x in enumerate(row)))
        extra = set(decl) - {"from", "to", "matrix"}
        if extra:
            ctx.fail(f"unknown fields {sorted(extra)}", path)
        out.append(OperatorDecl(name, src, dst, tuple(rows)))
    return tuple(out)


def _parse_requests(ctx: _Ctx, value, operators: dict) -> tuple[Request, ...]:
    if not isinstance(value, list):
        ctx.fail("expected a list of requests", ("requests",))
    out = []
    for i, req in enumerate(value):
        path = ("requests", i)
        if not isinstance(req, dict):
            ctx.fail("expected {analysis: ..., operator: ...}", path)
        kind = _require(ctx, req, "analysis", path)
        if kind not in ANALYSES:
            ctx.fail(f"unknown analysis {kind!r}; expected one of {', '.join(ANALYSES)}", path + ("analysis",))
        op = _name(ctx, _require(ctx, req, "operator", path), path + ("operator",))
        if op not in operators:
            ctx.fail(f"unknown operator {op!r}", path + ("operator",))
        out.append(Request(kind, op))
    return tuple(out)


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text."""
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(f"invalid YAML: {getattr(exc, 'problem', exc)}", "",
                         mark.line + 1 if mark else None) from None
    ctx = _Ctx(_line_index(node) if node is not None else {})
    if not isinstance(data, dict):
        ctx.fail("a scenario is a mapping", ())
    extra = set(data) - {"name", "backend", "algebra", "modules", "operators", "requests", "expect", "description"}
    if extra:
        ctx.fail(f"unknown fields {sorted(extra)}", ())
    name = _name(ctx, _require(ctx, data, "name", ()), ("name",))
    backend = _require(ctx, data, "backend", ())
    if backend not in BACKENDS:
        ctx.fail(f"backend must be one of {', '.join(BACKENDS)}", ("backend",))
    algebra = _parse_algebra(ctx, backend, _require(ctx, data, "algebra", ()))
    entry = _entry_parser(ctx, backend, algebra)
    modules = _parse_modules(ctx, _require(ctx, data, "modules", ()), entry)
    by_name = {m.name: m for m in modules}
    operators = _parse_operators(ctx, _require(ctx, data, "operators", ()), by_name, entry)
    requests = _parse_requests(ctx, data.get("requests", []), {op.name: op for op in operators})
    expect = data.get("expect", {}) or {}
    if not isinstance(expect, dict):
        ctx.fail("expected a mapping 'operator.analysis.key: value'", ("expect",))
    for key in expect:
        parts = str(key).split(".")
        if len(parts) != 3 or parts[0] not in {op.name for op in operators} or parts[1] not in ANALYSES:
            ctx.fail("expectation keys are 'operator.analysis.key'", ("expect", key))
    description = data.get("description", "") or ""
    if not isinstance(description, str):
        ctx.fail("expected a string", ("description",))
    return Scenario(name, backend, algebra, modules, operators, requests, dict(expect), description)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------- emission


def scenario_to_dict(s: Scenario) -> dict:
    if s.backend == "function":
        emit = _emit_function_entry
    else:
        spec = s.algebra_spec
        emit = lambda e: _emit_algebra_entry(e, spec)  # noqa: E731
    modules = {}
    for m in s.modules:
        if m.parent is None:
            modules[m.name] = {"rank": m.rank}
        else:
            modules[m.name] = {"in": m.parent, "generators": [[emit(x) for x in g] for g in m.generators]}
    out = {
        "name": s.name,
        "backend": s.backend,
        "algebra": s.algebra if isinstance(s.algebra, str) else list(s.algebra),
        "modules": modules,
        "operators": {
            op.name: {"from": op.source, "to": op.target, "matrix": [[emit(x) for x in row] for row in op.matrix]}
            for op in s.operators
        },
        "requests": [{"analysis": r.analysis, "operator": r.operator} for r in s.requests],
    }
    if s.expect:
        out["expect"] = dict(s.expect)
    if s.description:
        out["description"] = s.description
    return out


def emit_scenario(s: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False, default_flow_style=None)


def algebra_element(entry: tuple, spec: AlgebraSpec) -> AlgebraElement:
    return spec.element([list(map(list, b)) for b in entry])


__all__ = [
    "ANALYSES",
    "BACKENDS",
    "FUNCTION_ALGEBRA",
    "ParseError",
    "ShapeError",
    "parse_complex",
    "format_complex",
    "ModuleDecl",
    "OperatorDecl",
    "Request",
    "Scenario",
    "parse_scenario",
    "load_scenario",
    "scenario_to_dict",
    "emit_scenario",
    "algebra_element",
]
