"""Deterministic generators for the benchmark graph families.

Families: path(n), cycle(n), complete(n), hypercube(d), lattice_box(d, R),
tree(branching, depth), birth_death(n, m_sequence, b_sequence).  All edges
carry weight 1 except birth-death chains, whose edge weights come from the
b sequence.  The Laplacian flavor fixes the measure: ``combinatorial`` sets
m = 1, ``normalized`` sets m(x) = sum_y mu_xy, and ``custom`` takes the
measure from the m sequence (birth-death only).

Birth-death sequences may be given as explicit sequences/callables or as
small expression strings in k, e.g. ``"(k+1)^3"`` or ``"2^k"`` (polynomials
and exponentials; a minimal recursive-descent parser, integer exponents
only).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidSpec
from .graph import WeightedGraph, build_graph

COMBINATORIAL = "combinatorial"
NORMALIZED = "normalized"
CUSTOM = "custom"
FLAVORS = (COMBINATORIAL, NORMALIZED, CUSTOM)

FAMILIES = ("path", "cycle", "complete", "hypercube", "lattice_box", "tree",
            "birth_death")


@dataclass(frozen=True)
class FamilySpec:
    """A graph family plus the Laplacian flavor used to set the measure.

    ``params`` are the integer family parameters (may be empty for
    birth_death, whose size can be chosen by an exhaustion consumer).
    ``m_expr``/``b_expr`` are sequence expressions for birth-death chains.
    """

    family: str
    params: tuple[int, ...] = ()
    flavor: str = COMBINATORIAL
    m_expr: str = "1"
    b_expr: str = "1"

    def with_params(self, *params: int) -> "FamilySpec":
        return FamilySpec(self.family, tuple(params), self.flavor,
                          self.m_expr, self.b_expr)


def parse_family(text: str, flavor: str = COMBINATORIAL,
                 m_expr: str = "1", b_expr: str = "1") -> FamilySpec:
    """Parse ``"name:p1,p2"`` strings such as ``path:10`` or ``lattice_box:2,3``."""
    name, _, rest = text.partition(":")
    name = name.strip()
    if name not in FAMILIES:
        raise InvalidSpec(f"unknown family {name!r}; expected one of {FAMILIES}")
    params = ()
    if rest.strip():
        try:
            params = tuple(int(p) for p in rest.split(","))
        except ValueError:
            raise InvalidSpec(f"family parameters must be integers: {rest!r}") from None
    return FamilySpec(name, params, flavor, m_expr, b_expr)


# ---------------------------------------------------------------------------
# sequence expressions (recursive descent; +, -, *, /, ^ with integer
# exponents, parentheses, the variable k, and float literals)
# ---------------------------------------------------------------------------

def parse_sequence_expr(text: str) -> Callable[[int], float]:
    """Compile an expression in k to a callable, e.g. ``"(k+1)^3"``."""
    tokens = _tokenize(text)
    node, pos = _parse_expr(tokens, 0)
    if pos != len(tokens):
        raise InvalidSpec(f"unexpected token {tokens[pos]!r} in {text!r}")

    def evaluate(k: int) -> float:
        return _eval(node, float(k))

    return evaluate


def _tokenize(text: str) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "+-*/^()k":
            out.append(c)
            i += 1
        elif c.isdigit() or c == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] == "."):
                j += 1
            out.append(text[i:j])
            i = j
        else:
            raise InvalidSpec(f"bad character {c!r} in sequence expression {text!r}")
    if not out:
        raise InvalidSpec("empty sequence expression")
    return out


def _parse_expr(tok, pos):
    node, pos = _parse_term(tok, pos)
    while pos < len(tok) and tok[pos] in "+-":
        op = tok[pos]
        rhs, pos = _parse_term(tok, pos + 1)
        node = (op, node, rhs)
    return node, pos


def _parse_term(tok, pos):
    node, pos = _parse_unary(tok, pos)
    while pos < len(tok) and tok[pos] in "*/":
        op = tok[pos]
        rhs, pos = _parse_unary(tok, pos + 1)
        node = (op, node, rhs)
    return node, pos


def _parse_unary(tok, pos):
    if pos < len(tok) and tok[pos] == "-":
        node, pos = _parse_unary(tok, pos + 1)
        return ("neg", node, None), pos
    return _parse_power(tok, pos)


def _parse_power(tok, pos):
    base, pos = _parse_atom(tok, pos)
    if pos < len(tok) and tok[pos] == "^":
        exponent, pos = _parse_unary(tok, pos + 1)
        return ("^", base, exponent), pos
    return base, pos


def _parse_atom(tok, pos):
    if pos >= len(tok):
        raise InvalidSpec("sequence expression ended unexpectedly")
    t = tok[pos]
    if t == "(":
        node, pos = _parse_expr(tok, pos + 1)
        if pos >= len(tok) or tok[pos] != ")":
            raise InvalidSpec("unbalanced parenthesis in sequence expression")
        return node, pos + 1
    if t == "k":
        return ("k", None, None), pos + 1
    try:
        return ("num", float(t), None), pos + 1
    except ValueError:
        raise InvalidSpec(f"unexpected token {t!r} in sequence expression") from None


def _eval(node, k: float) -> float:
    kind, a, b = node
    if kind == "num":
        return a
    if kind == "k":
        return k
    if kind == "neg":
        return -_eval(a, k)
    x = _eval(a, k)
    if kind == "^":
        e = _eval(b, k)
        if not float(e).is_integer():
            raise InvalidSpec(f"exponent must be an integer, got {e}")
        return float(x ** int(e))
    y = _eval(b, k)
    if kind == "+":
        return x + y
    if kind == "-":
        return x - y
    if kind == "*":
        return x * y
    if kind == "/":
        return x / y
    raise AssertionError(kind)


# ---------------------------------------------------------------------------
# family constructions
# ---------------------------------------------------------------------------

def generate_family(spec: FamilySpec) -> WeightedGraph:
    """Materialize a family spec; identical specs yield identical graphs."""
    if spec.family not in FAMILIES:
        raise InvalidSpec(f"unknown family {spec.family!r}")
    if spec.flavor not in FLAVORS:
        raise InvalidSpec(f"unknown flavor {spec.flavor!r}; expected one of {FLAVORS}")
    if spec.family == "birth_death":
        return _birth_death_from_spec(spec)
    if spec.flavor == CUSTOM:
        raise InvalidSpec("custom flavor is only supported for birth_death")

    builder = {
        "path": _path, "cycle": _cycle, "complete": _complete,
        "hypercube": _hypercube, "lattice_box": _lattice_box, "tree": _tree,
    }[spec.family]
    vertices, edges = builder(*spec.params)
    return _with_flavor(vertices, edges, spec.flavor)


def _with_flavor(vertices: Sequence[str], edges, flavor: str) -> WeightedGraph:
    if flavor == COMBINATORIAL:
        measure = {v: 1.0 for v in vertices}
    else:  # normalized: m(x) = sum_y mu_xy
        measure = {v: 0.0 for v in vertices}
        for u, v, w in edges:
            measure[u] += w
            if v != u:
                measure[v] += w
    return build_graph(vertices, measure, edges)


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidSpec(msg)


def _arity(params, k: int, family: str):
    _need(len(params) == k, f"{family} takes {k} parameter(s), got {params}")
    return params


def _path(*params):
    (n,) = _arity(params, 1, "path")
    _need(n >= 1, f"path needs n >= 1, got {n}")
    vertices = [str(i) for i in range(n)]
    edges = [(str(i), str(i + 1), 1.0) for i in range(n - 1)]
    return vertices, edges


def _cycle(*params):
    (n,) = _arity(params, 1, "cycle")
    _need(n >= 3, f"cycle needs n >= 3, got {n}")
    vertices = [str(i) for i in range(n)]
    edges = [(str(i), str((i + 1) % n), 1.0) for i in range(n)]
    return vertices, edges


def _complete(*params):
    (n,) = _arity(params, 1, "complete")
    _need(n >= 2, f"complete needs n >= 2, got {n}")
    vertices = [str(i) for i in range(n)]
    edges = [(u, v, 1.0) for u, v in combinations(vertices, 2)]
    return vertices, edges


def _hypercube(*params):
    (d,) = _arity(params, 1, "hypercube")
    _need(d >= 1, f"hypercube needs dimension >= 1, got {d}")
    vertices = ["".join(bits) for bits in product("01", repeat=d)]
    edges = []
    for v in vertices:
        for i in range(d):
            flipped = v[:i] + ("1" if v[i] == "0" else "0") + v[i + 1:]
            if v < flipped:
                edges.append((v, flipped, 1.0))
    return vertices, edges


def _lattice_box(*params):
    d, radius = _arity(params, 2, "lattice_box")
    _need(d >= 1, f"lattice_box needs dimension >= 1, got {d}")
    _need(radius >= 1, f"lattice_box needs radius >= 1, got {radius}")
    rng = range(-radius, radius + 1)
    points = list(product(rng, repeat=d))
    name = {p: ",".join(str(c) for c in p) for p in points}
    vertices = [name[p] for p in points]
    edges = []
    for p in points:
        for axis in range(d):
            q = tuple(c + (1 if a == axis else 0) for a, c in enumerate(p))
            if q in name:
                edges.append((name[p], name[q], 1.0))
    return vertices, edges


def _tree(*params):
    branching, depth = _arity(params, 2, "tree")
    _need(branching >= 1, f"tree needs branching >= 1, got {branching}")
    _need(depth >= 0, f"tree needs depth >= 0, got {depth}")
    vertices = ["0"]
    edges = []
    level = ["0"]
    for _ in range(depth):
        nxt = []
        for parent in level:
            for c in range(branching):
                child = f"{parent}.{c}"
                vertices.append(child)
                edges.append((parent, child, 1.0))
                nxt.append(child)
        level = nxt
    return vertices, edges


def _birth_death_from_spec(spec: FamilySpec) -> WeightedGraph:
    _need(len(spec.params) == 1,
          f"birth_death takes 1 parameter (chain length n), got {spec.params}")
    (n,) = spec.params
    m_fn = parse_sequence_expr(spec.m_expr)
    b_fn = parse_sequence_expr(spec.b_expr)
    return birth_death(n, m_fn, b_fn)


def birth_death(n: int, m_seq, b_seq) -> WeightedGraph:
    """The path 0 -- 1 -- ... -- n with measure m(k) and weight mu_{k,k+1} = b_k.

    ``m_seq``/``b_seq`` may be callables of k or indexable sequences; m has
    n+1 entries (k = 0..n) and b has n entries (k = 0..n-1).
    """
    _need(n >= 1, f"birth_death needs n >= 1, got {n}")
    m_vals = _materialize(m_seq, n + 1, "m")
    b_vals = _materialize(b_seq, n, "b")
    vertices = [str(k) for k in range(n + 1)]
    measure = {str(k): m_vals[k] for k in range(n + 1)}
    edges = [(str(k), str(k + 1), b_vals[k]) for k in range(n)]
    return build_graph(vertices, measure, edges)


def _materialize(seq, count: int, label: str) -> np.ndarray:
    if callable(seq):
        vals = np.array([float(seq(k)) for k in range(count)])
    else:
        vals = np.asarray(list(seq), dtype=np.float64)
        _need(vals.shape == (count,),
              f"{label} sequence must have {count} entries, got {vals.shape}")
    _need(bool(np.all(np.isfinite(vals) & (vals > 0))),
          f"{label} sequence must be positive and finite")
    return vals
