"""Boolean networks over the states {-1, +1}.

Configurations are plain integers. Bit 1 stands for +1 and bit 0 for -1, and
vertex 1 is the most significant bit, so the configuration index is
``sum(b_v * 2**(n - v))``. Truth tables use the same convention on the
inputs of a rule: the entry for input states ``(s_1, ..., s_k)`` sits at
index ``sum(b_i * 2**(k - i))``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import NetworkError, ParseError, SizeLimit

MAX_ENUMERABLE = 24
"""Largest vertex count for which exhaustive state-space work is allowed."""


def check_enumerable(bits: int, what: str = "state space") -> None:
    if bits > MAX_ENUMERABLE:
        raise SizeLimit(f"{what} has 2^{bits} states; exhaustive enumeration is limited to 2^{MAX_ENUMERABLE}")


def index_dtype(bits: int):
    return np.int32 if bits <= 30 else np.int64


# ---------------------------------------------------------------------------
# graphs and rules


@dataclass(frozen=True)
class DirectedGraph:
    """Directed graph on the vertices ``1..n``; every vertex needs an input."""

    n: int
    arcs: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise NetworkError("a graph needs at least one vertex")
        arcs = frozenset((int(u), int(v)) for u, v in self.arcs)
        for u, v in arcs:
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise NetworkError(f"arc ({u},{v}) leaves the vertex range 1..{self.n}")
        object.__setattr__(self, "arcs", arcs)
        for v in self.vertices:
            if not self.inputs(v):
                raise NetworkError(f"empty input set for vertex {v}")

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def _inputs(self) -> dict:
        ins = {v: [] for v in self.vertices}
        for u, v in self.arcs:
            ins[v].append(u)
        return {v: tuple(sorted(us)) for v, us in ins.items()}

    @cached_property
    def _outputs(self) -> dict:
        outs = {v: [] for v in self.vertices}
        for u, v in self.arcs:
            outs[u].append(v)
        return {v: tuple(sorted(ws)) for v, ws in outs.items()}

    def inputs(self, v: int) -> tuple:
        """I(v), ascending."""
        return self._inputs[v]

    def outputs(self, v: int) -> tuple:
        return self._outputs[v]

    def inputs_of_set(self, vertices: Iterable[int]) -> frozenset:
        return frozenset(u for v in vertices for u in self._inputs[v])


def _to_bits(table) -> tuple:
    if isinstance(table, str):
        if set(table) - {"0", "1"}:
            raise NetworkError(f"truth table {table!r} must use only the characters 0 and 1")
        return tuple(int(c) for c in table)
    bits = []
    for b in table:
        b = int(b)
        if b == -1:
            b = 0
        if b not in (0, 1):
            raise NetworkError(f"truth table entries must be bits or states, got {b}")
        bits.append(b)
    return tuple(bits)


@dataclass(frozen=True)
class LocalRule:
    """Truth table of one vertex. ``table[i]`` is the output bit (1 means +1)."""

    inputs: tuple
    table: tuple

    def __post_init__(self):
        inputs = tuple(int(u) for u in self.inputs)
        table = _to_bits(self.table)
        if not inputs:
            raise NetworkError("empty input set")
        if len(set(inputs)) != len(inputs):
            raise NetworkError(f"repeated input in {inputs}")
        if len(table) != 1 << len(inputs):
            raise NetworkError(
                f"table length {len(table)} does not match 2^{len(inputs)} for {len(inputs)} inputs"
            )
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "table", table)

    @property
    def arity(self) -> int:
        return len(self.inputs)

    @classmethod
    def from_function(cls, inputs: Sequence[int], fn: Callable[..., int]) -> "LocalRule":
        """Tabulate ``fn(s_1, ..., s_k) -> +-1`` over all input states."""
        table = []
        for bits in itertools.product((0, 1), repeat=len(inputs)):
            out = fn(*(1 if b else -1 for b in bits))
            if out not in (-1, 1):
                raise NetworkError(f"rule returned {out!r}, expected -1 or +1")
            table.append(1 if out == 1 else 0)
        return cls(tuple(inputs), tuple(table))

    def __call__(self, *states: int) -> int:
        return 1 if self.table[states_to_index(states)] else -1

    def reordered(self, new_inputs: Sequence[int]) -> "LocalRule":
        """Same function with its inputs listed in another order."""
        new_inputs = tuple(new_inputs)
        if sorted(new_inputs) != sorted(self.inputs):
            raise NetworkError("reordering must permute the existing inputs")
        k = len(new_inputs)
        pos = [self.inputs.index(u) for u in new_inputs]
        table = []
        for idx in range(1 << k):
            old = 0
            for j in range(k):
                if (idx >> (k - 1 - j)) & 1:
                    old |= 1 << (k - 1 - pos[j])
            table.append(self.table[old])
        return LocalRule(new_inputs, tuple(table))

    def table_string(self) -> str:
        return "".join("1" if b else "0" for b in self.table)

    @cached_property
    def table_array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.uint8)


def identity_rule(u: int) -> LocalRule:
    return LocalRule((u,), (0, 1))


def negation_rule(u: int) -> LocalRule:
    return LocalRule((u,), (1, 0))


def constant_rule(inputs: Sequence[int], value: int) -> LocalRule:
    bit = 1 if value == 1 else 0
    return LocalRule(tuple(inputs), (bit,) * (1 << len(inputs)))


def signed_majority_rule(v: int, signs: Mapping[int, int]) -> LocalRule:
    """``Sign(sum_u sign[u] * x_u | x_v)``; a tie keeps the current state of ``v``.

    ``signs`` maps each regulator ``u`` to the sign of the arc ``(u, v)``.
    When a tie is possible (even in-degree) the rule also reads ``x_v``; if
    ``v`` is not already a regulator it is appended as an extra input.
    """
    regulators = sorted(signs)
    needs_self = len(regulators) % 2 == 0 and v not in signs
    inputs = sorted(set(regulators) | ({v} if needs_self else set()))

    def fn(*states):
        x = dict(zip(inputs, states))
        total = sum(signs[u] * x[u] for u in regulators)
        if total > 0:
            return 1
        if total < 0:
            return -1
        return x[v]

    return LocalRule.from_function(inputs, fn)


# ---------------------------------------------------------------------------
# networks


@dataclass(frozen=True)
class BooleanNetwork:
    """A graph together with one truth table per vertex.

    ``rules[v - 1]`` is the rule of vertex ``v``; its inputs are exactly
    I(v) in ascending order.
    """

    graph: DirectedGraph
    rules: tuple = field(repr=False)

    def __post_init__(self):
        rules = tuple(self.rules)
        object.__setattr__(self, "rules", rules)
        if len(rules) != self.graph.n:
            raise NetworkError(f"expected {self.graph.n} rules, got {len(rules)}")
        for v, rule in zip(self.graph.vertices, rules):
            if rule.inputs != self.graph.inputs(v):
                raise NetworkError(
                    f"rule inputs {rule.inputs} of vertex {v} differ from I({v}) = {self.graph.inputs(v)}"
                )

    @classmethod
    def from_rules(cls, rules: Mapping[int, LocalRule] | Sequence[LocalRule]) -> "BooleanNetwork":
        """Build the graph from the rules' input lists (inputs are re-sorted)."""
        if isinstance(rules, Mapping):
            n = len(rules)
            if sorted(rules) != list(range(1, n + 1)):
                raise NetworkError(f"vertices must be exactly 1..{n}")
            ordered = [rules[v] for v in range(1, n + 1)]
        else:
            ordered = list(rules)
            n = len(ordered)
        arcs = set()
        canonical = []
        for v, rule in enumerate(ordered, start=1):
            for u in rule.inputs:
                arcs.add((u, v))
            canonical.append(rule.reordered(sorted(rule.inputs)))
        return cls(DirectedGraph(n, frozenset(arcs)), tuple(canonical))

    @property
    def n(self) -> int:
        return self.graph.n

    def rule(self, v: int) -> LocalRule:
        return self.rules[v - 1]

    @cached_property
    def _shifts(self) -> tuple:
        n = self.n
        return tuple(tuple(n - u for u in r.inputs) for r in self.rules)


def states_to_index(states: Sequence[int]) -> int:
    idx = 0
    for s in states:
        idx = (idx << 1) | (1 if s == 1 else 0)
    return idx


def encode(states: Sequence[int]) -> int:
    """Configuration index of a +-1 vector (vertex 1 first)."""
    for s in states:
        if s not in (-1, 1):
            raise NetworkError(f"state {s!r} is not -1 or +1")
    return states_to_index(states)


def decode(x: int, n: int) -> tuple:
    """+-1 vector of a configuration index."""
    return tuple(1 if (x >> (n - v)) & 1 else -1 for v in range(1, n + 1))


def state_of(x: int, n: int, v: int) -> int:
    return 1 if (x >> (n - v)) & 1 else -1


def restrict(x: int, n: int, vertices: Iterable[int]) -> tuple:
    """x_U as a +-1 tuple in the order the vertices are given."""
    return tuple(state_of(x, n, v) for v in vertices)


def negate(x: int, n: int) -> int:
    return x ^ ((1 << n) - 1)


def step(net: BooleanNetwork, x: int) -> int:
    """F(x): synchronous update of every vertex."""
    n = net.n
    if not 0 <= x < (1 << n):
        raise NetworkError(f"configuration {x} out of range for {n} vertices")
    out = 0
    for v, rule, shifts in zip(net.graph.vertices, net.rules, net._shifts):
        idx = 0
        for s in shifts:
            idx = (idx << 1) | ((x >> s) & 1)
        if rule.table[idx]:
            out |= 1 << (n - v)
    return out


def iterate(net: BooleanNetwork, x: int, t: int) -> int:
    """F^t(x)."""
    if t < 0:
        raise ValueError("iteration count must be non-negative")
    for _ in range(t):
        x = step(net, x)
    return x


def step_batch(net: BooleanNetwork, states: np.ndarray) -> np.ndarray:
    """Vectorised F over an array of configuration indices."""
    n = net.n
    if n > 62:
        raise SizeLimit("batch stepping supports at most 62 vertices")
    dtype = index_dtype(n)
    states = np.asarray(states, dtype=dtype)
    out = np.zeros_like(states)
    for v, rule, shifts in zip(net.graph.vertices, net.rules, net._shifts):
        idx = np.zeros_like(states)
        for s in shifts:
            idx = (idx << 1) | ((states >> s) & 1)
        out |= rule.table_array[idx].astype(dtype) << (n - v)
    return out


def successor_array(net: BooleanNetwork) -> np.ndarray:
    """F evaluated on every configuration, indexed by configuration."""
    check_enumerable(net.n)
    return step_batch(net, np.arange(1 << net.n, dtype=index_dtype(net.n)))


def random_network(n: int, rng: np.random.Generator, max_indegree: int = 3) -> BooleanNetwork:
    """Random network: each vertex draws 1..max_indegree distinct inputs
    (self-loops allowed) and a uniformly random truth table."""
    if n < 1:
        raise NetworkError("a network needs at least one vertex")
    rules = []
    for _ in range(n):
        k = int(rng.integers(1, min(max_indegree, n) + 1))
        inputs = sorted(int(u) + 1 for u in rng.choice(n, size=k, replace=False))
        rules.append(LocalRule(tuple(inputs), tuple(int(b) for b in rng.integers(0, 2, size=1 << k))))
    return BooleanNetwork.from_rules(rules)


# ---------------------------------------------------------------------------
# on-disk format

_HEADER = "boolnet"
_INT = re.compile(r"[0-9]+\Z")


def _tokens(line: str):
    """Whitespace tokens with their 1-based columns; '#' starts a comment."""
    cut = line.find("#")
    if cut >= 0:
        line = line[:cut]
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _int(tok, lineno, what):
    text, col = tok
    if not _INT.match(text):
        raise ParseError(f"expected {what}, got {text!r}", lineno, col)
    return int(text)


def parse_document(text: str, header: str = _HEADER):
    """Parse a network document into ``(n, rules, signs)``.

    ``rules`` maps vertex to a LocalRule with inputs as written; ``signs``
    maps arcs to +-1 from optional trailing ``sign`` lines.
    """
    lines = [(i, _tokens(raw)) for i, raw in enumerate(text.splitlines(), start=1)]
    lines = [(i, toks) for i, toks in lines if toks]
    if not lines:
        raise ParseError("empty document", 1, 1)
    it = iter(lines)

    lineno, toks = next(it)
    if [t for t, _ in toks] != [header, "1"]:
        raise ParseError(f"expected header '{header} 1'", lineno, toks[0][1])

    try:
        lineno, toks = next(it)
    except StopIteration:
        raise ParseError("missing 'nodes <n>' line", lineno + 1, 1) from None
    if toks[0][0] != "nodes" or len(toks) != 2:
        raise ParseError("expected 'nodes <n>'", lineno, toks[0][1])
    n = _int(toks[1], lineno, "a vertex count")
    if n < 1:
        raise ParseError("vertex count must be positive", lineno, toks[1][1])

    rules = {}
    signs = {}
    for lineno, toks in it:
        keyword, col = toks[0]
        if keyword == "node":
            if signs:
                raise ParseError("node line after sign lines", lineno, col)
            vertex, rule = _parse_node(toks, lineno, n)
            if vertex in rules:
                raise ParseError(f"duplicate vertex {vertex}", lineno, toks[1][1])
            rules[vertex] = rule
        elif keyword == "sign":
            if len(toks) != 4:
                raise ParseError("expected 'sign <u> <v> <+1|-1>'", lineno, col)
            u = _int(toks[1], lineno, "a vertex id")
            v = _int(toks[2], lineno, "a vertex id")
            if toks[3][0] not in ("+1", "-1"):
                raise ParseError(f"sign must be +1 or -1, got {toks[3][0]!r}", lineno, toks[3][1])
            if (u, v) in signs:
                raise ParseError(f"duplicate sign for arc ({u},{v})", lineno, col)
            signs[(u, v)] = 1 if toks[3][0] == "+1" else -1
        else:
            raise ParseError(f"unexpected token {keyword!r}", lineno, col)

    missing = [v for v in range(1, n + 1) if v not in rules]
    if missing:
        raise ParseError(f"no node line for vertex {missing[0]}", lines[-1][0] + 1, 1)
    return n, rules, signs


def _parse_node(toks, lineno, n):
    words = [t for t, _ in toks]
    if len(toks) < 3 or words[2] != "in" or "table" not in words[3:]:
        raise ParseError("expected 'node <id> in <inputs...> table <bits>'", lineno, toks[0][1])
    vertex = _int(toks[1], lineno, "a vertex id")
    if not 1 <= vertex <= n:
        raise ParseError(f"vertex {vertex} outside 1..{n}", lineno, toks[1][1])
    cut = words.index("table", 3)
    if cut == 3:
        raise ParseError("empty input set", lineno, toks[cut][1])
    if len(toks) != cut + 2:
        col = toks[cut + 2][1] if len(toks) > cut + 2 else toks[cut][1]
        raise ParseError("expected exactly one table after 'table'", lineno, col)
    inputs = []
    for tok in toks[3:cut]:
        u = _int(tok, lineno, "an input vertex id")
        if not 1 <= u <= n:
            raise ParseError(f"input {u} outside 1..{n}", lineno, tok[1])
        if u in inputs:
            raise ParseError(f"repeated input {u}", lineno, tok[1])
        inputs.append(u)
    table, tcol = toks[cut + 1]
    if set(table) - {"0", "1"}:
        raise ParseError(f"table must be a string over {{0,1}}, got {table!r}", lineno, tcol)
    if len(table) != 1 << len(inputs):
        raise ParseError(
            f"table length mismatch: {len(table)} characters for {len(inputs)} inputs (need {1 << len(inputs)})",
            lineno,
            tcol,
        )
    return vertex, LocalRule(tuple(inputs), table)


def parse_network(text: str) -> BooleanNetwork:
    """Read a ``boolnet 1`` document. Inputs are canonicalised to ascending order.

    Trailing ``sign`` lines (clover annotations) are validated against the
    arcs and otherwise ignored; use :func:`bnreduce.clover.parse_clover` to
    keep them.
    """
    return _network_and_signs(text)[0]


def _network_and_signs(text: str):
    n, rules, signs = parse_document(text)
    net = BooleanNetwork.from_rules(rules)
    for arc in signs:
        if arc not in net.graph.arcs:
            raise ParseError(f"sign given for missing arc {arc}")
    return net, signs


def serialize_network(net: BooleanNetwork, signs: Mapping | None = None) -> str:
    lines = [f"{_HEADER} 1", f"nodes {net.n}"]
    for v, rule in zip(net.graph.vertices, net.rules):
        ins = " ".join(str(u) for u in rule.inputs)
        lines.append(f"node {v} in {ins} table {rule.table_string()}")
    if signs:
        for (u, v) in sorted(signs):
            lines.append(f"sign {u} {v} {'+1' if signs[(u, v)] == 1 else '-1'}")
    return "\n".join(lines) + "\n"
