"""The automata network induced by a dominant set.

A history state ``y`` holds ``y^t_u`` for ``u`` in U and ``0 <= t < ell``;
``y^0`` is the most recent slice. Induced states are integers whose bits are
ordered by vertex (ascending), then by time (ascending), first bit most
significant. For ``|U| = 1`` and ``ell = 2`` the index of ``(y^0, y^1)`` is
``2*b(y^0) + b(y^1)``.

One update prepends ``Phi(y)`` and drops the oldest slice. ``Phi_u`` is
recovered from the history by unfolding the rules of non-dominant vertices
backwards in time until every branch lands on a dominant vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .dominance import _require_dominant, all_path_lengths, chain_of
from .errors import DepthExceeded, ParseError
from .landscape import Landscape, analyze, TransitionDiagram
from .netcore import (
    BooleanNetwork,
    check_enumerable,
    state_of,
    successor_array,
)

MATERIALIZE_BITS = 20
"""Largest local history width (|I_U(u)| * ell) whose rule is tabulated eagerly."""


# ---------------------------------------------------------------------------
# history states


def history_index(slices: Sequence[Sequence[int]], ell: int | None = None) -> int:
    """Index of a history given as ``[y^0, y^1, ...]``, each slice a +-1 tuple over U."""
    slices = [tuple(s) for s in slices]
    if ell is not None and len(slices) != ell:
        raise ValueError(f"expected {ell} slices, got {len(slices)}")
    m = len(slices[0])
    idx = 0
    for i in range(m):
        for t in range(len(slices)):
            s = slices[t][i]
            if s not in (-1, 1):
                raise ValueError(f"history entry {s!r} is not -1 or +1")
            idx = (idx << 1) | (1 if s == 1 else 0)
    return idx


def history_slices(y: int, m: int, ell: int) -> tuple:
    """Inverse of :func:`history_index`: ``(y^0, ..., y^{ell-1})``."""
    return tuple(
        tuple(1 if (y >> _bitpos(i, t, m, ell)) & 1 else -1 for i in range(m)) for t in range(ell)
    )


def _bitpos(i: int, t: int, m: int, ell: int) -> int:
    return m * ell - 1 - (i * ell + t)


def negate_history(y: int, m: int, ell: int) -> int:
    return y ^ ((1 << (m * ell)) - 1)


# ---------------------------------------------------------------------------
# unfolding


def reconstruct_value(net: BooleanNetwork, U: Iterable[int], y, v: int, t: int, ell: int | None = None,
                      memo: dict | None = None) -> int:
    """State of vertex ``v`` at relative time ``t`` implied by the history ``y``.

    ``y`` is a list of slices ``[y^0, ..., y^{ell-1}]`` over U (ascending) or
    an integer index together with ``ell``. Dominant vertices read the
    history; other vertices apply their rule to the values one step older.
    For ``y = h(x)`` the result equals ``F^(ell-1-t)(x)_v``.
    """
    U = tuple(sorted(set(U)))
    if isinstance(y, (int, np.integer)):
        if ell is None:
            raise ValueError("an integer history needs ell")
        slices = history_slices(int(y), len(U), ell)
    else:
        slices = tuple(tuple(s) for s in y)
        ell = len(slices)
    where = {u: i for i, u in enumerate(U)}
    memo = {} if memo is None else memo

    def val(w, s):
        if s >= ell:
            raise DepthExceeded(f"vertex {w} needed at time {s} but the history only has {ell} slices")
        key = (w, s)
        if key not in memo:
            if w in where:
                memo[key] = slices[s][where[w]]
            else:
                rule = net.rule(w)
                memo[key] = rule(*(val(u, s + 1) for u in rule.inputs))
        return memo[key]

    return val(v, t)


def _phi_bits(net: BooleanNetwork, U: frozenset, ell: int, u: int, column) -> np.ndarray:
    """Vectorised Phi_u over a batch; ``column(w, t)`` gives the y^t_w bits."""
    memo = {}

    def val(w, s):
        if s >= ell:
            raise DepthExceeded(f"vertex {w} needed at time {s} but the history only has {ell} slices")
        key = (w, s)
        if key not in memo:
            if w in U:
                memo[key] = column(w, s)
            else:
                rule = net.rule(w)
                memo[key] = rule.table_array[_pack(val(x, s + 1) for x in rule.inputs)]
        return memo[key]

    rule = net.rule(u)
    return rule.table_array[_pack(val(w, 0) for w in rule.inputs)]


def _pack(columns) -> np.ndarray:
    idx = None
    for col in columns:
        col = col.astype(np.int64)
        idx = col if idx is None else (idx << 1) | col
    return idx


# ---------------------------------------------------------------------------
# the induced system


@dataclass(frozen=True)
class InducedAutomata:
    """Induced automata network on a dominant set.

    ``inputs[u]`` is I_U(u), the dominant vertices with a path into ``u``.
    ``tables[u]`` is the local rule Phi_u over the ``len(inputs[u]) * ell``
    history bits of those inputs (vertex-major, time-minor, first bit most
    significant), or None when it is evaluated on demand.
    """

    network: BooleanNetwork = field(repr=False)
    vertices: tuple
    ell: int
    inputs: dict
    tables: dict = field(repr=False, compare=False)

    @property
    def m(self) -> int:
        return len(self.vertices)

    @property
    def bits(self) -> int:
        return self.m * self.ell

    @property
    def size(self) -> int:
        return 1 << self.bits

    def _local_column(self, u):
        ins = self.inputs[u]
        width = len(ins) * self.ell
        where = {w: j for j, w in enumerate(ins)}

        def column(states):
            def col(w, t):
                if w not in where:
                    raise AssertionError(f"Phi_{u} reached vertex {w} outside I_U({u})")
                return (states >> (width - 1 - (where[w] * self.ell + t))) & 1
            return col

        return width, column

    def local_table(self, u: int) -> tuple:
        """Phi_u as a tuple of output bits."""
        if self.tables.get(u) is not None:
            return tuple(int(b) for b in self.tables[u])
        width, column = self._local_column(u)
        check_enumerable(width, f"local rule of vertex {u}")
        states = np.arange(1 << width, dtype=np.int64)
        return tuple(int(b) for b in _phi_bits(self.network, frozenset(self.vertices), self.ell, u, column(states)))

    def _global_column(self, states):
        where = {w: i for i, w in enumerate(self.vertices)}

        def col(w, t):
            return (states >> _bitpos(where[w], t, self.m, self.ell)) & 1

        return col

    def phi_batch(self, states: np.ndarray) -> np.ndarray:
        """Packed Phi(y) over U (vertex order, first most significant) for each state."""
        states = np.asarray(states, dtype=np.int64)
        gcol = self._global_column(states)
        U = frozenset(self.vertices)
        out = np.zeros_like(states)
        for i, u in enumerate(self.vertices):
            table = self.tables.get(u)
            if table is not None:
                bit = table[_pack(gcol(w, t) for w in self.inputs[u] for t in range(self.ell))]
            else:
                bit = _phi_bits(self.network, U, self.ell, u, gcol)
            out |= bit.astype(np.int64) << (self.m - 1 - i)
        return out

    def phi(self, y: int) -> int:
        return int(self.phi_batch(np.array([y]))[0])

    def step_batch(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=np.int64)
        phi = self.phi_batch(states)
        ell, m = self.ell, self.m
        block_mask = (1 << ell) - 1
        out = np.zeros_like(states)
        for i in range(m):
            shift = (m - 1 - i) * ell
            block = (states >> shift) & block_mask
            new_bit = (phi >> (m - 1 - i)) & 1
            out |= ((new_bit << (ell - 1)) | (block >> 1)) << shift
        return out

    def step(self, y: int) -> int:
        if not 0 <= y < self.size:
            raise ValueError(f"history index {y} out of range")
        return int(self.step_batch(np.array([y]))[0])

    def successors(self) -> np.ndarray:
        check_enumerable(self.bits, "induced state space")
        return self.step_batch(np.arange(self.size, dtype=np.int64))

    def with_flipped_entry(self, u: int, index: int) -> "InducedAutomata":
        """Copy with one entry of Phi_u inverted (fault injection)."""
        table = np.array(self.local_table(u), dtype=np.uint8)
        table[index] ^= 1
        return replace(self, tables={**self.tables, u: table})


def build_induced(net: BooleanNetwork, U: Iterable[int]) -> InducedAutomata:
    U = _require_dominant(net.graph, U)
    lengths = all_path_lengths(net.graph, U)
    ell = max(max(ls) for ls in lengths.values())
    vertices = tuple(sorted(U))
    inputs = {u: tuple(sorted(s for (s, t) in lengths if t == u)) for u in vertices}
    automata = InducedAutomata(net, vertices, ell, inputs, {})
    tables = {}
    for u in vertices:
        if len(inputs[u]) * ell <= MATERIALIZE_BITS:
            tables[u] = np.array(automata.local_table(u), dtype=np.uint8)
        else:
            tables[u] = None
    return replace(automata, tables=tables)


# ---------------------------------------------------------------------------
# the map h and the conjugacy checks


def h_map(net: BooleanNetwork, U: Iterable[int], x: int, ell: int | None = None) -> int:
    """History of the dominant vertices along the first ``ell`` steps from ``x``.

    Slice ``t`` is ``F^(ell-1-t)(x)_U``, so the newest state comes first.
    """
    from .netcore import step

    U = tuple(sorted(set(U)))
    if ell is None:
        ell = max(max(ls) for ls in all_path_lengths(net.graph, U).values())
    orbit = [x]
    for _ in range(ell - 1):
        orbit.append(step(net, orbit[-1]))
    slices = [tuple(state_of(orbit[ell - 1 - t], net.n, u) for u in U) for t in range(ell)]
    return history_index(slices, ell)


def h_array(net: BooleanNetwork, U: Iterable[int], ell: int, successors: np.ndarray | None = None) -> np.ndarray:
    """``h`` on every configuration."""
    U = tuple(sorted(set(U)))
    succ = successor_array(net) if successors is None else successors
    m, n = len(U), net.n
    current = np.arange(succ.size, dtype=np.int64)
    out = np.zeros(succ.size, dtype=np.int64)
    for k in range(ell):  # current = F^k(x) fills slice t = ell - 1 - k
        t = ell - 1 - k
        for i, u in enumerate(U):
            out |= ((current >> (n - u)) & 1) << _bitpos(i, t, m, ell)
        current = succ[current]
    return out


@dataclass(frozen=True)
class Conjugacy:
    """Everything needed to compare a network with its induced system."""

    network: BooleanNetwork = field(repr=False)
    automata: InducedAutomata = field(repr=False)
    depth: int
    h: np.ndarray = field(repr=False)
    network_successors: np.ndarray = field(repr=False)
    induced_successors: np.ndarray = field(repr=False)

    @property
    def vertices(self) -> tuple:
        return self.automata.vertices

    @property
    def ell(self) -> int:
        return self.automata.ell

    def network_landscape(self) -> Landscape:
        return analyze(TransitionDiagram(self.network_successors))

    def induced_landscape(self) -> Landscape:
        return analyze(TransitionDiagram(self.induced_successors))


def conjugacy(net: BooleanNetwork, U: Iterable[int], automata: InducedAutomata | None = None) -> Conjugacy:
    check_enumerable(net.n)
    U = _require_dominant(net.graph, U)
    automata = build_induced(net, U) if automata is None else automata
    succ = successor_array(net).astype(np.int64)
    return Conjugacy(
        network=net,
        automata=automata,
        depth=len(chain_of(net.graph, U)) - 1,
        h=h_array(net, U, automata.ell, succ),
        network_successors=succ,
        induced_successors=automata.successors(),
    )


def verify_semiconjugacy(net: BooleanNetwork, U: Iterable[int], automata: InducedAutomata | None = None) -> bool:
    """Whether the induced update commutes with ``h`` on every configuration."""
    check_enumerable(net.n)
    automata = build_induced(net, U) if automata is None else automata
    succ = successor_array(net).astype(np.int64)
    h = h_array(net, automata.vertices, automata.ell, succ)
    return bool(np.array_equal(automata.step_batch(h), h[succ]))


def verify_injective_on_periodics(net: BooleanNetwork, U: Iterable[int]) -> bool:
    check_enumerable(net.n)
    U = _require_dominant(net.graph, U)
    ell = max(max(ls) for ls in all_path_lengths(net.graph, U).values())
    succ = successor_array(net).astype(np.int64)
    periodic = analyze(TransitionDiagram(succ)).periodic
    images = h_array(net, U, ell, succ)[periodic]
    return bool(np.unique(images).size == images.size)


def build_reverse_conjugacy(net: BooleanNetwork, U: Iterable[int], conj: Conjugacy | None = None) -> np.ndarray:
    """An eventual equivalence from the induced system back to the network.

    Returns ``back`` with ``back[y]`` a configuration for every history ``y``.
    Cycle states go to their unique periodic preimage under ``h``. In a basin
    with leaves, ``t0`` is the first time at which every leaf's orbit has
    entered the image of ``h``; each leaf ``b`` gets a preimage ``a`` of
    ``G^t0(b)`` and its orbit is mapped to ``F^(t - t0)(a)``, with the
    exponent taken modulo the period before ``t0`` so that orbits stay in
    phase. States reached from several leaves keep the first assignment.
    """
    conj = conjugacy(net, U) if conj is None else conj
    F, G, h = conj.network_successors, conj.induced_successors, conj.h
    land_f = conj.network_landscape()
    land_g = conj.induced_landscape()

    back = np.full(G.size, -1, dtype=np.int64)
    periodic_x = np.flatnonzero(land_f.periodic)
    back[h[periodic_x]] = periodic_x

    preimage = np.full(G.size, -1, dtype=np.int64)
    order = np.argsort(h, kind="stable")
    first = np.unique(h[order], return_index=True)
    preimage[first[0]] = order[first[1]]  # smallest configuration with that image

    leaves = np.flatnonzero(np.bincount(G, minlength=G.size) == 0)
    # the image of h is forward invariant, so each leaf enters it once and
    # for all; t0 of a basin is the latest entry time among its leaves
    entry = np.zeros(leaves.size, dtype=np.int64)
    cur = leaves.copy()
    outside = preimage[cur] < 0
    while outside.any():
        cur[outside] = G[cur[outside]]
        entry[outside] += 1
        outside = preimage[cur] < 0
    comp = land_g.component[leaves]
    t0_of = np.zeros(land_g.n_attractors, dtype=np.int64)
    np.maximum.at(t0_of, comp, entry)
    t0 = t0_of[comp]
    tips = leaves.copy()
    for k in range(int(t0.max()) if t0.size else 0):
        moving = t0 > k
        tips[moving] = G[tips[moving]]

    for b, tip, c, start in zip(leaves.tolist(), tips.tolist(), comp.tolist(), t0.tolist()):
        period = land_g.basins[c].period
        orbit = [int(preimage[tip])]  # orbit[k] = F^k(a)
        while len(orbit) < period:
            orbit.append(int(F[orbit[-1]]))
        y, t = b, 0
        while back[y] < 0:
            if t < start:
                back[y] = orbit[(t - start) % period]
            else:
                k = t - start
                while len(orbit) <= k:
                    orbit.append(int(F[orbit[-1]]))
                back[y] = orbit[k]
            y, t = int(G[y]), t + 1
    if (back < 0).any():
        raise AssertionError("reverse conjugacy left some induced states unassigned")
    return back


# ---------------------------------------------------------------------------
# file format

_INDUCED_HEADER = "inducednet"


def serialize_induced(automata: InducedAutomata) -> str:
    """``inducednet 1`` document: vertices are the dominant set, tables over history bits."""
    lines = [
        f"{_INDUCED_HEADER} 1",
        f"nodes {automata.m}",
        f"ell {automata.ell}",
        "vertices " + " ".join(str(u) for u in automata.vertices),
    ]
    for u in automata.vertices:
        table = "".join(str(b) for b in automata.local_table(u))
        ins = " ".join(str(w) for w in automata.inputs[u])
        lines.append(f"node {u} in {ins} table {table}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class InducedTables:
    """A parsed ``inducednet`` document; a finite system on its own."""

    vertices: tuple
    ell: int
    inputs: dict
    tables: dict = field(compare=False)

    @property
    def m(self) -> int:
        return len(self.vertices)

    @property
    def bits(self) -> int:
        return self.m * self.ell

    @property
    def size(self) -> int:
        return 1 << self.bits

    def step_batch(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=np.int64)
        m, ell = self.m, self.ell
        where = {w: i for i, w in enumerate(self.vertices)}
        block_mask = (1 << ell) - 1
        out = np.zeros_like(states)
        for i, u in enumerate(self.vertices):
            cols = [(states >> _bitpos(where[w], t, m, ell)) & 1 for w in self.inputs[u] for t in range(ell)]
            bit = self.tables[u][_pack(cols)].astype(np.int64)
            shift = (m - 1 - i) * ell
            out |= ((bit << (ell - 1)) | (((states >> shift) & block_mask) >> 1)) << shift
        return out

    def successors(self) -> np.ndarray:
        check_enumerable(self.bits, "induced state space")
        return self.step_batch(np.arange(self.size, dtype=np.int64))


def parse_induced(text: str) -> InducedTables:
    """Read an ``inducednet 1`` document (see :func:`serialize_induced`)."""
    lines = []
    for i, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].split()
        if body:
            lines.append((i, body))
    if not lines or lines[0][1] != [_INDUCED_HEADER, "1"]:
        raise ParseError(f"expected header '{_INDUCED_HEADER} 1'", lines[0][0] if lines else 1, 1)
    try:
        (ln_n, nodes), (ln_e, ell_line), (ln_v, vert_line) = lines[1], lines[2], lines[3]
    except IndexError:
        raise ParseError("truncated induced network header") from None
    if nodes[0] != "nodes" or len(nodes) != 2 or not nodes[1].isdigit():
        raise ParseError("expected 'nodes <m>'", ln_n, 1)
    if ell_line[0] != "ell" or len(ell_line) != 2 or not ell_line[1].isdigit() or int(ell_line[1]) < 1:
        raise ParseError("expected 'ell <positive int>'", ln_e, 1)
    if vert_line[0] != "vertices" or not all(t.isdigit() for t in vert_line[1:]):
        raise ParseError("expected 'vertices <ids...>'", ln_v, 1)
    m, ell = int(nodes[1]), int(ell_line[1])
    vertices = tuple(int(t) for t in vert_line[1:])
    if len(vertices) != m or list(vertices) != sorted(set(vertices)):
        raise ParseError("vertex list must hold m distinct ascending ids", ln_v, 1)
    inputs, tables = {}, {}
    for ln, toks in lines[4:]:
        if toks[0] != "node" or len(toks) < 5 or toks[2] != "in" or toks[-2] != "table":
            raise ParseError("expected 'node <id> in <inputs...> table <bits>'", ln, 1)
        u = int(toks[1])
        if u not in vertices or u in inputs:
            raise ParseError(f"unknown or duplicate vertex {u}", ln, 1)
        ins = tuple(int(t) for t in toks[3:-2])
        if any(w not in vertices for w in ins) or list(ins) != sorted(set(ins)):
            raise ParseError("inputs must be distinct ascending dominant vertices", ln, 1)
        table = toks[-1]
        if set(table) - {"0", "1"} or len(table) != 1 << (len(ins) * ell):
            raise ParseError(f"table of vertex {u} must have 2^{len(ins) * ell} bits", ln, 1)
        inputs[u] = ins
        tables[u] = np.array([int(c) for c in table], dtype=np.uint8)
    if set(inputs) != set(vertices):
        raise ParseError("missing node line for some vertex")
    return InducedTables(vertices, ell, inputs, tables)
