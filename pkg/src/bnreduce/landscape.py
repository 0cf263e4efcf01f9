"""Transition diagrams of finite maps and their attractor landscapes.

A diagram is a successor array over the states ``0..N-1``. Each connected
component holds exactly one cycle; the landscape lists, per component, the
cycle length (period), the basin size and the mean and maximal distance of
its states to the cycle (transients).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import MismatchedSystems, SizeLimit
from .netcore import (
    MAX_ENUMERABLE,
    BooleanNetwork,
    LocalRule,
    identity_rule,
    successor_array,
)


@dataclass(frozen=True)
class TransitionDiagram:
    successor: np.ndarray = field(repr=False)

    def __post_init__(self):
        succ = np.ascontiguousarray(self.successor, dtype=np.int64)
        if succ.ndim != 1:
            raise ValueError("successor array must be one-dimensional")
        if succ.size and (succ.min() < 0 or succ.max() >= succ.size):
            raise ValueError("successor array points outside the state range")
        object.__setattr__(self, "successor", succ)

    @property
    def size(self) -> int:
        return int(self.successor.size)


def transition_diagram(system, size: int | None = None) -> TransitionDiagram:
    """Evaluate a finite map on every state.

    ``system`` may be a BooleanNetwork, any object with a ``successors()``
    method (e.g. an induced automata network), a ready successor array, or a
    vectorised callable on state arrays together with ``size``.
    """
    if isinstance(system, BooleanNetwork):
        return TransitionDiagram(successor_array(system))
    if hasattr(system, "successors"):
        return TransitionDiagram(system.successors())
    if callable(system):
        if size is None:
            raise ValueError("a callable system needs an explicit size")
        if size > 1 << MAX_ENUMERABLE:
            raise SizeLimit(f"{size} states exceed the enumeration limit 2^{MAX_ENUMERABLE}")
        return TransitionDiagram(np.asarray(system(np.arange(size, dtype=np.int64))))
    arr = np.asarray(system)
    if arr.size > 1 << MAX_ENUMERABLE:
        raise SizeLimit(f"{arr.size} states exceed the enumeration limit 2^{MAX_ENUMERABLE}")
    return TransitionDiagram(arr)


@dataclass(frozen=True)
class BasinRecord:
    component: int
    period: int
    basin_size: int
    transient_sum: int
    max_transient: int
    cycle_states: tuple = field(repr=False)

    @property
    def mean_transient(self) -> Fraction:
        return Fraction(self.transient_sum, self.basin_size)


@dataclass(frozen=True)
class Landscape:
    """Basins of a diagram plus the per-state arrays they were derived from.

    ``component[x]`` is the basin index of state ``x`` (basins are numbered
    by their smallest cycle state), ``transient[x]`` its distance to the
    cycle and ``periodic[x]`` whether it lies on a cycle.
    """

    basins: tuple
    component: np.ndarray = field(repr=False)
    transient: np.ndarray = field(repr=False)
    periodic: np.ndarray = field(repr=False)

    @property
    def n_attractors(self) -> int:
        return len(self.basins)

    @property
    def size(self) -> int:
        return int(self.component.size)

    def periods(self) -> Counter:
        return Counter(b.period for b in self.basins)

    def period_array(self) -> np.ndarray:
        return np.array([b.period for b in self.basins], dtype=np.int64)[self.component]

    def basin_size_array(self) -> np.ndarray:
        return np.array([b.basin_size for b in self.basins], dtype=np.int64)[self.component]

    def mean_period(self) -> Fraction:
        return Fraction(sum(b.period for b in self.basins), len(self.basins))

    def to_csv(self) -> str:
        rows = ["component,period,basin_size,mean_transient,max_transient"]
        for b in self.basins:
            rows.append(
                f"{b.component},{b.period},{b.basin_size},{_decimal(b.mean_transient)},{b.max_transient}"
            )
        return "\n".join(rows) + "\n"

    def to_text(self) -> str:
        lines = [f"states: {self.size}", f"attractors: {self.n_attractors}"]
        for b in self.basins:
            lines.append(
                f"basin {b.component}: period {b.period}, size {b.basin_size}, "
                f"mean transient {_decimal(b.mean_transient)}, max transient {b.max_transient}"
            )
        return "\n".join(lines) + "\n"


def _decimal(value: Fraction, places: int = 6) -> str:
    return f"{float(value):.{places}f}"


def _peel(succ: np.ndarray):
    """Remove in-degree-zero states layer by layer; return layers and cycle mask."""
    n = succ.size
    indeg = np.bincount(succ, minlength=n)
    alive = np.ones(n, dtype=bool)
    layers = []
    frontier = np.flatnonzero(indeg == 0)
    while frontier.size:
        layers.append(frontier)
        alive[frontier] = False
        targets, counts = np.unique(succ[frontier], return_counts=True)
        indeg[targets] -= counts
        frontier = targets[(indeg[targets] == 0) & alive[targets]]
    return layers, alive


def _cycle_roots(succ: np.ndarray, cyc: np.ndarray) -> np.ndarray:
    """Smallest state of the cycle through each cycle state (pointer doubling)."""
    pos = np.full(succ.size, -1, dtype=np.int64)
    pos[cyc] = np.arange(cyc.size)
    jump = pos[succ[cyc]]
    label = cyc.copy()
    span = 1
    while span < cyc.size:
        label = np.minimum(label, label[jump])
        jump = jump[jump]
        span *= 2
    return label


def analyze(diagram: TransitionDiagram) -> Landscape:
    succ = diagram.successor
    n = succ.size
    layers, periodic = _peel(succ)
    cyc = np.flatnonzero(periodic)

    root = np.empty(n, dtype=np.int64)
    root[cyc] = _cycle_roots(succ, cyc)
    transient = np.zeros(n, dtype=np.int64)
    for layer in reversed(layers):
        nxt = succ[layer]
        transient[layer] = transient[nxt] + 1
        root[layer] = root[nxt]

    roots = np.unique(root[cyc])
    component = np.searchsorted(roots, root)
    k = roots.size
    sizes = np.bincount(component, minlength=k)
    periods = np.bincount(component[cyc], minlength=k)
    tsum = np.zeros(k, dtype=np.int64)
    np.add.at(tsum, component, transient)
    tmax = np.zeros(k, dtype=np.int64)
    np.maximum.at(tmax, component, transient)

    basins = []
    for c, r in enumerate(roots.tolist()):
        states = [r]
        x = int(succ[r])
        while x != r:
            states.append(x)
            x = int(succ[x])
        basins.append(
            BasinRecord(
                component=c,
                period=int(periods[c]),
                basin_size=int(sizes[c]),
                transient_sum=int(tsum[c]),
                max_transient=int(tmax[c]),
                cycle_states=tuple(states),
            )
        )
    return Landscape(tuple(basins), component, transient, periodic)


def landscape_of(system) -> Landscape:
    return analyze(transition_diagram(system))


# ---------------------------------------------------------------------------
# bounds linking a network to its induced system


@dataclass(frozen=True)
class BoundCheck:
    clause: str
    observed: object
    bound: object
    relation: str
    satisfied: bool


@dataclass(frozen=True)
class BoundsReport:
    checks: tuple
    per_period: tuple  # (P, |Per_P(F)|, |Per_P(induced)|, 2^(P|U|))

    @property
    def all_satisfied(self) -> bool:
        return all(c.satisfied for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.satisfied]

    def __getitem__(self, clause: str) -> BoundCheck:
        for c in self.checks:
            if c.clause == clause:
                return c
        raise KeyError(clause)

    def to_csv(self) -> str:
        rows = ["clause,observed,bound,satisfied"]
        for c in self.checks:
            rows.append(f"{c.clause},{_render(c.observed)},{_render(c.bound)},{str(c.satisfied).lower()}")
        return "\n".join(rows) + "\n"

    def to_text(self) -> str:
        width = max(len(c.clause) for c in self.checks)
        lines = []
        for c in self.checks:
            mark = "ok" if c.satisfied else "VIOLATED"
            lines.append(f"{c.clause:<{width}}  {_render(c.observed)} {c.relation} {_render(c.bound)}  {mark}")
        return "\n".join(lines) + "\n"


def _render(value) -> str:
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else _decimal(value)
    return str(value)


def _relation_holds(observed, relation, bound) -> bool:
    if relation == "<=":
        return observed <= bound
    if relation == ">=":
        return observed >= bound
    return observed == bound


def _check(clause, observed, relation, bound) -> BoundCheck:
    return BoundCheck(clause, observed, bound, relation, bool(_relation_holds(observed, relation, bound)))


def check_bounds(
    network: Landscape,
    induced: Landscape,
    h: np.ndarray,
    dominant_size: int,
    depth: int,
    recurrence_length: int,
) -> BoundsReport:
    """Evaluate the landscape inequalities between a network and its induced system.

    ``h[x]`` is the induced state paired with configuration ``x``. Besides
    the five inequalities, the report checks that both systems have the same
    number of attractors and the same multiset of periods.
    """
    h = np.asarray(h, dtype=np.int64)
    nF = network.size
    if h.shape != (nF,):
        raise MismatchedSystems(f"expected {nF} conjugacy pairs, got {h.size}")
    if h.size and (h.min() < 0 or h.max() >= induced.size):
        raise MismatchedSystems("conjugacy pairs point outside the induced state space")
    if not induced.periodic[h[network.periodic]].all():
        raise MismatchedSystems("a periodic configuration is paired with a transient induced state")
    n = nF.bit_length() - 1
    if nF != 1 << n:
        raise MismatchedSystems("network landscape size is not a power of two")
    m = dominant_size

    checks = []

    per_period = []
    fper = network.period_array()[network.periodic]
    iper = induced.period_array()[induced.periodic]
    p_max = max(b.period for b in network.basins)
    worst = None
    for P in range(1, p_max + 1):
        count_f = int(np.count_nonzero(P % fper == 0))
        count_i = int(np.count_nonzero(P % iper == 0))
        bound = 2 ** (P * m)
        per_period.append((P, count_f, count_i, bound))
        ratio = Fraction(count_f, bound)
        if worst is None or ratio > worst[0]:
            worst = (ratio, count_f, bound)
    checks.append(_check("a", worst[1], "<=", worst[2]))
    checks.append(_check("b", p_max, "<=", 2 ** (recurrence_length * m)))
    n_bound = sum(Fraction(2 ** (P * m), P) for P in range(1, p_max + 1))
    checks.append(_check("c", network.n_attractors, "<=", n_bound))

    diff = network.transient - induced.transient[h]
    checks.append(_check("d.lower", int(diff.min()), ">=", 0))
    checks.append(_check("d.upper", int(diff.max()), "<=", depth))

    # basin sizes per network component, against the full induced basin and
    # against the image h(C_F), a subset of it that is proper whenever the
    # induced basin contains histories no configuration produces
    size_f = np.array([b.basin_size for b in network.basins], dtype=np.int64)
    comp_i = induced.component[h[[b.cycle_states[0] for b in network.basins]]]
    size_i = np.array([b.basin_size for b in induced.basins], dtype=np.int64)[comp_i]
    pairs = np.unique(network.component.astype(np.int64) * induced.size + h)
    size_img = np.bincount(pairs // induced.size, minlength=network.n_attractors)
    triples = list(zip(size_f.tolist(), size_i.tolist(), size_img.tolist()))
    checks.append(_check("e.lower", max(Fraction(i, f) for f, i, _ in triples), "<=", 1))
    checks.append(_check("e.upper", max(Fraction(f, i) for f, i, _ in triples), "<=", 2 ** (n - m)))
    checks.append(_check("e.image.lower", max(Fraction(g, f) for f, _, g in triples), "<=", 1))
    checks.append(_check("e.image.upper", max(Fraction(f, g) for f, _, g in triples), "<=", 2 ** (n - m)))

    checks.append(_check("components", network.n_attractors, "==", induced.n_attractors))
    same_periods = network.periods() == induced.periods()
    checks.append(BoundCheck("periods", dict(sorted(network.periods().items())),
                             dict(sorted(induced.periods().items())), "==", same_periods))
    return BoundsReport(tuple(checks), tuple(per_period))


# ---------------------------------------------------------------------------
# networks attaining the bounds


def extremal_cycle_network(period: int) -> BooleanNetwork:
    """Directed cycle 1 -> 2 -> ... -> P -> 1 with identity rules."""
    if period < 1:
        raise ValueError("period must be at least 1")
    rules = {v: identity_rule(v - 1 if v > 1 else period) for v in range(1, period + 1)}
    return BooleanNetwork.from_rules(rules)


def de_bruijn_sequence(order: int) -> list:
    """Binary de Bruijn sequence of the given order via Hierholzer's algorithm.

    Nodes are the (order-1)-bit words; the circuit starts at the all-zeros
    node and always takes the unused edge with the smaller appended bit.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    mask = (1 << (order - 1)) - 1
    next_bit = [0] * (1 << (order - 1))
    stack = [(0, None)]
    bits = []
    while stack:
        node, arrived = stack[-1]
        if next_bit[node] < 2:
            b = next_bit[node]
            next_bit[node] += 1
            stack.append((((node << 1) | b) & mask, b))
        else:
            stack.pop()
            if arrived is not None:
                bits.append(arrived)
    bits.reverse()
    return bits


def extremal_debruijn_network(ell: int) -> BooleanNetwork:
    """Chain 1 -> ... -> ell with every vertex feeding back into vertex 1.

    Vertex 1 reads its own recent history through the chain and outputs the
    next symbol of a de Bruijn sequence, so the system induced on {1} is a
    single orbit through all 2^ell histories.
    """
    if ell < 1:
        raise ValueError("recurrence length must be at least 1")
    seq = de_bruijn_sequence(ell)
    size = len(seq)
    table = [0] * size
    for i in range(size):
        # inputs x_1..x_ell hold the symbols s_i, s_{i-1}, ..., s_{i-ell+1}
        idx = 0
        for j in range(ell):
            idx = (idx << 1) | seq[(i - j) % size]
        table[idx] = seq[(i + 1) % size]
    rules = {1: LocalRule(tuple(range(1, ell + 1)), tuple(table))}
    for v in range(2, ell + 1):
        rules[v] = identity_rule(v - 1)
    return BooleanNetwork.from_rules(rules)


def extremal_chain_network(n: int) -> BooleanNetwork:
    """Self-loop at 1 followed by the chain 1 -> 2 -> ... -> n, identity rules."""
    if n < 1:
        raise ValueError("need at least one vertex")
    rules = {1: identity_rule(1)}
    for v in range(2, n + 1):
        rules[v] = identity_rule(v - 1)
    return BooleanNetwork.from_rules(rules)

