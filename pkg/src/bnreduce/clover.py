"""Random signed clover networks and their closed-form induced rule.

A clover has a central vertex 1 through which every cycle passes; all other
vertices have a single input. With signed majority rules and the dominant
set {1}, the induced rule only depends on how the cycle signs add up per
cycle length (the sign-sum vector S):

    Phi(y^0, ..., y^{ell-1}) = Sign(sum_t S_t * y^{t-1} | y^0),  t = 1..ell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import NetworkError, ParseError
from .netcore import (
    BooleanNetwork,
    DirectedGraph,
    check_enumerable,
    parse_document,
    serialize_network,
    signed_majority_rule,
    successor_array,
)

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class CloverNetwork:
    """Cycles are vertex sequences starting at the center, e.g. ``(1, 2, 3)``
    for 1 -> 2 -> 3 -> 1. ``signs`` is empty for an unsigned clover."""

    n: int
    cycles: tuple
    signs: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        cycles = tuple(tuple(int(v) for v in c) for c in self.cycles)
        object.__setattr__(self, "cycles", cycles)
        object.__setattr__(self, "signs", dict(self.signs))
        seen = set()
        for c in cycles:
            if c[0] != 1 or len(c) < 2 or len(set(c)) != len(c):
                raise NetworkError(f"cycle {c} must start at 1 and have distinct vertices")
            rest = set(c[1:])
            if rest & seen:
                raise NetworkError("cycles may only share the central vertex")
            seen |= rest
        if seen != set(range(2, self.n + 1)):
            raise NetworkError(f"cycles must cover vertices 2..{self.n} exactly once")
        if self.signs:
            if set(self.signs) != set(self.arcs):
                raise NetworkError("signs must be given for exactly the clover's arcs")
            if any(s not in (-1, 1) for s in self.signs.values()):
                raise NetworkError("arc signs must be -1 or +1")

    @property
    def arcs(self) -> tuple:
        out = []
        for c in self.cycles:
            out.extend(zip(c, c[1:] + c[:1]))
        return tuple(sorted(out))

    @property
    def lengths(self) -> tuple:
        return tuple(len(c) for c in self.cycles)

    @property
    def recurrence_length(self) -> int:
        return max(self.lengths)

    @property
    def is_signed(self) -> bool:
        return bool(self.signs)

    def graph(self) -> DirectedGraph:
        return DirectedGraph(self.n, frozenset(self.arcs))


def generate_clover(n: int, p: float, rng: np.random.Generator) -> CloverNetwork:
    """Unsigned clover: 2 always opens a cycle, each m in 3..n does with probability p."""
    if n < 2:
        raise ValueError("a clover needs at least 2 vertices")
    if not 0 < p < 1:
        raise ValueError("folding probability must lie in (0, 1)")
    opens = [2] + [m for m, hit in zip(range(3, n + 1), rng.random(n - 2) < p) if hit]
    bounds = opens + [n + 1]
    cycles = [(1,) + tuple(range(a, b)) for a, b in zip(bounds, bounds[1:])]
    return CloverNetwork(n, tuple(cycles))


def assign_signs(clover: CloverNetwork, q: float, rng: np.random.Generator) -> CloverNetwork:
    """Each arc (in sorted order) is inhibitory with probability q."""
    if not 0 <= q <= 1:
        raise ValueError("inhibition probability must lie in [0, 1]")
    arcs = clover.arcs
    negative = rng.random(len(arcs)) < q
    return CloverNetwork(clover.n, clover.cycles, {a: (-1 if neg else 1) for a, neg in zip(arcs, negative)})


def _require_signed(clover: CloverNetwork):
    if not clover.is_signed:
        raise NetworkError("the clover has no arc signs")


def signed_majority_network(clover: CloverNetwork) -> BooleanNetwork:
    """Signed majority rules on the clover. With an even number of cycles the
    center also reads its own state to break ties (adding a self-loop)."""
    _require_signed(clover)
    regulators = {v: {} for v in range(1, clover.n + 1)}
    for (u, v), s in clover.signs.items():
        regulators[v][u] = s
    return BooleanNetwork.from_rules({v: signed_majority_rule(v, regulators[v]) for v in regulators})


def cycle_sign(clover: CloverNetwork, cycle) -> int:
    _require_signed(clover)
    cycle = tuple(cycle)
    if cycle not in clover.cycles:
        raise NetworkError(f"{cycle} is not a cycle of the clover")
    return math.prod(clover.signs[a] for a in zip(cycle, cycle[1:] + cycle[:1]))


def sign_sum_vector(clover: CloverNetwork) -> tuple:
    """``(S_1, ..., S_ell)``: summed cycle signs grouped by cycle length."""
    S = [0] * clover.recurrence_length
    for c in clover.cycles:
        S[len(c) - 1] += cycle_sign(clover, c)
    return tuple(S)


def clover_induced_rule(S, ell: int | None = None) -> tuple:
    """Truth table of the closed-form rule over the history ``(y^0, ..., y^{ell-1})``.

    Bits are indexed with ``y^0`` most significant, matching the induced
    system on the single dominant vertex 1.
    """
    S = np.asarray(S, dtype=np.int64)
    ell = len(S) if ell is None else ell
    if len(S) != ell:
        raise ValueError(f"S needs exactly {ell} entries")
    check_enumerable(ell, "closed-form rule")
    y = np.arange(1 << ell, dtype=np.int64)
    spins = np.stack([2 * ((y >> (ell - 1 - t)) & 1) - 1 for t in range(ell)], axis=1)
    total = spins @ S
    out = np.where(total > 0, 1, np.where(total < 0, 0, (y >> (ell - 1)) & 1))
    return tuple(int(b) for b in out)


# ---------------------------------------------------------------------------
# analytics


def eta(L: int, q: float) -> float:
    """Probability that a cycle of length L has sign +1.

    Evaluated in exact rationals on the shortest decimal form of ``q`` and
    rounded once, so e.g. ``eta(2, 0.3) == 0.58`` holds exactly.
    """
    if L < 1 or not 0 <= q <= 1:
        raise ValueError("need L >= 1 and 0 <= q <= 1")
    r = Fraction(repr(float(q)))
    return float(((1 - 2 * r) ** L + 1) / 2)


def expected_num_cycles(n: int, p: float) -> float:
    if n < 2:
        raise ValueError("n must be at least 2")
    return 1 + p * (n - 2)


def first_cycle_length_distribution(n: int, p: float) -> dict:
    """``{length: probability}`` for the cycle through vertex 2; lengths 2..n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    dist = {L: p * (1 - p) ** (L - 2) for L in range(2, n)}
    dist[n] = (1 - p) ** (n - 2)
    return dist


def expected_first_cycle_length(n: int, p: float) -> float:
    return sum(L * w for L, w in first_cycle_length_distribution(n, p).items())


def first_cycle_length_limit(p: float) -> float:
    return (1 + p) / p


@dataclass(frozen=True)
class MaxLengthEstimate:
    finite_sum: float
    asymptotic: float


def expected_max_cycle_length(n: int, p: float) -> MaxLengthEstimate:
    """Two estimates of the expected longest cycle for i.i.d. cycle lengths.

    The finite sum uses ``round(1 + p(n-2))`` cycles; the asymptotic form
    drops the terms that vanish as n grows.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    scale = -math.log(1 - p)
    nc = round(expected_num_cycles(n, p))
    finite = 1 + sum((1 - p**k) / k for k in range(1, nc + 1)) / scale
    asym = (math.log(n) + math.log(p) + EULER_GAMMA - 1 / (1 - p)) / scale
    return MaxLengthEstimate(finite, asym)


def sample_simplified_max(n: int, p: float, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Longest of ``round(1+p(n-2))`` i.i.d. lengths with P(L) = p(1-p)^(L-2)."""
    nc = round(expected_num_cycles(n, p))
    return (1 + rng.geometric(p, size=(samples, nc))).max(axis=1)


# ---------------------------------------------------------------------------
# symmetry


def check_negation_symmetry(system) -> bool:
    """F(-x) == -F(x) for every state.

    Accepts a BooleanNetwork or anything with ``successors()`` and ``bits``
    (e.g. an induced system, where negation flips every history slice).
    """
    if isinstance(system, BooleanNetwork):
        succ, bits = successor_array(system).astype(np.int64), system.n
    else:
        bits = system.bits
        check_enumerable(bits)
        succ = np.asarray(system.successors(), dtype=np.int64)
    full = (1 << bits) - 1
    x = np.arange(1 << bits, dtype=np.int64)
    return bool(np.array_equal(succ[x ^ full], succ ^ full))


# ---------------------------------------------------------------------------
# file format


def serialize_clover(clover: CloverNetwork) -> str:
    return serialize_network(signed_majority_network(clover), clover.signs)


def parse_clover(text: str) -> CloverNetwork:
    """Read a signed clover written by :func:`serialize_clover`.

    The node block must be the signed majority network of the arcs listed
    in the sign lines (plus the center's tie-break self-loop when needed).
    """
    n, _rules, signs = parse_document(text)
    if not signs:
        raise ParseError("a clover document needs sign lines")
    succ = {}
    for (u, v) in sorted(signs):
        if u == 1:
            continue
        if u in succ:
            raise ParseError(f"vertex {u} has more than one outgoing arc")
        succ[u] = v
    starts = sorted(v for (u, v) in signs if u == 1)
    cycles = []
    for s in starts:
        c, v = [1], s
        while v != 1:
            if v in c or len(c) > n:
                raise ParseError("sign arcs do not form a clover")
            c.append(v)
            if v not in succ:
                raise ParseError(f"vertex {v} has no outgoing arc")
            v = succ[v]
        cycles.append(tuple(c))
    try:
        clover = CloverNetwork(n, tuple(cycles), signs)
    except NetworkError as exc:
        raise ParseError(str(exc)) from None
    if serialize_clover(clover) != _canonical(text):
        raise ParseError("node tables differ from the signed majority rules of the sign arcs")
    return clover


def _canonical(text: str) -> str:
    from .netcore import _network_and_signs

    net, signs = _network_and_signs(text)
    return serialize_network(net, signs)
