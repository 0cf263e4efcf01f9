"""Dominant vertex sets: chains, depth, recurrence length and reduced graph.

A set U is dominant when every directed cycle meets it, which (for graphs
without input-free vertices) is the same as its determination chain
``U_0 = U, U_{i+1} = U_i | boundary(U_i)`` reaching the whole vertex set.

Paths used for the reduced graph and recurrence length run between two
dominant vertices with every interior vertex outside U.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import NotDominant, SizeLimit
from .netcore import MAX_ENUMERABLE, BooleanNetwork, DirectedGraph


def as_graph(obj) -> DirectedGraph:
    if isinstance(obj, BooleanNetwork):
        return obj.graph
    return obj


def _check_subset(graph: DirectedGraph, vertices) -> frozenset:
    vertices = frozenset(int(v) for v in vertices)
    bad = [v for v in vertices if not 1 <= v <= graph.n]
    if bad:
        raise ValueError(f"vertex {bad[0]} not in 1..{graph.n}")
    return vertices


def boundary(graph, W: Iterable[int]) -> frozenset:
    """All vertices whose whole input set lies inside ``W``."""
    graph = as_graph(graph)
    W = _check_subset(graph, W)
    return frozenset(v for v in graph.vertices if set(graph.inputs(v)) <= W)


def is_acyclic(graph, vertices: Iterable[int]) -> bool:
    """True when the subgraph induced on ``vertices`` has no directed cycle.

    Peels vertices of in-degree zero until nothing is left to peel.
    """
    graph = as_graph(graph)
    keep = set(vertices)
    indeg = {v: sum(1 for u in graph.inputs(v) if u in keep) for v in keep}
    stack = [v for v, k in indeg.items() if k == 0]
    removed = 0
    while stack:
        v = stack.pop()
        removed += 1
        for w in graph.outputs(v):
            if w in keep:
                indeg[w] -= 1
                if indeg[w] == 0:
                    stack.append(w)
    return removed == len(keep)


def is_dominant(graph, U: Iterable[int]) -> bool:
    graph = as_graph(graph)
    U = _check_subset(graph, U)
    return is_acyclic(graph, set(graph.vertices) - U)


def chain_of(graph, U: Iterable[int]) -> tuple:
    """The determination chain ``(U_0, ..., U_d)``; its depth is ``len - 1``."""
    graph = as_graph(graph)
    current = _check_subset(graph, U)
    everything = frozenset(graph.vertices)
    chain = [current]
    while current != everything:
        grown = current | boundary(graph, current)
        if grown == current:
            raise NotDominant(
                f"chain of {sorted(chain[0])} stalls at {sorted(current)}: some cycle avoids the set"
            )
        chain.append(grown)
        current = grown
    return tuple(chain)


def depth(graph, U: Iterable[int]) -> int:
    return len(chain_of(graph, U)) - 1


def _require_dominant(graph, U) -> frozenset:
    U = _check_subset(graph, U)
    if not is_dominant(graph, U):
        raise NotDominant(f"{sorted(U)} is not dominant")
    return U


def _lengths_into(graph: DirectedGraph, U: frozenset, source: int) -> dict:
    """For every vertex w, the lengths of paths source -> w whose vertices
    after the start (excluding w itself) avoid U.

    Paths through non-dominant vertices are automatically simple because
    the complement of a dominant set is acyclic.
    """
    memo: dict = {}

    def into(w):
        if w in memo:
            return memo[w]
        lengths = set()
        for p in graph.inputs(w):
            if p == source:
                lengths.add(1)
            if p not in U:
                lengths.update(k + 1 for k in into(p))
        memo[w] = frozenset(lengths)
        return memo[w]

    return {w: into(w) for w in U} | {w: into(w) for w in graph.vertices if w not in U}


def path_lengths(graph, U: Iterable[int], source: int, target: int) -> frozenset:
    """Lengths of the simple paths ``source -> target`` with interior outside U."""
    graph = as_graph(graph)
    U = _require_dominant(graph, U)
    if source not in U or target not in U:
        raise ValueError("both endpoints must belong to the dominant set")
    return _lengths_into(graph, U, source)[target]


def all_path_lengths(graph, U: Iterable[int]) -> dict:
    """``{(u', u): lengths}`` for every ordered pair with at least one path."""
    graph = as_graph(graph)
    U = _require_dominant(graph, U)
    out = {}
    for src in sorted(U):
        into = _lengths_into(graph, U, src)
        for dst in sorted(U):
            if into[dst]:
                out[(src, dst)] = into[dst]
    return out


def recurrence_length(graph, U: Iterable[int]) -> int:
    lengths = all_path_lengths(graph, U)
    return max(max(ls) for ls in lengths.values())


def reduced_graph(graph, U: Iterable[int]) -> frozenset:
    """Arcs of the reduced graph over U."""
    return frozenset(all_path_lengths(graph, U))


def reduced_inputs(graph, U: Iterable[int]) -> dict:
    """I_U(u) for each u in U, ascending."""
    arcs = reduced_graph(graph, U)
    return {u: tuple(sorted(s for s, t in arcs if t == u)) for u in sorted(set(U))}


@dataclass(frozen=True)
class DominanceReport:
    vertices: tuple
    chain: tuple
    depth: int
    recurrence_length: int
    reduced_arcs: tuple
    path_lengths: dict = field(compare=False)

    def to_text(self) -> str:
        lines = [f"dominant set: {_fmt(self.vertices)}"]
        lines.append(f"depth: {self.depth}")
        lines.append(f"recurrence length: {self.recurrence_length}")
        for i, level in enumerate(self.chain):
            lines.append(f"U{i}: {_fmt(level)}")
        for arc in self.reduced_arcs:
            lines.append(f"arc {arc[0]} -> {arc[1]}: lengths {_fmt(self.path_lengths[arc])}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        rows = ["record,key,value"]
        rows.append(f"set,,{' '.join(map(str, self.vertices))}")
        rows.append(f"depth,,{self.depth}")
        rows.append(f"recurrence_length,,{self.recurrence_length}")
        for i, level in enumerate(self.chain):
            rows.append(f"chain,{i},{' '.join(map(str, sorted(level)))}")
        for arc in self.reduced_arcs:
            rows.append(f"arc,{arc[0]}->{arc[1]},{' '.join(map(str, sorted(self.path_lengths[arc])))}")
        return "\n".join(rows) + "\n"


def _fmt(vertices) -> str:
    return "{" + ",".join(str(v) for v in sorted(vertices)) + "}"


def dominance_report(graph, U: Iterable[int]) -> DominanceReport:
    graph = as_graph(graph)
    U = _require_dominant(graph, U)
    chain = chain_of(graph, U)
    lengths = all_path_lengths(graph, U)
    return DominanceReport(
        vertices=tuple(sorted(U)),
        chain=tuple(tuple(sorted(level)) for level in chain),
        depth=len(chain) - 1,
        recurrence_length=max(max(ls) for ls in lengths.values()),
        reduced_arcs=tuple(sorted(lengths)),
        path_lengths=lengths,
    )


# ---------------------------------------------------------------------------
# minimum dominant sets (minimum feedback vertex sets)


def cyclic_vertices(graph) -> frozenset:
    """Vertices lying on at least one directed cycle."""
    graph = as_graph(graph)
    on_cycle = set()
    for v in graph.vertices:
        seen = set()
        stack = list(graph.outputs(v))
        while stack:
            w = stack.pop()
            if w == v:
                on_cycle.add(v)
                break
            if w not in seen:
                seen.add(w)
                stack.extend(graph.outputs(w))
    return frozenset(on_cycle)


def _find_cycle(graph: DirectedGraph, alive: set):
    """Some directed cycle inside ``alive`` as a vertex list, or None."""
    color = {}
    for root in sorted(alive):
        if root in color:
            continue
        stack = [(root, iter(graph.outputs(root)))]
        path = [root]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                if w not in alive:
                    continue
                c = color.get(w)
                if c == 1:
                    return path[path.index(w):]
                if c is None:
                    color[w] = 1
                    path.append(w)
                    stack.append((w, iter(graph.outputs(w))))
                    break
            else:
                color[v] = 2
                path.pop()
                stack.pop()
    return None


def minimum_dominant_sets(graph, max_vertices: int = MAX_ENUMERABLE) -> list:
    """Every dominant set of minimum cardinality, sorted.

    Exact branch-and-bound: pick a cycle avoiding the partial set and branch
    on its vertices, deepening the cardinality budget one at a time.
    """
    graph = as_graph(graph)
    if graph.n > max_vertices:
        raise SizeLimit(f"exact minimum dominant set search is limited to {max_vertices} vertices")
    candidates = cyclic_vertices(graph)
    everything = set(graph.vertices)

    for budget in range(0, len(candidates) + 1):
        found = set()
        visited = set()

        def search(chosen: frozenset):
            if chosen in visited:
                return
            visited.add(chosen)
            cycle = _find_cycle(graph, everything - chosen)
            if cycle is None:
                found.add(chosen)
                return
            if len(chosen) == budget:
                return
            for v in cycle:
                search(chosen | {v})

        search(frozenset())
        if found:
            return sorted((tuple(sorted(s)) for s in found), key=lambda s: s)
    raise AssertionError("the full cyclic vertex set is always dominant")
