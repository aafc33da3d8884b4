"""Shared machinery for lasso-word evaluation.

Runs over an ultimately periodic word u v^omega are analysed on a finite
quotient: one node per prefix position plus one node per period offset.
`path_sums` aggregates weights of all finite paths (idempotent instances
only); `lasso_value` combines prefix sums with omega-applied cycle sums over
every periodic anchor.  Callers supply the graph and interpret the result
together with their own emptiness analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Iterable

from .semiring import INF, SemiringError, SemiringInstance, SemiringValue
from .series import LassoWord, Word

Node = Hashable


@dataclass(frozen=True)
class PositionAutomaton:
    """Quotient of positions of u v^omega: prefix positions, then one per offset."""

    prefix_len: int
    period: Word
    prefix: Word

    @staticmethod
    def of(w: LassoWord) -> "PositionAutomaton":
        return PositionAutomaton(len(w.prefix), w.period, w.prefix)

    @property
    def size(self) -> int:
        return self.prefix_len + len(self.period)

    def letter(self, s: int) -> str:
        if s < self.prefix_len:
            return self.prefix[s]
        return self.period[s - self.prefix_len]

    def advance(self, s: int) -> int:
        s += 1
        if s >= self.size:
            return self.prefix_len
        return s

    def advance_by(self, s: int, k: int) -> int:
        for _ in range(k):
            s = self.advance(s)
        return s

    def state_of(self, pos: int) -> int:
        if pos < self.prefix_len:
            return pos
        return self.prefix_len + (pos - self.prefix_len) % len(self.period)

    def is_periodic(self, s: int) -> bool:
        return s >= self.prefix_len


Edge = tuple[Node, SemiringValue]


def _reachable(edges: dict[Node, list[Edge]], sources: Iterable[Node]) -> set[Node]:
    seen = set(sources)
    stack = list(seen)
    while stack:
        n = stack.pop()
        for m, _w in edges.get(n, ()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def _sccs(nodes: list[Node], edges: dict[Node, list[Edge]]) -> list[list[Node]]:
    """Tarjan strongly connected components, iterative."""
    index: dict[Node, int] = {}
    low: dict[Node, int] = {}
    on_stack: set[Node] = set()
    stack: list[Node] = []
    out: list[list[Node]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(edges.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ, _w in it:
                if succ not in index:
                    index[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(edges.get(succ, ()))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    m = stack.pop()
                    on_stack.discard(m)
                    comp.append(m)
                    if m == node:
                        break
                out.append(comp)
    return out


def path_sums(
    instance: SemiringInstance,
    edges: dict[Node, list[Edge]],
    sources: dict[Node, SemiringValue],
) -> dict[Node, SemiringValue]:
    """Sum of weights of all finite paths from the sources, per node.

    Requires an idempotent instance.  Zero-weight edges and sources are
    ignored.  Paths may repeat nodes; divergent families (arctic positive
    cycles or inf-weight edges on cycles) are resolved exactly to inf.
    """
    if not instance.idempotent:
        raise SemiringError("path aggregation needs an idempotent instance")
    sources = {n: w for n, w in sources.items() if not w.is_zero()}
    live_edges: dict[Node, list[Edge]] = {}
    for n, outs in edges.items():
        kept = [(m, w) for m, w in outs if not w.is_zero()]
        if kept:
            live_edges[n] = kept
    reach = _reachable(live_edges, sources)

    if instance.name == "boolean":
        one = instance.one
        return {n: one for n in reach}

    if instance.name == "tropical":
        return _dijkstra_min_plus(instance, live_edges, sources, reach)

    if instance.name == "arctic":
        return _longest_max_plus(instance, live_edges, sources, reach)

    raise SemiringError(f"path aggregation unsupported for {instance.name}")


def _dijkstra_min_plus(instance, edges, sources, reach):
    import heapq

    dist: dict[Node, SemiringValue] = {}
    counter = 0
    heap = []
    for n, w in sources.items():
        heap.append((w.value, counter, n, w))
        counter += 1
    heapq.heapify(heap)
    while heap:
        _, _, n, w = heapq.heappop(heap)
        if n in dist:
            continue
        dist[n] = w
        for m, ew in edges.get(n, ()):
            if m not in dist:
                nw = w * ew
                counter += 1
                heapq.heappush(heap, (nw.value, counter, m, nw))
    return dist


def _longest_max_plus(instance, edges, sources, reach):
    comps = _sccs(sorted(reach, key=repr), {n: edges.get(n, []) for n in reach})
    comp_of: dict[Node, int] = {}
    for ci, comp in enumerate(comps):
        for n in comp:
            comp_of[n] = ci
    gainful = [False] * len(comps)
    cross_in: list[list[tuple[int, SemiringValue]]] = [[] for _ in comps]
    for n in reach:
        for m, w in edges.get(n, ()):
            if m not in reach:
                continue
            if comp_of[n] == comp_of[m]:
                if w.value is INF or (isinstance(w.value, int) and w.value > 0):
                    gainful[comp_of[n]] = True
            else:
                cross_in[comp_of[m]].append((comp_of[n], w))
    # Tarjan emits components in reverse topological order, so descending
    # index order visits predecessors before successors
    comp_val: list[SemiringValue] = [instance.zero] * len(comps)
    inf_val = instance.value(INF)
    for ci in range(len(comps) - 1, -1, -1):
        acc = instance.zero
        for n in comps[ci]:
            if n in sources:
                acc = acc + sources[n]
        for src_ci, w in cross_in[ci]:
            acc = acc + comp_val[src_ci] * w
        if not acc.is_zero() and gainful[ci]:
            acc = inf_val
        comp_val[ci] = acc
    out: dict[Node, SemiringValue] = {}
    for n in reach:
        v = comp_val[comp_of[n]]
        if not v.is_zero():
            out[n] = v
    return out


@dataclass(frozen=True)
class HitEdge:
    """Weighted edge whose interior (states strictly between nodes) may hit Buchi."""

    target: Node
    weight: SemiringValue
    interior_hit: bool


def lasso_value(
    instance: SemiringInstance,
    edges: dict[Node, list[HitEdge]],
    sources: dict[Node, SemiringValue],
    is_anchor: Callable[[Node], bool],
    is_buchi: Callable[[Node], bool],
) -> SemiringValue:
    """Sum over ultimately periodic runs: prefix weight times omega of the cycle sum.

    Anchors are the period-aligned nodes; a cycle counts a Buchi hit when its
    interior or any node it visits (including the anchor on return) is
    accepting.  Only two cycle classes matter under the omega operation:
    cycles whose weight is the multiplicative unit (their repetition costs
    nothing extra) and cycles carrying any other weight (whose repetition
    collapses to the omega of a non-unit element).  Both classes are read off
    strongly connected components, so no per-anchor search is needed.
    """
    plain: dict[Node, list[Edge]] = {
        n: [(e.target, e.weight) for e in outs] for n, outs in edges.items()
    }
    pre = path_sums(instance, plain, sources)

    def hit(e: HitEdge) -> bool:
        return e.interior_hit or is_buchi(e.target)

    # full graph: components with an accepting cycle, and whether such a
    # cycle can pick up a non-unit weight
    comp_of = _component_index(pre, plain)
    full_hit: dict[int, bool] = {}
    full_nonunit: dict[int, bool] = {}
    for n in pre:
        ci = comp_of[n]
        for e in edges.get(n, ()):
            if e.target in pre and comp_of[e.target] == ci:
                if hit(e):
                    full_hit[ci] = True
                if not e.weight.is_one():
                    full_nonunit[ci] = True

    # unit-weight subgraph: components with an accepting all-unit cycle
    unit_plain = {
        n: [(e.target, e.weight) for e in edges.get(n, ()) if e.weight.is_one()]
        for n in pre
    }
    unit_comp_of = _component_index(pre, unit_plain)
    unit_hit: dict[int, bool] = {}
    for n in pre:
        ci = unit_comp_of[n]
        for e in edges.get(n, ()):
            if (
                e.weight.is_one()
                and e.target in pre
                and unit_comp_of[e.target] == ci
                and hit(e)
            ):
                unit_hit[ci] = True

    omega_nonunit = _omega_of_nonunit(instance)
    total = instance.zero
    for anchor, pre_w in pre.items():
        if not is_anchor(anchor):
            continue
        ci = comp_of[anchor]
        if not full_hit.get(ci):
            continue
        if unit_hit.get(unit_comp_of[anchor]):
            total = total + pre_w
        if full_nonunit.get(ci) and omega_nonunit is not None:
            total = total + pre_w * omega_nonunit
    return total


def _component_index(nodes, plain) -> dict[Node, int]:
    comps = _sccs(sorted(nodes, key=repr), plain)
    comp_of: dict[Node, int] = {}
    for ci, comp in enumerate(comps):
        for n in comp:
            comp_of[n] = ci
    return comp_of


def _omega_of_nonunit(instance: SemiringInstance):
    """Omega value of repeating any non-unit nonzero cycle weight.

    Every non-unit nonzero scalar of these carriers has the same omega: the
    additively absorbing top for tropical and arctic (which is the zero of
    the tropical instance, so those cycles contribute nothing there).  The
    Boolean instance has no such scalars.
    """
    if instance.name == "tropical":
        return instance.value(INF)
    if instance.name == "arctic":
        return instance.value(INF)
    return None
