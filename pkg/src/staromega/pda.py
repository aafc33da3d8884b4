"""Simple reset pushdown matrices and automata, finite and omega behaviors.

A simple reset pushdown matrix is stored by its three generating block
families (ignore stack / push one symbol / pop one symbol); every entry of
the infinite transition matrix is recovered from them by suffix extension,
which `expand_entry` implements.  Behaviors are exact: the finite behavior
enumerates runs (one letter per step), the omega behavior combines a capped
certificate search over the period quotient with an exact emptiness analysis
of the run structure, so zero answers never depend on the caps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

from ._search import HitEdge, PositionAutomaton, lasso_value
from .semiring import (
    INF,
    NEG_INF,
    SemiringError,
    SemiringInstance,
    SemiringValue,
    instance_by_name,
)
from .series import LassoWord, Word
from .system import AlgebraicSystem, IllFormedSystem, LassoResult, MixedSystem, OK, INCONCLUSIVE, is_gnf_algebraic, is_gnf_mixed

# A letter polynomial: one weight per input letter, support only on letters.
LetterPoly = dict[str, SemiringValue]
Block = tuple[tuple[LetterPoly, ...], ...]


class EpsilonCoefficient(ValueError):
    """Raised when a construction needs an epsilon-free component."""

    def __init__(self, component: str, coeff: SemiringValue):
        super().__init__(
            f"component {component} has nonzero empty-word coefficient {coeff!r}"
        )
        self.component = component
        self.coeff = coeff


def _zero_block(n: int) -> Block:
    return tuple(tuple({} for _ in range(n)) for _ in range(n))


def _freeze_block(n: int, entries: Mapping[tuple[int, int], LetterPoly]) -> Block:
    rows = [[{} for _ in range(n)] for _ in range(n)]
    for (i, j), lp in entries.items():
        rows[i][j] = {a: c for a, c in lp.items() if not c.is_zero()}
    return tuple(tuple(row) for row in rows)


@dataclass(frozen=True)
class ResetPDMatrix:
    """Finite block presentation of a simple reset pushdown matrix."""

    instance: SemiringInstance
    n_states: int
    input_alphabet: tuple[str, ...]
    stack_alphabet: tuple[str, ...]
    m_eps_eps: Block
    m_eps_push: Mapping[str, Block]
    m_pop_eps: Mapping[str, Block]

    def __post_init__(self):
        blocks = [self.m_eps_eps]
        blocks.extend(self.m_eps_push.values())
        blocks.extend(self.m_pop_eps.values())
        for sym in list(self.m_eps_push) + list(self.m_pop_eps):
            if sym not in self.stack_alphabet:
                raise IllFormedSystem(f"unknown stack symbol {sym!r}")
        for b in blocks:
            if len(b) != self.n_states or any(len(r) != self.n_states for r in b):
                raise IllFormedSystem("block has wrong dimension")
            for row in b:
                for lp in row:
                    for a, c in lp.items():
                        if a not in self.input_alphabet:
                            raise IllFormedSystem(f"unknown input letter {a!r}")
                        if c.instance is not self.instance:
                            raise SemiringError("block entry over a different instance")
                        if c.is_zero():
                            raise IllFormedSystem("zero weights must be omitted")

    def push_block(self, sym: str) -> Block:
        return self.m_eps_push.get(sym, _zero_block(self.n_states))

    def pop_block(self, sym: str) -> Block:
        return self.m_pop_eps.get(sym, _zero_block(self.n_states))


def expand_entry(m: ResetPDMatrix, pi: Word, pi2: Word) -> Block:
    """Entry of the full transition matrix at stack pair (pi, pi2).

    Pushdown suffix extension: a nonempty stack acts through its top symbol,
    keeping the rest untouched; the empty stack exposes the reset blocks.
    """
    if pi == ():
        if pi2 == ():
            return m.m_eps_eps
        if len(pi2) == 1:
            return m.push_block(pi2[0])
        return _zero_block(m.n_states)
    top, rest = pi[0], pi[1:]
    if pi2 == rest:
        return m.pop_block(top)
    if pi2 == pi:
        return m.m_eps_eps
    if len(pi2) == len(pi) + 1 and pi2[1:] == pi:
        return m.push_block(pi2[0])
    return _zero_block(m.n_states)


@dataclass(frozen=True)
class Configuration:
    """A state together with a stack, top symbol first."""

    state: int
    stack: Word = ()


@dataclass(frozen=True)
class SimpleOmegaPDA:
    """Simple reset pushdown automaton, optionally with repeated states 1..l."""

    matrix: ResetPDMatrix
    initial: tuple[SemiringValue, ...]
    final: tuple[SemiringValue, ...]
    buchi_count: int | None
    state_names: tuple[str, ...]

    def __post_init__(self):
        n = self.matrix.n_states
        if len(self.initial) != n or len(self.final) != n or len(self.state_names) != n:
            raise IllFormedSystem("vector lengths must match the state count")
        if self.buchi_count is not None and not 0 <= self.buchi_count <= n:
            raise IllFormedSystem("repeated-state count out of range")

    @property
    def instance(self) -> SemiringInstance:
        return self.matrix.instance


# -- induced constructions ---------------------------------------------------


def _letter_sum(instance, polys) -> LetterPoly:
    out: dict[str, SemiringValue] = {}
    for letter, coeff in polys:
        prev = out.get(letter)
        out[letter] = coeff if prev is None else prev + coeff
    return {a: c for a, c in out.items() if not c.is_zero()}


def _check_eps_free(sys: AlgebraicSystem, component: int) -> None:
    for idx, p in enumerate(sys.rhs):
        c = p.coeff_of(())
        if not c.is_zero():
            raise EpsilonCoefficient(sys.variables[idx], c)


def induced_finite_pda(sys: AlgebraicSystem, start: int) -> SimpleOmegaPDA:
    """Simple reset pushdown automaton reading off a Greibach-shaped system.

    One state per variable plus a sink; the second trailing variable of a
    monomial is pushed, the first becomes the next state.
    """
    if not is_gnf_algebraic(sys, allow_eps=True):
        raise IllFormedSystem("induced automaton needs a Greibach-shaped system")
    _check_eps_free(sys, start)
    inst = sys.instance
    n = len(sys.variables)
    f = n
    var_ix = {v: i for i, v in enumerate(sys.variables)}
    stack_syms = tuple(sys.variables)

    eps_eps: dict[tuple[int, int], list] = {}
    pushes: dict[str, dict[tuple[int, int], list]] = {v: {} for v in stack_syms}
    term: list[list] = [[] for _ in range(n)]
    for i, p in enumerate(sys.rhs):
        for mono in p.monomials:
            w = mono.word
            a = w[0]
            if len(w) == 1:
                term[i].append((a, mono.coeff))
            elif len(w) == 2:
                j = var_ix[w[1]]
                eps_eps.setdefault((i, j), []).append((a, mono.coeff))
            else:
                j, k = var_ix[w[1]], var_ix[w[2]]
                pushes[w[2]].setdefault((i, j), []).append((a, mono.coeff))

    m_eps_eps = {}
    for (i, j), entries in eps_eps.items():
        m_eps_eps[(i, j)] = _letter_sum(inst, entries)
    for i in range(n):
        lp = _letter_sum(inst, term[i])
        if lp:
            m_eps_eps[(i, f)] = lp
    m_push = {
        sym: _freeze_block(n + 1, {k: _letter_sum(inst, v) for k, v in d.items()})
        for sym, d in pushes.items()
        if d
    }
    m_pop = {}
    for k, sym in enumerate(stack_syms):
        entries = {}
        for i in range(n):
            lp = _letter_sum(inst, term[i])
            if lp:
                entries[(i, k)] = lp
        if entries:
            m_pop[sym] = _freeze_block(n + 1, entries)

    matrix = ResetPDMatrix(
        inst,
        n + 1,
        tuple(sys.terminals),
        stack_syms,
        _freeze_block(n + 1, m_eps_eps),
        m_push,
        m_pop,
    )
    initial = tuple(inst.one if q == start else inst.zero for q in range(n + 1))
    final = tuple(inst.one if q == f else inst.zero for q in range(n + 1))
    names = tuple(sys.variables) + ("f",)
    return SimpleOmegaPDA(matrix, initial, final, None, names)


def induced_omega_pda(sys: MixedSystem, start: int, buchi_count: int) -> SimpleOmegaPDA:
    """Simple omega-reset pushdown automaton of a Greibach-shaped mixed system.

    Requires equally many finite and omega variables.  States are the omega
    variables (repeated ones first), then the finite variables, then a sink;
    the stack distinguishes finite-return from omega-return symbols.
    """
    if len(sys.x_vars) != len(sys.z_vars):
        raise IllFormedSystem("construction needs equally many x- and z-variables")
    if not is_gnf_mixed(sys):
        raise IllFormedSystem("induced automaton needs Greibach shape")
    _check_eps_free(sys.x_part, start)
    if not 0 <= buchi_count <= len(sys.z_vars):
        raise IllFormedSystem("repeated-state count out of range")
    inst = sys.instance
    n = sys.n
    f = 2 * n
    var_ix = {v: i for i, v in enumerate(sys.x_vars)}
    xsym = tuple(f"X:{v}" for v in sys.x_vars)
    zsym = tuple(f"Z:{v}" for v in sys.z_vars)

    term: list[list] = [[] for _ in range(n)]
    eps_eps: dict[tuple[int, int], list] = {}
    pushes: dict[str, dict[tuple[int, int], list]] = {s: {} for s in xsym + zsym}
    for i, p in enumerate(sys.x_rhs):
        for mono in p.monomials:
            w = mono.word
            a = w[0]
            if len(w) == 1:
                term[i].append((a, mono.coeff))
            elif len(w) == 2:
                eps_eps.setdefault((n + i, n + var_ix[w[1]]), []).append((a, mono.coeff))
            else:
                j, k = var_ix[w[1]], var_ix[w[2]]
                pushes[xsym[k]].setdefault((n + i, n + j), []).append((a, mono.coeff))
    for i in range(n):
        for k in range(n):
            for mono in sys.rho[i][k].monomials:
                w = mono.word
                a = w[0]
                if len(w) == 1:
                    eps_eps.setdefault((i, k), []).append((a, mono.coeff))
                else:
                    j = var_ix[w[1]]
                    pushes[zsym[k]].setdefault((i, n + j), []).append((a, mono.coeff))

    m_eps_eps = {k: _letter_sum(inst, v) for k, v in eps_eps.items()}
    for i in range(n):
        lp = _letter_sum(inst, term[i])
        if lp:
            m_eps_eps[(n + i, f)] = lp
    m_push = {
        sym: _freeze_block(2 * n + 1, {k: _letter_sum(inst, v) for k, v in d.items()})
        for sym, d in pushes.items()
        if d
    }
    m_pop = {}
    for k in range(n):
        entries_x = {}
        entries_z = {}
        for i in range(n):
            lp = _letter_sum(inst, term[i])
            if lp:
                entries_x[(n + i, n + k)] = lp
                entries_z[(n + i, k)] = lp
        if entries_x:
            m_pop[xsym[k]] = _freeze_block(2 * n + 1, entries_x)
        if entries_z:
            m_pop[zsym[k]] = _freeze_block(2 * n + 1, entries_z)

    matrix = ResetPDMatrix(
        inst,
        2 * n + 1,
        tuple(sys.terminals),
        xsym + zsym,
        _freeze_block(2 * n + 1, m_eps_eps),
        m_push,
        m_pop,
    )
    initial = tuple(
        inst.one if q in (start, n + start) else inst.zero for q in range(2 * n + 1)
    )
    final = tuple(inst.one if q == f else inst.zero for q in range(2 * n + 1))
    names = tuple(f"z:{v}" for v in sys.z_vars) + tuple(f"x:{v}" for v in sys.x_vars) + ("f",)
    return SimpleOmegaPDA(matrix, initial, final, buchi_count, names)


# -- behaviors ----------------------------------------------------------------


def _successors(m: ResetPDMatrix, state: int, stack: Word, letter: str):
    for j in range(m.n_states):
        lp = m.m_eps_eps[state][j]
        c = lp.get(letter)
        if c is not None:
            yield j, stack, c
    for sym, block in m.m_eps_push.items():
        for j in range(m.n_states):
            cv = block[state][j].get(letter)
            if cv is not None:
                yield j, (sym,) + stack, cv
    if stack:
        top = stack[0]
        block = m.m_pop_eps.get(top)
        if block is not None:
            for j in range(m.n_states):
                cv = block[state][j].get(letter)
                if cv is not None:
                    yield j, stack[1:], cv


def behavior_finite(a: SimpleOmegaPDA, w: Word) -> SemiringValue:
    """Exact weight of w: sum over all empty-to-empty runs, one letter per step."""
    inst = a.instance
    m = a.matrix
    memo: dict[tuple[int, int, Word], SemiringValue] = {}

    def value(pos: int, state: int, stack: Word) -> SemiringValue:
        if pos == len(w):
            return a.final[state] if stack == () else inst.zero
        key = (pos, state, stack)
        got = memo.get(key)
        if got is not None:
            return got
        acc = inst.zero
        for j, stack2, c in _successors(m, state, stack, w[pos]):
            acc = acc + c * value(pos + 1, j, stack2)
        memo[key] = acc
        return acc

    total = inst.zero
    for q in range(m.n_states):
        if not a.initial[q].is_zero():
            total = total + a.initial[q] * value(0, q, ())
    return total


@dataclass(frozen=True)
class PdaLassoCaps:
    height: int
    periods: int
    max_nodes: int = 200000

    def __post_init__(self):
        if self.height < 0 or self.periods < 1:
            raise IllFormedSystem("caps must be positive")


def default_pda_caps(a: SimpleOmegaPDA, w: LassoWord) -> PdaLassoCaps:
    periods = 2 * a.matrix.n_states * max(1, len(a.matrix.stack_alphabet)) * len(w.period) + 4
    return PdaLassoCaps(height=len(w.prefix) + len(w.period) * periods, periods=periods)


def behavior_omega_lasso(
    a: SimpleOmegaPDA, w: LassoWord, caps: PdaLassoCaps | None = None
) -> LassoResult:
    """Omega part of the behavior at u v^omega.

    Certificates (period-aligned configuration repetitions through a repeated
    state) are searched under the caps; whether any accepting run exists at
    all is decided exactly on the run structure, so a zero verdict is
    cap-independent.
    """
    if a.buchi_count is None:
        raise IllFormedSystem("automaton has no repeated-state count")
    inst = a.instance
    if not inst.idempotent:
        raise SemiringError(
            f"omega evaluation by lasso search needs an idempotent instance, not {inst.name}"
        )
    starts = [
        (q, ()) for q in range(a.matrix.n_states) if not a.initial[q].is_zero()
    ]
    accepting = _pda_run_exists(a, w, starts)
    if not accepting:
        return LassoResult(OK, inst.zero)
    if inst.name == "boolean":
        return LassoResult(OK, inst.one)
    if caps is None:
        caps = default_pda_caps(a, w)
    sources = {}
    pa = PositionAutomaton.of(w)
    for q in range(a.matrix.n_states):
        if not a.initial[q].is_zero():
            sources[(q, (), pa.state_of(0))] = a.initial[q]
    value = _pda_certificate_search(a, w, sources, caps, pa)
    if value.is_zero():
        return LassoResult(INCONCLUSIVE)
    return LassoResult(OK, value)


def omega_value_from(
    a: SimpleOmegaPDA,
    w: LassoWord,
    state: int,
    stack: Word = (),
    caps: PdaLassoCaps | None = None,
) -> LassoResult:
    """Omega value started from one configuration instead of the initial vector."""
    return omega_value_at(a, w, Configuration(state, stack), caps)


def omega_value_at(
    a: SimpleOmegaPDA,
    w: LassoWord,
    config: Configuration,
    caps: PdaLassoCaps | None = None,
) -> LassoResult:
    if a.buchi_count is None:
        raise IllFormedSystem("automaton has no repeated-state count")
    inst = a.instance
    if not inst.idempotent:
        raise SemiringError("omega evaluation needs an idempotent instance")
    state, stack = config.state, config.stack
    accepting = _pda_run_exists(a, w, [(state, stack)])
    if not accepting:
        return LassoResult(OK, inst.zero)
    if inst.name == "boolean":
        return LassoResult(OK, inst.one)
    if caps is None:
        caps = default_pda_caps(a, w)
    pa = PositionAutomaton.of(w)
    value = _pda_certificate_search(
        a, w, {(state, stack, pa.state_of(0)): inst.one}, caps, pa
    )
    if value.is_zero():
        return LassoResult(INCONCLUSIVE)
    return LassoResult(OK, value)


def _pda_certificate_search(a, w, sources, caps, pa) -> SemiringValue:
    inst = a.instance
    m = a.matrix
    edges: dict[tuple, list[HitEdge]] = {}
    frontier = list(sources)
    seen = set(frontier)
    while frontier:
        node = frontier.pop()
        state, stack, s = node
        outs = []
        for j, stack2, c in _successors(m, state, stack, pa.letter(s)):
            if len(stack2) > caps.height:
                continue
            succ = (j, stack2, pa.advance(s))
            outs.append(HitEdge(succ, c, False))
            if succ not in seen and len(seen) < caps.max_nodes:
                seen.add(succ)
                frontier.append(succ)
        edges[node] = outs
    l = a.buchi_count
    return lasso_value(
        inst,
        edges,
        sources,
        is_anchor=lambda node: pa.is_periodic(node[2]),
        is_buchi=lambda node: node[0] < l,
    )


# -- exact emptiness of the accepting-run structure ---------------------------


class _RunAnalysis:
    """Support-level relations over (state, period-quotient position).

    pop_sum: facts "with this top symbol, the symbol is eventually popped,
    landing here"; level1: one neutral step or one push-excursion returning
    to the same stack level.  All carry a bit recording whether a repeated
    state was entered after the start.
    """

    def __init__(self, a: SimpleOmegaPDA, w: LassoWord):
        self.a = a
        self.m = a.matrix
        self.pa = PositionAutomaton.of(w)
        self.l = a.buchi_count or 0
        self._build_steps()
        self._build_pop_sum()
        self._build_level()

    def _hit(self, state: int) -> bool:
        return state < self.l

    def _build_steps(self):
        m, pa = self.m, self.pa
        n = m.n_states
        self.neutral = {}
        self.push = {}
        self.pop = {}
        for s in range(pa.size):
            letter = pa.letter(s)
            self.neutral[s] = [
                (p, q)
                for p in range(n)
                for q in range(n)
                if letter in m.m_eps_eps[p][q]
            ]
            self.push[s] = [
                (p, sym, q)
                for sym, block in m.m_eps_push.items()
                for p in range(n)
                for q in range(n)
                if letter in block[p][q]
            ]
            self.pop[s] = [
                (p, sym, q)
                for sym, block in m.m_pop_eps.items()
                for p in range(n)
                for q in range(n)
                if letter in block[p][q]
            ]

    def _build_pop_sum(self):
        pa = self.pa
        pop_sum: dict[tuple[int, str, int], set] = {}

        def get(key):
            return pop_sum.setdefault(key, set())

        changed = True
        while changed:
            changed = False
            for s in range(pa.size):
                s2 = pa.advance(s)
                for (p, sym, q) in self.pop[s]:
                    fact = (q, s2, self._hit(q))
                    tgt = get((p, sym, s))
                    if fact not in tgt:
                        tgt.add(fact)
                        changed = True
                for (p, q) in self.neutral[s]:
                    for sym in self.m.stack_alphabet:
                        tgt = get((p, sym, s))
                        before = len(tgt)
                        tgt |= {
                            (r, t, h or self._hit(q))
                            for (r, t, h) in pop_sum.get((q, sym, s2), ())
                        }
                        if len(tgt) != before:
                            changed = True
                for (p, delta, q) in self.push[s]:
                    # snapshots: the source sets may alias the target when a
                    # one-letter period makes advance(s) == s
                    inner = tuple(pop_sum.get((q, delta, s2), ()))
                    if not inner:
                        continue
                    for sym in self.m.stack_alphabet:
                        tgt = get((p, sym, s))
                        before = len(tgt)
                        for (r, t1, h1) in inner:
                            for (r2, t2, h2) in tuple(pop_sum.get((r, sym, t1), ())):
                                tgt.add((r2, t2, h1 or h2 or self._hit(q)))
                        if len(tgt) != before:
                            changed = True
        self.pop_sum = pop_sum

    def _build_level(self):
        """One-step moves that keep the current stack level (pop forbidden)."""
        pa = self.pa
        level1: dict[tuple[int, int], set] = {}
        raw_push: dict[tuple[int, int], set] = {}
        for s in range(pa.size):
            s2 = pa.advance(s)
            for (p, q) in self.neutral[s]:
                level1.setdefault((p, s), set()).add((q, s2, self._hit(q)))
            for (p, delta, q) in self.push[s]:
                raw_push.setdefault((p, s), set()).add((q, s2, self._hit(q)))
                for (r, t, h) in self.pop_sum.get((q, delta, s2), ()):
                    level1.setdefault((p, s), set()).add((r, t, h or self._hit(q)))
        self.level1 = level1
        self.raw_push = raw_push

    # -- closures ----------------------------------------------------------

    def _bit_reach(self, edge_map, seeds, include_start=True):
        """All (node, bit) pairs reachable from the seed (node, bit) pairs."""
        seen = set(seeds) if include_start else set()
        stack = list(seeds)
        while stack:
            node, bit = stack.pop()
            for (q, t, h) in edge_map.get(node, ()):
                fact = ((q, t), bit or h)
                if fact not in seen:
                    seen.add(fact)
                    stack.append(fact)
        return seen

    def level_reach(self, seeds):
        return self._bit_reach(self.level1, seeds)

    def has_level_cycle_with_hit(self, node) -> bool:
        """A same-level loop through a repeated state at this (state, position)."""
        for (n2, bit) in self._bit_reach(self.level1, [(node, False)], include_start=False):
            if n2 == node and bit:
                return True
        return False

    def has_growing_cycle(self, node, sym) -> bool:
        """A strictly stack-growing repetition ending under the same top symbol."""
        ru_edges = {}
        for key in set(self.level1) | set(self.raw_push):
            ru_edges[key] = set(self.level1.get(key, ())) | set(self.raw_push.get(key, ()))
        ru = self._bit_reach(ru_edges, [(node, False)])
        seeds = set()
        for ((p1, s1), b1) in ru:
            for (p, delta, q) in self.push[s1]:
                if p == p1 and delta == sym:
                    seeds.add(((q, self.pa.advance(s1)), b1 or self._hit(q)))
        if not seeds:
            return False
        for (n2, bit) in self._bit_reach(self.level1, list(seeds)):
            if n2 == node and bit:
                return True
        return False


def _pda_run_exists(a: SimpleOmegaPDA, w: LassoWord, starts) -> bool:
    """Exact: does any run from the starts satisfy the repeated-state condition?"""
    ra = _RunAnalysis(a, w)
    pa = ra.pa
    s0 = pa.state_of(0)

    # expose the start stacks cell by cell to find all empty-stack points
    empty_points: set[tuple[int, int]] = set()
    head_seeds: set[tuple[tuple[int, int], str]] = set()
    for (state, stack) in starts:
        layer = {(state, s0)}
        for depth, sym in enumerate(stack):
            region = {n2 for (n2, _b) in ra.level_reach([(n, False) for n in layer])}
            for n in region:
                head_seeds.add((n, sym))
            nxt = set()
            for (p, s) in region:
                for (pp, psym, q) in ra.pop[s]:
                    if pp == p and psym == sym:
                        nxt.add((q, pa.advance(s)))
            layer = nxt
            if not layer:
                break
        else:
            empty_points |= layer
            continue
        # stack never fully popped on some prefix; heads were still recorded

    # close the empty-stack points under empty-to-empty travel (same edges as
    # level moves: the empty stack also forbids popping)
    closed_empty = {n2 for (n2, _b) in ra.level_reach([(n, False) for n in empty_points])}
    closed_empty |= empty_points

    # condition (a): an empty-stack repetition through a repeated state
    for n in closed_empty:
        if ra.has_level_cycle_with_hit(n):
            return True

    # reachable heads: pushes from anywhere reachable, closed under level travel
    heads: set[tuple[tuple[int, int], str]] = set(head_seeds)
    frontier = list(head_seeds)
    for n in closed_empty:
        for (p, delta, q) in ra.push[n[1]]:
            if p == n[0]:
                fact = ((q, pa.advance(n[1])), delta)
                if fact not in heads:
                    heads.add(fact)
                    frontier.append(fact)
    while frontier:
        (node, sym) = frontier.pop()
        for (n2, _b) in ra.level_reach([(node, False)]):
            for (p, delta, q) in ra.push[n2[1]]:
                if p == n2[0]:
                    fact = ((q, pa.advance(n2[1])), delta)
                    if fact not in heads:
                        heads.add(fact)
                        frontier.append(fact)

    # condition (b): a repetition at or above some reachable head
    checked_level: set[tuple[int, int]] = set()
    for (node, sym) in heads:
        for (n2, _b) in ra.level_reach([(node, False)]):
            if n2 not in checked_level:
                checked_level.add(n2)
                if ra.has_level_cycle_with_hit(n2):
                    return True
            if ra.has_growing_cycle(n2, sym):
                return True
    return False


# -- serialization ------------------------------------------------------------


def _block_to_sparse(block: Block, names):
    out = []
    for i, row in enumerate(block):
        for j, lp in enumerate(row):
            for a, c in sorted(lp.items()):
                out.append([names[i], names[j], a, _fmt_raw(c.value)])
    return out


def _fmt_raw(v):
    if v is INF:
        return "inf"
    if v is NEG_INF:
        return "-inf"
    return v


def _parse_raw(v):
    if v == "inf":
        return INF
    if v == "-inf":
        return NEG_INF
    return v


def pda_to_json(a: SimpleOmegaPDA) -> str:
    m = a.matrix
    doc = {
        "semiring": m.instance.name,
        "states": list(a.state_names),
        "input_alphabet": list(m.input_alphabet),
        "stack_alphabet": list(m.stack_alphabet),
        "neutral": _block_to_sparse(m.m_eps_eps, a.state_names),
        "push": {
            sym: _block_to_sparse(block, a.state_names)
            for sym, block in sorted(m.m_eps_push.items())
        },
        "pop": {
            sym: _block_to_sparse(block, a.state_names)
            for sym, block in sorted(m.m_pop_eps.items())
        },
        "initial": [_fmt_raw(v.value) for v in a.initial],
        "final": [_fmt_raw(v.value) for v in a.final],
        "buchi_count": a.buchi_count,
    }
    return json.dumps(doc, indent=2)


def pda_from_json(text: str) -> SimpleOmegaPDA:
    doc = json.loads(text)
    inst = instance_by_name(doc["semiring"])
    names = tuple(doc["states"])
    ix = {s: i for i, s in enumerate(names)}
    n = len(names)

    def sparse_to_block(entries):
        acc: dict[tuple[int, int], LetterPoly] = {}
        for src, dst, letter, raw in entries:
            lp = acc.setdefault((ix[src], ix[dst]), {})
            val = inst.value(_parse_raw(raw))
            lp[letter] = lp.get(letter, inst.zero) + val if letter in lp else val
        return _freeze_block(n, acc)

    matrix = ResetPDMatrix(
        inst,
        n,
        tuple(doc["input_alphabet"]),
        tuple(doc["stack_alphabet"]),
        sparse_to_block(doc["neutral"]),
        {sym: sparse_to_block(e) for sym, e in doc["push"].items()},
        {sym: sparse_to_block(e) for sym, e in doc["pop"].items()},
    )
    initial = tuple(inst.value(_parse_raw(v)) for v in doc["initial"])
    final = tuple(inst.value(_parse_raw(v)) for v in doc["final"])
    return SimpleOmegaPDA(matrix, initial, final, doc.get("buchi_count"), names)


def pda_to_dot(a: SimpleOmegaPDA) -> str:
    """Graphviz export; push is rendered as a down arrow, pop as up, neutral as #."""
    m = a.matrix
    lines = ["digraph pda {", "  rankdir=LR;"]
    for i, name in enumerate(a.state_names):
        shape = "doublecircle" if a.buchi_count is not None and i < a.buchi_count else "circle"
        extras = []
        if not a.initial[i].is_zero():
            extras.append("initial")
        if not a.final[i].is_zero():
            extras.append("final")
        label = name if not extras else f"{name}\\n({','.join(extras)})"
        lines.append(f'  "{name}" [shape={shape}, label="{label}"];')

    def emit(block, fmt):
        for i, row in enumerate(block):
            for j, lp in enumerate(row):
                for letter, c in sorted(lp.items()):
                    weight = "" if c.is_one() else f":{_fmt_raw(c.value)}"
                    lines.append(
                        f'  "{a.state_names[i]}" -> "{a.state_names[j]}" '
                        f'[label="{fmt(letter)}{weight}"];'
                    )

    emit(m.m_eps_eps, lambda letter: f"{letter} #")
    for sym, block in sorted(m.m_eps_push.items()):
        emit(block, lambda letter, s=sym: f"{letter} v{s}")
    for sym, block in sorted(m.m_pop_eps.items()):
        emit(block, lambda letter, s=sym: f"{letter} ^{s}")
    lines.append("}")
    return "\n".join(lines)
