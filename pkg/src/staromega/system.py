"""Equation systems over series and their canonical solutions.

Algebraic systems x = p(x) are solved for their finite parts by truncated
Kleene iteration; omega-parts of mixed systems are evaluated at ultimately
periodic words by an exact search over the period quotient, backed by a
grammar-level emptiness analysis that decides whether any accepting run
exists at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ._search import HitEdge, PositionAutomaton, lasso_value
from .matrix import SemiringMatrix, mat_star
from .semiring import SemiringError, SemiringInstance, SemiringValue
from .series import (
    Alphabet,
    LassoWord,
    Polynomial,
    TruncatedSeries,
    Word,
    split_px,
    substitute,
)


class IllFormedSystem(ValueError):
    pass


class NotStabilized(RuntimeError):
    """Kleene iteration did not reach a fixed point within the allowed rounds."""


@dataclass(frozen=True)
class AlgebraicSystem:
    """x = p(x): one polynomial over terminals and variables per variable."""

    instance: SemiringInstance
    terminals: tuple[str, ...]
    variables: tuple[str, ...]
    rhs: tuple[Polynomial, ...]

    def __post_init__(self):
        Alphabet(self.terminals, self.variables)
        if len(self.rhs) != len(self.variables):
            raise IllFormedSystem("one equation per variable required")
        allowed = set(self.terminals) | set(self.variables)
        for v, p in zip(self.variables, self.rhs):
            if p.instance is not self.instance:
                raise SemiringError("equation over a different instance")
            bad = p.symbols() - allowed
            if bad:
                raise IllFormedSystem(f"equation for {v} uses undeclared symbols {sorted(bad)}")

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.terminals, self.variables)

    def var_index(self, name: str) -> int:
        return self.variables.index(name)

    def rename(self, mapping: Mapping[str, str]) -> "AlgebraicSystem":
        return AlgebraicSystem(
            self.instance,
            self.terminals,
            tuple(mapping.get(v, v) for v in self.variables),
            tuple(p.rename_symbols(mapping) for p in self.rhs),
        )


@dataclass(frozen=True)
class OmegaSystem:
    """y = p(y) over the quemiring of finite and omega series."""

    instance: SemiringInstance
    terminals: tuple[str, ...]
    variables: tuple[str, ...]
    rhs: tuple[Polynomial, ...]

    def __post_init__(self):
        AlgebraicSystem(self.instance, self.terminals, self.variables, self.rhs)

    @property
    def n(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class MixedSystem:
    """x = p(x) plus the z-linear system z = rho(x) z."""

    instance: SemiringInstance
    terminals: tuple[str, ...]
    x_vars: tuple[str, ...]
    x_rhs: tuple[Polynomial, ...]
    z_vars: tuple[str, ...]
    rho: tuple[tuple[Polynomial, ...], ...]

    def __post_init__(self):
        AlgebraicSystem(self.instance, self.terminals, self.x_vars, self.x_rhs)
        m = len(self.z_vars)
        if len(self.rho) != m or any(len(row) != m for row in self.rho):
            raise IllFormedSystem("z-coefficient matrix must be square over the z-variables")
        allowed = set(self.terminals) | set(self.x_vars)
        for row in self.rho:
            for p in row:
                if p.instance is not self.instance:
                    raise SemiringError("z-entry over a different instance")
                bad = p.symbols() - allowed
                if bad:
                    raise IllFormedSystem(f"z-entry uses undeclared symbols {sorted(bad)}")
        if set(self.z_vars) & (set(self.x_vars) | set(self.terminals)):
            raise IllFormedSystem("z-variable names clash with the finite alphabet")

    @property
    def n(self) -> int:
        return len(self.x_vars)

    @property
    def m(self) -> int:
        return len(self.z_vars)

    @property
    def x_part(self) -> AlgebraicSystem:
        return AlgebraicSystem(self.instance, self.terminals, self.x_vars, self.x_rhs)


@dataclass(frozen=True)
class CanonicalSelector:
    """Which canonical solution (Buchi count) and which component to read."""

    buchi_count: int
    component: int


def derived_names(y_vars: Sequence[str], taken: set[str], head: str) -> tuple[str, ...]:
    """Deterministic fresh names: y1 -> x1 style when free, else prefixed."""
    out = []
    for v in y_vars:
        cand = head + v[1:] if v[:1] == "y" else f"{head}_{v}"
        while cand in taken or cand in out:
            cand = cand + "_"
        out.append(cand)
    return tuple(out)


def induce_mixed(sys: OmegaSystem) -> MixedSystem:
    """Split a quemiring system into its finite part and the induced z-linear part."""
    taken = set(sys.terminals) | set(sys.variables)
    x_names = derived_names(sys.variables, taken, "x")
    z_names = derived_names(sys.variables, taken | set(x_names), "z")
    x_of = dict(zip(sys.variables, x_names))
    z_of = dict(zip(sys.variables, z_names))
    x_rhs = tuple(p.rename_symbols(x_of) for p in sys.rhs)
    rows = []
    for p in sys.rhs:
        expanded = split_px(p, sys.variables, x_of, z_of)
        row = []
        for zname in z_names:
            entry_terms = []
            for mono in expanded.monomials:
                if mono.word and mono.word[-1] == zname:
                    entry_terms.append((mono.coeff, mono.word[:-1]))
            row.append(Polynomial.build(sys.instance, entry_terms))
        rows.append(tuple(row))
    return MixedSystem(
        sys.instance, sys.terminals, x_names, x_rhs, z_names, tuple(rows)
    )


# -- Greibach normal form predicates ----------------------------------------


def _gnf_word_ok(word: Word, terminals: set[str], variables: set[str], allow_eps: bool) -> bool:
    if not word:
        return allow_eps
    if word[0] not in terminals:
        return False
    tail = word[1:]
    return len(tail) <= 2 and all(s in variables for s in tail)


def is_gnf_algebraic(sys: AlgebraicSystem, allow_eps: bool = False) -> bool:
    ts, vs = set(sys.terminals), set(sys.variables)
    return all(
        _gnf_word_ok(m.word, ts, vs, allow_eps) for p in sys.rhs for m in p.monomials
    )


def is_gnf_omega(sys: OmegaSystem) -> bool:
    ts, vs = set(sys.terminals), set(sys.variables)
    return all(
        _gnf_word_ok(m.word, ts, vs, True) for p in sys.rhs for m in p.monomials
    )


def is_gnf_mixed(sys: MixedSystem) -> bool:
    ts, vs = set(sys.terminals), set(sys.x_vars)
    for p in sys.x_rhs:
        if not all(_gnf_word_ok(m.word, ts, vs, True) for m in p.monomials):
            return False
    for row in sys.rho:
        for p in row:
            for m in p.monomials:
                w = m.word
                if len(w) == 1 and w[0] in ts:
                    continue
                if len(w) == 2 and w[0] in ts and w[1] in vs:
                    continue
                return False
    return True


# -- finite parts ------------------------------------------------------------


def _kleene(sys: AlgebraicSystem, max_len: int, max_iter: int):
    zero = TruncatedSeries(sys.instance, max_len, {})
    current = [zero] * len(sys.variables)
    for it in range(1, max_iter + 1):
        assignment = dict(zip(sys.variables, current))
        nxt = [substitute(p, assignment, max_len) for p in sys.rhs]
        if nxt == current:
            return current, it
        current = nxt
    raise NotStabilized(
        f"solution not stabilized after {max_iter} rounds at truncation {max_len}"
    )


def least_solution_finite(
    sys: AlgebraicSystem, max_len: int, max_iter: int = 256
) -> list[TruncatedSeries]:
    """Coefficients of the least solution on all words up to max_len.

    Iterates the system from zero until the truncation stops changing; a
    system that keeps moving past max_iter raises NotStabilized rather than
    returning a partial answer.
    """
    series, _ = _kleene(sys, max_len, max_iter)
    return series


def kleene_rounds(sys: AlgebraicSystem, max_len: int, max_iter: int = 256) -> int:
    """Number of rounds until stabilization (diagnostic, used by the law suite)."""
    _, rounds = _kleene(sys, max_len, max_iter)
    return rounds


def oracle_coeff_gnf(sys: AlgebraicSystem, component: int, w: Word) -> SemiringValue:
    """Coefficient of w by direct enumeration of leftmost derivations.

    Only valid for Greibach-shaped systems (every non-empty monomial emits a
    leading terminal), which bounds derivation length by |w|.
    """
    if not is_gnf_algebraic(sys, allow_eps=True):
        raise IllFormedSystem("derivation oracle requires a Greibach-shaped system")
    inst = sys.instance
    rules = dict(zip(sys.variables, sys.rhs))
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def derive(stack: tuple[str, ...], pos: int) -> SemiringValue:
        if not stack:
            return inst.one if pos == len(w) else inst.zero
        head, rest = stack[0], stack[1:]
        acc = inst.zero
        for mono in rules[head].monomials:
            if not mono.word:
                acc = acc + mono.coeff * derive(rest, pos)
            elif pos < len(w) and mono.word[0] == w[pos]:
                acc = acc + mono.coeff * derive(tuple(mono.word[1:]) + rest, pos + 1)
        return acc

    return derive((sys.variables[component],), 0)


# -- coefficients on segments of a fixed word --------------------------------


class SegmentTable:
    """Least-solution coefficients restricted to the segments of one word.

    Sparse: only nonzero coefficients are stored, indexed both by segment and
    by (variable, start) so polynomial evaluation only walks live entries.
    """

    def __init__(self, sys: AlgebraicSystem, word: Word, max_iter: int = 256):
        self.sys = sys
        self.word = word
        self.instance = sys.instance
        self.var_set = set(sys.variables)
        n = len(word)
        table: dict[tuple[str, int, int], SemiringValue] = {}
        by_start: dict[tuple[str, int], list[tuple[int, SemiringValue]]] = {}
        self.table, self.by_start = table, by_start
        for _ in range(max_iter):
            nxt: dict[tuple[str, int, int], SemiringValue] = {}
            for vi, v in enumerate(sys.variables):
                for i in range(n + 1):
                    for j, val in self._eval_poly_from(sys.rhs[vi], i, n).items():
                        if not val.is_zero():
                            nxt[(v, i, j)] = val
            if nxt == table:
                return
            table = nxt
            by_start = {}
            for (v, i, j), val in table.items():
                by_start.setdefault((v, i), []).append((j, val))
            self.table, self.by_start = table, by_start
        raise NotStabilized("segment solution did not stabilize")

    def _eval_poly_from(self, p: Polynomial, lo: int, hi_max: int) -> dict[int, SemiringValue]:
        """All segment ends >= lo with their coefficients under p."""
        out: dict[int, SemiringValue] = {}
        for mono in p.monomials:
            cur = {lo: mono.coeff}
            for sym in mono.word:
                nxt: dict[int, SemiringValue] = {}
                if sym in self.var_set:
                    for pos, c in cur.items():
                        for end, t in self.by_start.get((sym, pos), ()):
                            add = c * t
                            prev = nxt.get(end)
                            nxt[end] = add if prev is None else prev + add
                else:
                    for pos, c in cur.items():
                        if pos < hi_max and self.word[pos] == sym:
                            prev = nxt.get(pos + 1)
                            nxt[pos + 1] = c if prev is None else prev + c
                cur = nxt
                if not cur:
                    break
            for end, c in cur.items():
                prev = out.get(end)
                out[end] = c if prev is None else prev + c
        return out

    def coeff(self, var: str, lo: int, hi: int) -> SemiringValue:
        got = self.table.get((var, lo, hi))
        return self.instance.zero if got is None else got

    def poly_coeff(self, p: Polynomial, lo: int, hi: int) -> SemiringValue:
        got = self._eval_poly_from(p, lo, hi).get(hi)
        return self.instance.zero if got is None else got



# -- support analysis (grammar-level emptiness over the period quotient) -----


def support_triples(
    sys: AlgebraicSystem, pa: PositionAutomaton
) -> dict[tuple[str, int], set[tuple[int, bool]]]:
    """(variable, state) -> reachable (state, consumed-a-letter) derivation facts."""
    gen: dict[tuple[str, int], set[tuple[int, bool]]] = {
        (v, s): set() for v in sys.variables for s in range(pa.size)
    }
    changed = True
    while changed:
        changed = False
        for vi, v in enumerate(sys.variables):
            for s in range(pa.size):
                res = _chain_states(sys.rhs[vi], s, pa, gen, set(sys.variables))
                tgt = gen[(v, s)]
                before = len(tgt)
                tgt |= res
                if len(tgt) != before:
                    changed = True
    return gen


def _chain_states(p: Polynomial, start: int, pa, gen, variables) -> set[tuple[int, bool]]:
    out: set[tuple[int, bool]] = set()
    for mono in p.monomials:
        frontier = {(start, False)}
        for sym in mono.word:
            nxt: set[tuple[int, bool]] = set()
            if sym in variables:
                for (s, b) in frontier:
                    for (s2, b2) in gen[(sym, s)]:
                        nxt.add((s2, b or b2))
            else:
                for (s, b) in frontier:
                    if pa.letter(s) == sym:
                        nxt.add((pa.advance(s), True))
            frontier = nxt
            if not frontier:
                break
        out |= frontier
    return out


def _accepting_support_run_exists(
    sys: MixedSystem, k: int, component: int, pa: PositionAutomaton, gen
) -> bool:
    """Does any run with Buchi z-indices below k exist at support level?"""
    variables = set(sys.x_vars)
    m = sys.m
    edges: dict[tuple[int, int], list[tuple[tuple[int, int], bool]]] = {}
    for j in range(m):
        for s in range(pa.size):
            outs = []
            for j2 in range(m):
                if sys.rho[j][j2].is_zero():
                    continue
                for (s2, bit) in _chain_states(sys.rho[j][j2], s, pa, gen, variables):
                    outs.append(((j2, s2), bit))
            edges[(j, s)] = outs
    start = (component, pa.state_of(0))
    seen = {start}
    stack = [start]
    while stack:
        n = stack.pop()
        for (tgt, _bit) in edges.get(n, ()):
            if tgt not in seen:
                seen.add(tgt)
                stack.append(tgt)
    from ._search import _sccs

    plain = {
        n: [(tgt, None) for tgt, _b in edges.get(n, ())] for n in seen
    }
    comps = _sccs(sorted(seen), plain)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for n in comp:
            comp_of[n] = ci
    has_buchi = [False] * len(comps)
    has_letter = [False] * len(comps)
    for n in seen:
        j, _s = n
        if j < k:
            has_buchi[comp_of[n]] = True
        for (tgt, bit) in edges.get(n, ()):
            if tgt in seen and comp_of[tgt] == comp_of[n] and bit:
                has_letter[comp_of[n]] = True
    return any(b and l for b, l in zip(has_buchi, has_letter))


# -- omega evaluation at lasso words -----------------------------------------


@dataclass(frozen=True)
class LassoCaps:
    """Bounds for the lasso search; factor_len caps one factor's length."""

    factor_len: int
    periods: int

    def __post_init__(self):
        if self.factor_len < 1 or self.periods < 1:
            raise IllFormedSystem("caps must be positive")


def default_lasso_caps(sys: MixedSystem, w: LassoWord) -> LassoCaps:
    return LassoCaps(
        factor_len=len(w.prefix) + 4 * len(w.period),
        periods=2 * sys.m * len(w.period) + 4,
    )


OK = "ok"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class LassoResult:
    status: str
    value: SemiringValue | None = None

    @property
    def conclusive(self) -> bool:
        return self.status == OK


def canonical_omega_lasso(
    sys: MixedSystem,
    k: int,
    component: int,
    w: LassoWord,
    caps: LassoCaps | None = None,
) -> LassoResult:
    """Value of one omega-component of the k-th canonical solution at u v^omega.

    The sum ranges over infinite runs through the z-coefficient matrix of the
    least finite solution, Buchi-restricted to the first k z-variables.  Runs
    are searched on the period quotient with factors up to caps.factor_len;
    a grammar-level emptiness check decides the zero cases exactly, so
    "inconclusive" only remains when runs exist but no in-cap certificate
    was found.
    """
    inst = sys.instance
    if not inst.idempotent:
        raise SemiringError(
            f"omega evaluation by lasso search needs an idempotent instance, not {inst.name}"
        )
    m = sys.m
    if not 0 <= k <= m:
        raise IllFormedSystem(f"Buchi count {k} out of range 0..{m}")
    if not 0 <= component < m:
        raise IllFormedSystem(f"z-component {component} out of range")
    if caps is None:
        caps = default_lasso_caps(sys, w)

    pa = PositionAutomaton.of(w)
    gen = support_triples(sys.x_part, pa)
    accepting = _accepting_support_run_exists(sys, k, component, pa, gen)
    if not accepting:
        return LassoResult(OK, inst.zero)
    if inst.name == "boolean":
        return LassoResult(OK, inst.one)

    value = _canonical_search(sys, k, component, w, caps, pa)
    if value.is_zero():
        return LassoResult(INCONCLUSIVE)
    return LassoResult(OK, value)


def _canonical_search(sys, k, component, w, caps, pa) -> SemiringValue:
    inst = sys.instance
    m = sys.m
    F = caps.factor_len
    reps = (len(w.period) + F) // len(w.period) + 2
    sample = w.prefix + w.period * reps
    table = SegmentTable(sys.x_part, sample)

    eps = [[table.poly_coeff(sys.rho[i][j], 0, 0) for j in range(m)] for i in range(m)]
    eps_trivial = all(v.is_zero() for row in eps for v in row)
    hits = _epsilon_closure_with_hits(inst, eps, k)

    edges: dict[tuple[int, int], list[HitEdge]] = {
        (j, s): [] for j in range(m) for s in range(pa.size)
    }
    for s in range(pa.size):
        for length in range(1, F + 1):
            target = pa.advance_by(s, length)
            amat: dict[tuple[int, int], SemiringValue] = {}
            for i in range(m):
                for j in range(m):
                    c = table.poly_coeff(sys.rho[i][j], s, s + length)
                    if not c.is_zero():
                        amat[(i, j)] = c
            if eps_trivial:
                for (i, j2), c in amat.items():
                    edges[(i, s)].append(HitEdge((j2, target), c, False))
                continue
            for bit in (False, True):
                h = hits[1 if bit else 0]
                acc: dict[tuple[int, int], SemiringValue] = {}
                for (mid, j2), c in amat.items():
                    for j in range(m):
                        hv = h[j][mid]
                        if hv.is_zero():
                            continue
                        key = (j, j2)
                        add = hv * c
                        prev = acc.get(key)
                        acc[key] = add if prev is None else prev + add
                for (j, j2), c in acc.items():
                    edges[(j, s)].append(HitEdge((j2, target), c, bit))

    return lasso_value(
        inst,
        edges,
        {(component, pa.state_of(0)): inst.one},
        is_anchor=lambda node: pa.is_periodic(node[1]),
        is_buchi=lambda node: node[0] < k,
    )


def _epsilon_closure_with_hits(inst, eps, k):
    """Closure of the empty-factor step matrix, split by Buchi visits en route."""
    m = len(eps)
    if all(v.is_zero() for row in eps for v in row):
        one, zero = inst.one, inst.zero
        ident = [[one if i == j else zero for j in range(m)] for i in range(m)]
        return ident, [[zero] * m for _ in range(m)]
    size = 2 * m
    zero = inst.zero
    rows = [[zero] * size for _ in range(size)]
    for j in range(m):
        for j2 in range(m):
            v = eps[j][j2]
            if v.is_zero():
                continue
            for b in (0, 1):
                b2 = 1 if (b or j2 < k) else 0
                src, dst = j + b * m, j2 + b2 * m
                rows[src][dst] = rows[src][dst] + v
    star = mat_star(SemiringMatrix(inst, size, tuple(tuple(r) for r in rows)))
    h0 = [[star.entry(j, j2) for j2 in range(m)] for j in range(m)]
    h1 = [[star.entry(j, m + j2) for j2 in range(m)] for j in range(m)]
    return h0, h1
