"""Greibach normal form pipeline for algebraic and mixed omega systems.

finite_gnf normalizes one algebraic system (empty-word split, chain removal,
binarization, then the matrix-equation transformation that forces a leading
terminal with at most two trailing variables).  The omega constructions
assemble pair systems s t^omega, sum them behind a fresh collector variable,
and finally fold a mixed system back into a single quemiring system whose
last component carries the chosen pair of the canonical solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import json

from .matrix import SemiringMatrix, mat_star
from .semiring import SemiringInstance, SemiringValue
from .series import EPSILON, Polynomial, Word
from .system import (
    AlgebraicSystem,
    CanonicalSelector,
    IllFormedSystem,
    MixedSystem,
    NotStabilized,
    OmegaSystem,
    is_gnf_algebraic,
    is_gnf_mixed,
)


# -- scalar empty-word coefficients and proper form ---------------------------


def eps_coefficients(sys: AlgebraicSystem, max_iter: int = 128) -> list[SemiringValue]:
    """Least solution of the empty-word part, one scalar per variable."""
    inst = sys.instance
    vals = [inst.zero] * len(sys.variables)
    ix = {v: i for i, v in enumerate(sys.variables)}
    terminals = set(sys.terminals)
    for _ in range(max_iter):
        nxt = []
        for p in sys.rhs:
            acc = inst.zero
            for mono in p.monomials:
                if any(s in terminals for s in mono.word):
                    continue
                prod = mono.coeff
                for s in mono.word:
                    prod = prod * vals[ix[s]]
                acc = acc + prod
            nxt.append(acc)
        if nxt == vals:
            return vals
        vals = nxt
    raise NotStabilized("empty-word coefficients did not stabilize")


def proper_form(sys: AlgebraicSystem) -> tuple[AlgebraicSystem, list[SemiringValue]]:
    """Same solutions off the empty word, but all empty-word coefficients zero."""
    inst = sys.instance
    eps = eps_coefficients(sys)
    mapping = {}
    for v, e in zip(sys.variables, eps):
        if not e.is_zero():
            mapping[v] = Polynomial.build(inst, [(e, EPSILON), (inst.one, (v,))])
    new_rhs = []
    for p in sys.rhs:
        q = p.substitute_symbols(mapping) if mapping else p
        new_rhs.append(
            Polynomial.build(
                inst, [(m.coeff, m.word) for m in q.monomials if m.word != EPSILON]
            )
        )
    return (
        AlgebraicSystem(inst, sys.terminals, sys.variables, tuple(new_rhs)),
        eps,
    )


def productive_components(sys: AlgebraicSystem) -> set[str]:
    """Variables whose least-solution component is not the zero series."""
    terminals = set(sys.terminals)
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for v, p in zip(sys.variables, sys.rhs):
            if v in productive:
                continue
            for mono in p.monomials:
                if all(s in terminals or s in productive for s in mono.word):
                    productive.add(v)
                    changed = True
                    break
    return productive


def _unit_elimination(sys: AlgebraicSystem) -> AlgebraicSystem:
    """Fold single-variable monomials into the other rules via a matrix star."""
    inst = sys.instance
    n = len(sys.variables)
    ix = {v: i for i, v in enumerate(sys.variables)}
    unit = [[inst.zero] * n for _ in range(n)]
    rest = []
    for i, p in enumerate(sys.rhs):
        keep = []
        for mono in p.monomials:
            if len(mono.word) == 1 and mono.word[0] in ix:
                j = ix[mono.word[0]]
                unit[i][j] = unit[i][j] + mono.coeff
            else:
                keep.append((mono.coeff, mono.word))
        rest.append(Polynomial.build(inst, keep))
    ustar = mat_star(SemiringMatrix(inst, n, tuple(tuple(r) for r in unit)))
    new_rhs = []
    for i in range(n):
        acc = Polynomial.zero(inst)
        for j in range(n):
            c = ustar.entry(i, j)
            if not c.is_zero():
                acc = acc + rest[j].scale(c)
        new_rhs.append(acc)
    return AlgebraicSystem(inst, sys.terminals, sys.variables, tuple(new_rhs))


class _Names:
    """Deterministic fresh-name supply avoiding a fixed set of taken tokens."""

    def __init__(self, taken):
        self.taken = set(taken)

    def fresh(self, base: str) -> str:
        cand = base
        while cand in self.taken:
            cand = cand + "'"
        self.taken.add(cand)
        return cand


def _binarize(sys: AlgebraicSystem) -> AlgebraicSystem:
    """Rewrite every rule to a single terminal or a pair of variables."""
    inst = sys.instance
    names = _Names(set(sys.variables) | set(sys.terminals))
    new_vars = list(sys.variables)
    new_rhs: dict[str, list[tuple[SemiringValue, Word]]] = {v: [] for v in sys.variables}
    term_var: dict[str, str] = {}
    pair_var: dict[Word, str] = {}

    def var_for_terminal(a: str) -> str:
        if a not in term_var:
            v = names.fresh(f"t_{a}")
            term_var[a] = v
            new_vars.append(v)
            new_rhs[v] = [(inst.one, (a,))]
        return term_var[a]

    def var_for_suffix(word: Word) -> str:
        if len(word) == 1:
            return word[0]
        if word not in pair_var:
            v = names.fresh(f"g{len(pair_var)}")
            pair_var[word] = v
            new_vars.append(v)
            new_rhs[v] = [(inst.one, (word[0], var_for_suffix(word[1:])))]
        return pair_var[word]

    for v, p in zip(sys.variables, sys.rhs):
        for mono in p.monomials:
            w = mono.word
            if len(w) == 1 and w[0] in sys.terminals:
                new_rhs[v].append((mono.coeff, w))
                continue
            if len(w) == 0:
                raise IllFormedSystem("binarization expects a proper system")
            syms = tuple(
                var_for_terminal(s) if s in sys.terminals else s for s in w
            )
            if len(syms) == 1:
                new_rhs[v].append((mono.coeff, syms))
            else:
                new_rhs[v].append((mono.coeff, (syms[0], var_for_suffix(syms[1:]))))

    return AlgebraicSystem(
        inst,
        sys.terminals,
        tuple(new_vars),
        tuple(Polynomial.build(inst, new_rhs[v]) for v in new_vars),
    )


def _leading_terminal_form(sys: AlgebraicSystem) -> AlgebraicSystem:
    """Matrix-equation step: from binary rules to leading-terminal rules.

    Writing the system as x = x A(x) + b with A collecting the coefficients
    of first variables, the least solution equals that of x = b + b Y,
    Y = A + A Y with one fresh variable per live matrix entry; substituting
    the x-equations into the leading position of the Y-equations leaves every
    monomial with a leading terminal and at most two trailing variables.
    """
    inst = sys.instance
    n = len(sys.variables)
    ix = {v: i for i, v in enumerate(sys.variables)}
    b: list[list[tuple[SemiringValue, Word]]] = [[] for _ in range(n)]
    amat: list[list[list[tuple[SemiringValue, str]]]] = [
        [[] for _ in range(n)] for _ in range(n)
    ]
    for p_ix, p in enumerate(sys.rhs):
        for mono in p.monomials:
            w = mono.word
            if len(w) == 1 and w[0] in sys.terminals:
                b[p_ix].append((mono.coeff, w))
            elif len(w) == 2 and w[0] in ix and w[1] in ix:
                # x_p gains x_q * (coeff x_k): entry (q, p) holds coeff, tail k
                amat[ix[w[0]]][p_ix].append((mono.coeff, w[1]))
            else:
                raise IllFormedSystem(f"rule not binarized: {w}")

    live = _plus_support(amat)
    names = _Names(set(sys.variables) | set(sys.terminals))
    yname: dict[tuple[int, int], str] = {}

    def y(q: int, p: int) -> str:
        if (q, p) not in yname:
            yname[(q, p)] = names.fresh(f"r{q}_{p}")
        return yname[(q, p)]

    # x_p = b_p + sum_q b_q y(q, p)
    x_rhs: list[list[tuple[SemiringValue, Word]]] = []
    for p_ix in range(n):
        terms = list(b[p_ix])
        for q in range(n):
            if b[q] and (q, p_ix) in live:
                for c, w in b[q]:
                    terms.append((c, w + (y(q, p_ix),)))
        x_rhs.append(terms)

    # y(q, p) = A[q][p] + sum_r A[q][r] y(r, p), with the leading variable of
    # each A-entry replaced by its x-equation
    y_rhs: dict[tuple[int, int], list[tuple[SemiringValue, Word]]] = {}
    work = list(yname)
    seen = set(yname)
    while work:
        (q, p_ix) = work.pop()
        terms: list[tuple[SemiringValue, Word]] = []
        for c, tail in amat[q][p_ix]:
            for xc, xw in x_rhs[ix[tail]]:
                terms.append((c * xc, xw))
        for r in range(n):
            if not amat[q][r] or (r, p_ix) not in live:
                continue
            yn = y(r, p_ix)
            for c, tail in amat[q][r]:
                for xc, xw in x_rhs[ix[tail]]:
                    terms.append((c * xc, xw + (yn,)))
        y_rhs[(q, p_ix)] = terms
        for key in yname:
            if key not in seen:
                seen.add(key)
                work.append(key)

    all_vars = tuple(sys.variables) + tuple(yname[k] for k in sorted(yname))
    rhs = []
    for v in sys.variables:
        rhs.append(Polynomial.build(inst, x_rhs[ix[v]]))
    for k in sorted(yname):
        rhs.append(Polynomial.build(inst, y_rhs[k]))
    return AlgebraicSystem(inst, sys.terminals, all_vars, tuple(rhs))


def _plus_support(amat) -> set[tuple[int, int]]:
    """Pairs (q, p) connected by a nonempty path in the coefficient graph."""
    n = len(amat)
    reach = {(q, p) for q in range(n) for p in range(n) if amat[q][p]}
    changed = True
    while changed:
        changed = False
        for q in range(n):
            for r in range(n):
                if (q, r) in reach:
                    for p in range(n):
                        if (r, p) in reach and (q, p) not in reach:
                            reach.add((q, p))
                            changed = True
    return reach


@dataclass(frozen=True)
class GnfResult:
    system: AlgebraicSystem
    component_of: dict[str, int]
    eps: dict[str, SemiringValue]


def finite_gnf(sys: AlgebraicSystem) -> GnfResult:
    """Greibach normal form with the same least solution off the empty word.

    Returns the transformed system, the index of each original variable in
    it, and the original empty-word coefficients (the output itself is
    epsilon-free, single leading terminal, at most two trailing variables).
    """
    proper, eps = proper_form(sys)
    eps_map = dict(zip(sys.variables, eps))
    proper = _drop_unproductive(proper, keep=list(sys.variables))
    if is_gnf_algebraic(proper, allow_eps=False):
        return GnfResult(
            proper, {v: i for i, v in enumerate(proper.variables)}, eps_map
        )
    dechained = _unit_elimination(proper)
    binary = _binarize(dechained)
    gnf = _leading_terminal_form(binary)
    gnf = _drop_unproductive(gnf, keep=list(sys.variables))
    if not is_gnf_algebraic(gnf, allow_eps=False):
        raise IllFormedSystem("internal: normal form construction failed")
    comp = {v: gnf.variables.index(v) for v in sys.variables}
    return GnfResult(gnf, comp, eps_map)


def _drop_unproductive(sys: AlgebraicSystem, keep: list[str]) -> AlgebraicSystem:
    """Erase monomials through variables that generate nothing, then prune.

    Variables in `keep` survive even with an empty equation, so component
    indices stay resolvable by name.
    """
    productive = productive_components(sys)
    ix = {v: i for i, v in enumerate(sys.variables)}
    new_rhs = []
    for p in sys.rhs:
        new_rhs.append(
            Polynomial.build(
                sys.instance,
                [
                    (m.coeff, m.word)
                    for m in p.monomials
                    if all(s not in ix or s in productive for s in m.word)
                ],
            )
        )
    trimmed = AlgebraicSystem(sys.instance, sys.terminals, sys.variables, tuple(new_rhs))
    return _prune_unreachable(trimmed, keep)


def _prune_unreachable(sys: AlgebraicSystem, keep: list[str]) -> AlgebraicSystem:
    ix = {v: i for i, v in enumerate(sys.variables)}
    reach = set(keep)
    stack = list(keep)
    while stack:
        v = stack.pop()
        for mono in sys.rhs[ix[v]].monomials:
            for s in mono.word:
                if s in ix and s not in reach:
                    reach.add(s)
                    stack.append(s)
    vars2 = tuple(v for v in sys.variables if v in reach)
    rhs2 = tuple(sys.rhs[ix[v]] for v in vars2)
    return AlgebraicSystem(sys.instance, sys.terminals, vars2, rhs2)


# -- omega decompositions ------------------------------------------------------


@dataclass(frozen=True)
class DecompositionTerm:
    """One summand s t^omega: systems plus designated components.

    For a normalized term, eps_case is "zero" (the s-series has empty-word
    coefficient zero) or "scalar" (the s-series is a scalar multiple of the
    empty word, stored in eps_coeff; s_sys is then unused).
    """

    t_sys: AlgebraicSystem
    t_component: int
    s_sys: AlgebraicSystem | None = None
    s_component: int = 0
    eps_case: str = "zero"
    eps_coeff: SemiringValue | None = None


@dataclass(frozen=True)
class OmegaDecomposition:
    instance: SemiringInstance
    terminals: tuple[str, ...]
    terms: tuple[DecompositionTerm, ...]
    normalized: bool = False

    @property
    def width(self) -> int:
        return len(self.terms)


def normalize_decomposition(d: OmegaDecomposition) -> OmegaDecomposition:
    """Absorb empty-word parts: t-series become epsilon-free, s-series split
    into an epsilon-free term and a scalar term where needed; dead terms drop.
    """
    inst = d.instance
    out: list[DecompositionTerm] = []
    for term in d.terms:
        t_proper, t_eps = proper_form(term.t_sys)
        t_comp = term.t_component
        tname = t_proper.variables[t_comp]
        if tname not in productive_components(t_proper):
            continue
        e_t = t_eps[t_comp]
        if not e_t.is_zero():
            scale = e_t.star()
            alias = _fresh_var(t_proper, "tsc")
            t_proper = AlgebraicSystem(
                inst,
                t_proper.terminals,
                t_proper.variables + (alias,),
                t_proper.rhs
                + (Polynomial.build(inst, [(scale, (tname,))]),),
            )
            t_comp = len(t_proper.variables) - 1

        if term.eps_case == "scalar":
            out.append(
                DecompositionTerm(
                    t_proper, t_comp, None, 0, "scalar", term.eps_coeff
                )
            )
            continue
        s_proper, s_eps = proper_form(term.s_sys)
        e_s = s_eps[term.s_component]
        if not e_s.is_zero():
            out.append(DecompositionTerm(t_proper, t_comp, None, 0, "scalar", e_s))
        sname = s_proper.variables[term.s_component]
        if sname in productive_components(s_proper):
            out.append(
                DecompositionTerm(t_proper, t_comp, s_proper, term.s_component, "zero")
            )
    return OmegaDecomposition(inst, d.terminals, tuple(out), normalized=True)


def _fresh_var(sys: AlgebraicSystem, base: str) -> str:
    names = _Names(set(sys.variables) | set(sys.terminals))
    return names.fresh(base)


# -- pair construction ---------------------------------------------------------


def _rename_prefixed(sys: AlgebraicSystem, prefix: str) -> AlgebraicSystem:
    return sys.rename({v: prefix + v for v in sys.variables})


def _gnf_split(sys: AlgebraicSystem, i: int):
    """Split equation i of a Greibach system into head and tail-by-last-variable.

    Returns (head, tails): head holds the monomials with at most one variable;
    tails[j] holds, for each variable index j, the two-variable monomials
    ending in variable j with that last variable removed.
    """
    inst = sys.instance
    head_terms = []
    tails: dict[int, list] = {}
    ix = {v: k for k, v in enumerate(sys.variables)}
    for mono in sys.rhs[i].monomials:
        w = mono.word
        if len(w) <= 2:
            head_terms.append((mono.coeff, w))
        else:
            tails.setdefault(ix[w[2]], []).append((mono.coeff, w[:2]))
    head = Polynomial.build(inst, head_terms)
    tail_polys = {j: Polynomial.build(inst, terms) for j, terms in tails.items()}
    return head, tail_polys


def build_pair_system(
    t_sys: AlgebraicSystem,
    t_component: int,
    s_sys: AlgebraicSystem | None = None,
    s_component: int = 0,
    eps_case: str = "zero",
    eps_coeff: SemiringValue | None = None,
) -> tuple[MixedSystem, CanonicalSelector]:
    """Mixed system in Greibach form whose first canonical solution carries
    s t^omega (or the scalar variant) on the selected z-component.

    The omega part loops through a fresh accepting variable that replays the
    t-equations, so only genuine t-cycles are accepted.
    """
    inst = t_sys.instance
    if not is_gnf_algebraic(t_sys, allow_eps=False):
        raise IllFormedSystem("pair construction needs an epsilon-free Greibach t-system")
    t = _rename_prefixed(t_sys, "t.")
    m = len(t.variables)
    t_comp = t_component

    if eps_case == "zero":
        if s_sys is None:
            raise IllFormedSystem("missing s-system for the epsilon-free case")
        if not is_gnf_algebraic(s_sys, allow_eps=False):
            raise IllFormedSystem("pair construction needs an epsilon-free Greibach s-system")
        s = _rename_prefixed(s_sys, "s.")
        n = len(s.variables)
        x_vars = s.variables + t.variables
        x_rhs = s.rhs + t.rhs
        terminals = tuple(sorted(set(s.terminals) | set(t.terminals)))
    elif eps_case == "scalar":
        if eps_coeff is None or eps_coeff.is_zero():
            raise IllFormedSystem("scalar case needs a nonzero coefficient")
        s = None
        n = 0
        x_vars = t.variables
        x_rhs = t.rhs
        terminals = tuple(t.terminals)
    else:
        raise IllFormedSystem(f"unknown case {eps_case!r}")

    base = AlgebraicSystem(inst, terminals, x_vars, x_rhs)
    t_head = {}
    t_tails = {}
    for i in range(m):
        hd, tl = _gnf_split(
            AlgebraicSystem(inst, terminals, t.variables, t.rhs), i
        )
        t_head[i], t_tails[i] = hd, tl

    z_acc = "z.acc"
    zt = tuple(f"z.t{i}" for i in range(m))
    rows: dict[str, dict[str, Polynomial]] = {}

    def t_row(i: int) -> dict[str, Polynomial]:
        row = {z_acc: t_head[i]}
        for j, poly in t_tails[i].items():
            row[zt[j]] = poly
        return row

    rows[z_acc] = t_row(t_comp)
    for i in range(m):
        rows[zt[i]] = t_row(i)

    if eps_case == "zero":
        s_only = AlgebraicSystem(inst, terminals, s.variables, s.rhs)
        zs = tuple(f"z.s{i}" for i in range(n))
        for i in range(n):
            hd, tl = _gnf_split(s_only, i)
            row = {z_acc: hd}
            for j, poly in tl.items():
                row[zs[j]] = poly
            rows[zs[i]] = row
        designated = zs[s_component]
        z_vars = (z_acc, designated) + tuple(
            v for v in (zt + zs) if v != designated
        )
    else:
        designated = "z.eps"
        rows[designated] = {
            col: poly.scale(eps_coeff) for col, poly in t_row(t_comp).items()
        }
        z_vars = (z_acc, designated) + zt

    rho = tuple(
        tuple(rows[zi].get(zj, Polynomial.zero(inst)) for zj in z_vars)
        for zi in z_vars
    )
    mixed = MixedSystem(inst, terminals, x_vars, x_rhs, z_vars, rho)
    if not is_gnf_mixed(mixed):
        raise IllFormedSystem("internal: pair construction left Greibach form")
    return mixed, CanonicalSelector(1, 1)


def sum_systems(
    instance: SemiringInstance,
    terminals: Sequence[str],
    parts: Sequence[tuple[MixedSystem, CanonicalSelector]],
) -> tuple[MixedSystem, CanonicalSelector]:
    """Block-diagonal union with a fresh collector variable.

    Every part must designate a non-accepting z-component of its first
    canonical solution; the collector replays those components' rows and the
    l-th canonical solution of the union sums the parts.
    """
    inst = instance
    l = len(parts)
    collector = "z.sum"
    x_vars: list[str] = []
    x_rhs: list[Polynomial] = []
    buchi_vars: list[str] = []
    tail_vars: list[str] = []
    rows: dict[str, dict[str, Polynomial]] = {collector: {}}
    for pidx, (part, sel) in enumerate(parts):
        if sel.buchi_count != 1 or sel.component == 0:
            raise IllFormedSystem(
                "summands must designate a non-accepting component at count 1"
            )
        pre = f"u{pidx}."
        ren_x = {v: pre + v for v in part.x_vars}
        x_vars.extend(pre + v for v in part.x_vars)
        x_rhs.extend(p.rename_symbols(ren_x) for p in part.x_rhs)
        local_order = [part.z_vars[sel.component]] + [
            v for i, v in enumerate(part.z_vars) if i != sel.component and i != 0
        ]
        buchi_vars.append(pre + part.z_vars[0])
        tail_vars.extend(pre + v for v in local_order)
        zix = {v: i for i, v in enumerate(part.z_vars)}
        for zv in part.z_vars:
            row = {}
            for zj in part.z_vars:
                p = part.rho[zix[zv]][zix[zj]]
                if not p.is_zero():
                    row[pre + zj] = p.rename_symbols(ren_x)
            rows[pre + zv] = row
        rows[collector].update(
            {
                col: poly
                for col, poly in rows[pre + part.z_vars[sel.component]].items()
            }
        )
    z_vars = tuple(buchi_vars) + tuple(tail_vars) + (collector,)
    rho = tuple(
        tuple(rows.get(zi, {}).get(zj, Polynomial.zero(inst)) for zj in z_vars)
        for zi in z_vars
    )
    mixed = MixedSystem(inst, tuple(terminals), tuple(x_vars), tuple(x_rhs), z_vars, rho)
    return mixed, CanonicalSelector(l, len(z_vars) - 1)


def char_to_mixed(d: OmegaDecomposition) -> tuple[MixedSystem, CanonicalSelector]:
    """Direct mixed system for a sum of pairs: one accepting loop variable per
    t-series and one collector fed by the s-series."""
    if not d.normalized:
        raise IllFormedSystem("characteristic system needs a normalized decomposition")
    inst = d.instance
    l = d.width
    x_vars: list[str] = []
    x_rhs: list[Polynomial] = []
    s_alias: list[str] = []
    t_alias: list[str] = []
    for j, term in enumerate(d.terms):
        pre = f"c{j}."
        t = _rename_prefixed(term.t_sys, pre + "t.")
        x_vars.extend(t.variables)
        x_rhs.extend(t.rhs)
        t_alias.append(t.variables[term.t_component])
        if term.eps_case == "scalar":
            alias = f"c{j}.s"
            x_vars.append(alias)
            x_rhs.append(Polynomial.build(inst, [(term.eps_coeff, EPSILON)]))
            s_alias.append(alias)
        else:
            s = _rename_prefixed(term.s_sys, pre + "s.")
            x_vars.extend(s.variables)
            x_rhs.extend(s.rhs)
            s_alias.append(s.variables[term.s_component])
    z_vars = tuple(f"z{j}" for j in range(l)) + ("zout",)
    zero = Polynomial.zero(inst)
    rho_rows = []
    for j in range(l):
        row = [zero] * (l + 1)
        row[j] = Polynomial.of_word(inst, (t_alias[j],))
        rho_rows.append(tuple(row))
    last = [zero] * (l + 1)
    for j in range(l):
        last[j] = Polynomial.of_word(inst, (s_alias[j],))
    rho_rows.append(tuple(last))
    mixed = MixedSystem(
        inst, d.terminals, tuple(x_vars), tuple(x_rhs), z_vars, tuple(rho_rows)
    )
    return mixed, CanonicalSelector(l, l)


# -- folding a mixed system into one omega system ------------------------------


def unmix(
    sys: MixedSystem, k: int, l: int, t: int
) -> tuple[OmegaSystem, CanonicalSelector]:
    """One quemiring system whose last component pairs x-component k with
    z-component l at Buchi count t; the omega-loop equations come first so
    the canonical solution keeps accepting exactly the former z-variables."""
    if not is_gnf_mixed(sys):
        raise IllFormedSystem("unmix needs a mixed system in Greibach form")
    if not 0 <= t <= sys.m:
        raise IllFormedSystem("Buchi count out of range")
    inst = sys.instance
    hat = {zv: f"h.{zv}" for zv in sys.z_vars}
    bar = {xv: f"b.{xv}" for xv in sys.x_vars}
    hat_rhs = []
    for i in range(sys.m):
        terms = []
        for j, zj in enumerate(sys.z_vars):
            p = sys.rho[i][j].rename_symbols(bar)
            for mono in p.monomials:
                terms.append((mono.coeff, mono.word + (hat[zj],)))
        hat_rhs.append(Polynomial.build(inst, terms))
    bar_rhs = [p.rename_symbols(bar) for p in sys.x_rhs]
    dot_rhs = bar_rhs[k] + hat_rhs[l]
    variables = (
        tuple(hat[z] for z in sys.z_vars)
        + tuple(bar[x] for x in sys.x_vars)
        + ("ydot",)
    )
    rhs = tuple(hat_rhs) + tuple(bar_rhs) + (dot_rhs,)
    out = OmegaSystem(inst, sys.terminals, variables, rhs)
    return out, CanonicalSelector(t, len(variables) - 1)


# -- canonical decomposition of one omega component ----------------------------


class _Handle:
    """A series given as one component of an algebraic system."""

    __slots__ = ("sys", "comp")

    def __init__(self, sys: AlgebraicSystem, comp: int):
        self.sys = sys
        self.comp = comp


class _HandleAlgebra:
    """Rational combinators on series handles, by gluing systems together."""

    def __init__(self, instance: SemiringInstance, terminals: tuple[str, ...]):
        self.instance = instance
        self.terminals = terminals
        self.counter = 0

    def _fresh(self) -> str:
        self.counter += 1
        return f"v{self.counter}"

    def _merge(self, *systems: AlgebraicSystem):
        variables: list[str] = []
        rhs: list[Polynomial] = []
        offsets = []
        for idx, s in enumerate(systems):
            pre = f"m{self.counter}.{idx}."
            self.counter += 1
            ren = {v: pre + v for v in s.variables}
            offsets.append(len(variables))
            variables.extend(pre + v for v in s.variables)
            rhs.extend(p.rename_symbols(ren) for p in s.rhs)
        return variables, rhs, offsets

    def _make(self, variables, rhs, comp) -> _Handle:
        sys = AlgebraicSystem(
            self.instance, self.terminals, tuple(variables), tuple(rhs)
        )
        return _Handle(_restrict(sys, comp), 0)

    def of_poly(self, poly: Polynomial, base: AlgebraicSystem) -> _Handle:
        variables, rhs, offsets = self._merge(base)
        ren = {v: variables[offsets[0] + i] for i, v in enumerate(base.variables)}
        top = self._fresh()
        variables.append(top)
        rhs.append(poly.rename_symbols(ren))
        return self._make(variables, rhs, len(variables) - 1)

    def zero(self) -> _Handle:
        top = self._fresh()
        return self._make([top], [Polynomial.zero(self.instance)], 0)

    def one(self) -> _Handle:
        top = self._fresh()
        return self._make([top], [Polynomial.of_word(self.instance, EPSILON)], 0)

    def add(self, a: _Handle, b: _Handle) -> _Handle:
        variables, rhs, offsets = self._merge(a.sys, b.sys)
        top = self._fresh()
        va = variables[offsets[0] + a.comp]
        vb = variables[offsets[1] + b.comp]
        variables.append(top)
        rhs.append(
            Polynomial.build(
                self.instance,
                [(self.instance.one, (va,)), (self.instance.one, (vb,))],
            )
        )
        return self._make(variables, rhs, len(variables) - 1)

    def mul(self, a: _Handle, b: _Handle) -> _Handle:
        variables, rhs, offsets = self._merge(a.sys, b.sys)
        top = self._fresh()
        va = variables[offsets[0] + a.comp]
        vb = variables[offsets[1] + b.comp]
        variables.append(top)
        rhs.append(Polynomial.of_word(self.instance, (va, vb)))
        return self._make(variables, rhs, len(variables) - 1)

    def star(self, a: _Handle) -> _Handle:
        variables, rhs, offsets = self._merge(a.sys)
        top = self._fresh()
        va = variables[offsets[0] + a.comp]
        variables.append(top)
        rhs.append(
            Polynomial.build(
                self.instance,
                [(self.instance.one, (va, top)), (self.instance.one, EPSILON)],
            )
        )
        return self._make(variables, rhs, len(variables) - 1)


def _restrict(sys: AlgebraicSystem, comp: int) -> AlgebraicSystem:
    keep = [sys.variables[comp]]
    pruned = _drop_unproductive(sys, keep)
    order = (keep[0],) + tuple(v for v in pruned.variables if v != keep[0])
    ix = {v: i for i, v in enumerate(pruned.variables)}
    return AlgebraicSystem(
        sys.instance,
        sys.terminals,
        order,
        tuple(pruned.rhs[ix[v]] for v in order),
    )


def _handle_mat_star(alg: _HandleAlgebra, mat: list[list[_Handle]]):
    n = len(mat)
    a = [row[:] for row in mat]
    for kk in range(n):
        pivot = alg.star(a[kk][kk])
        row_k = list(a[kk])
        col_k = [a[i][kk] for i in range(n)]
        for i in range(n):
            left = alg.mul(col_k[i], pivot)
            for j in range(n):
                a[i][j] = alg.add(a[i][j], alg.mul(left, row_k[j]))
    for i in range(n):
        a[i][i] = alg.add(a[i][i], alg.one())
    return a


def _handle_omega_terms(alg: _HandleAlgebra, mat: list[list[_Handle]]):
    """Per component: the pairs (s, t) with component value sum of s t^omega."""
    n = len(mat)
    if n == 0:
        return []
    if n == 1:
        return [[(alg.one(), mat[0][0])]]
    a = mat[0][0]
    b = [mat[0][j] for j in range(1, n)]
    c = [mat[i][0] for i in range(1, n)]
    d = [[mat[i][j] for j in range(1, n)] for i in range(1, n)]
    dstar = _handle_mat_star(alg, d)
    f = a
    for i in range(n - 1):
        for j in range(n - 1):
            f = alg.add(f, alg.mul(alg.mul(b[i], dstar[i][j]), c[j]))
    astar = alg.star(a)
    g = [
        [alg.add(d[i][j], alg.mul(alg.mul(c[i], astar), b[j])) for j in range(n - 1)]
        for i in range(n - 1)
    ]
    d_omega = _handle_omega_terms(alg, d)
    g_omega = _handle_omega_terms(alg, g)
    gstar = _handle_mat_star(alg, g)
    fstar = alg.star(f)
    first = [(alg.one(), f)]
    for j in range(n - 1):
        for (s, t) in d_omega[j]:
            first.append((alg.mul(alg.mul(fstar, b[j]), s), t))
    rest = []
    for i in range(n - 1):
        terms = list(g_omega[i])
        for tt in range(n - 1):
            terms.append((alg.mul(gstar[i][tt], c[tt]), a))
        rest.append(terms)
    return [first] + rest


def _handle_omega_t_terms(alg: _HandleAlgebra, mat: list[list[_Handle]], t: int):
    n = len(mat)
    if t == 0:
        return [[] for _ in range(n)]
    if t == n:
        return _handle_omega_terms(alg, mat)
    a = [[mat[i][j] for j in range(t)] for i in range(t)]
    b = [[mat[i][j] for j in range(t, n)] for i in range(t)]
    c = [[mat[i][j] for j in range(t)] for i in range(t, n)]
    d = [[mat[i][j] for j in range(t, n)] for i in range(t, n)]
    dstar = _handle_mat_star(alg, d)
    f = [
        [
            a[i][j]
            for j in range(t)
        ]
        for i in range(t)
    ]
    for i in range(t):
        for j in range(t):
            for p in range(n - t):
                for q in range(n - t):
                    f[i][j] = alg.add(
                        f[i][j], alg.mul(alg.mul(b[i][p], dstar[p][q]), c[q][j])
                    )
    top = _handle_omega_terms(alg, f)
    dc = [
        [
            None
            for j in range(t)
        ]
        for i in range(n - t)
    ]
    for i in range(n - t):
        for j in range(t):
            acc = alg.zero()
            for q in range(n - t):
                acc = alg.add(acc, alg.mul(dstar[i][q], c[q][j]))
            dc[i][j] = acc
    bottom = []
    for i in range(n - t):
        terms = []
        for j in range(t):
            for (s, tt) in top[j]:
                terms.append((alg.mul(dc[i][j], s), tt))
        bottom.append(terms)
    return top + bottom


def decompose_canonical(
    sys: MixedSystem, k: int, component: int
) -> OmegaDecomposition:
    """Express one omega component of the k-th canonical solution as a sum of
    pairs s t^omega of algebraic series, by unfolding the restricted omega
    operator on the z-coefficient matrix symbolically."""
    alg = _HandleAlgebra(sys.instance, tuple(sys.terminals))
    base = sys.x_part
    mat = [
        [alg.of_poly(sys.rho[i][j], base) for j in range(sys.m)]
        for i in range(sys.m)
    ]
    terms = _handle_omega_t_terms(alg, mat, k)[component]
    dterms = []
    for (s, t) in terms:
        dterms.append(
            DecompositionTerm(
                t_sys=_compact_names(t.sys),
                t_component=t.comp,
                s_sys=_compact_names(s.sys),
                s_component=s.comp,
                eps_case="zero",
            )
        )
    return OmegaDecomposition(sys.instance, tuple(sys.terminals), tuple(dterms))


def _compact_names(sys: AlgebraicSystem) -> AlgebraicSystem:
    names = _Names(set(sys.terminals))
    return sys.rename({v: names.fresh(f"d{i}") for i, v in enumerate(sys.variables)})


# -- pipeline report -----------------------------------------------------------


@dataclass
class GnfPipelineReport:
    """Stage-by-stage record of one normal form run."""

    stages: list[dict] = field(default_factory=list)

    def add(self, name: str, **info):
        self.stages.append({"stage": name, **info})

    def to_json(self) -> str:
        return json.dumps({"stages": self.stages}, indent=2, default=str)


def pipeline_from_decomposition(
    d: OmegaDecomposition, unmix_k: int = 0, report: GnfPipelineReport | None = None
):
    """Normalize, bring every summand to Greibach form, build and sum the pair
    systems, and fold into one omega system.  Returns the stages and selectors.
    """
    rep = report if report is not None else GnfPipelineReport()
    norm = d if d.normalized else normalize_decomposition(d)
    rep.add("normalize", terms=len(norm.terms))
    parts = []
    for term in norm.terms:
        t_res = finite_gnf(term.t_sys)
        if term.eps_case == "scalar":
            part = build_pair_system(
                t_res.system,
                t_res.component_of[term.t_sys.variables[term.t_component]],
                eps_case="scalar",
                eps_coeff=term.eps_coeff,
            )
        else:
            s_res = finite_gnf(term.s_sys)
            part = build_pair_system(
                t_res.system,
                t_res.component_of[term.t_sys.variables[term.t_component]],
                s_res.system,
                s_res.component_of[term.s_sys.variables[term.s_component]],
                eps_case="zero",
            )
        parts.append(part)
    rep.add("pairs", count=len(parts))
    mixed, selector = sum_systems(norm.instance, norm.terminals, parts)
    rep.add(
        "sum",
        z_vars=len(mixed.z_vars),
        x_vars=len(mixed.x_vars),
        gnf=is_gnf_mixed(mixed),
        buchi=selector.buchi_count,
        component=selector.component,
    )
    omega_sys, omega_sel = unmix(
        mixed, unmix_k, selector.component, selector.buchi_count
    )
    rep.add(
        "unmix",
        variables=len(omega_sys.variables),
        buchi=omega_sel.buchi_count,
        component=omega_sel.component,
    )
    return norm, mixed, selector, omega_sys, omega_sel, rep
