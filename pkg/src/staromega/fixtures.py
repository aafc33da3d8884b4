"""Worked example systems and automata used by the check suites and tests."""

from __future__ import annotations

from .semiring import ARCTIC, BOOLEAN, TROPICAL, SemiringValue
from .series import Polynomial, parse_polynomial
from .system import AlgebraicSystem, MixedSystem, OmegaSystem
from .pda import ResetPDMatrix, SimpleOmegaPDA


def _p(inst, text: str) -> Polynomial:
    return parse_polynomial(text, inst)


def tropical_mixed_system() -> MixedSystem:
    """x1 = 1 a x1 b + 1 a b;  z1 = c z1;  z2 = x1 z1 + z1  (min-plus weights)."""
    t = TROPICAL
    return MixedSystem(
        t,
        ("a", "b", "c"),
        ("x1",),
        (_p(t, "(1) a x1 b | (1) a b"),),
        ("z1", "z2"),
        (
            (_p(t, "c"), Polynomial.zero(t)),
            (_p(t, "x1 | eps"), Polynomial.zero(t)),
        ),
    )


def boolean_omega_system() -> OmegaSystem:
    """y1 = y2 y1 + eps;  y2 = a y2 b + eps over the Boolean semiring."""
    b = BOOLEAN
    return OmegaSystem(
        b,
        ("a", "b"),
        ("y1", "y2"),
        (_p(b, "y2 y1 | eps"), _p(b, "a y2 b | eps")),
    )


def pair_example_systems() -> tuple[AlgebraicSystem, AlgebraicSystem]:
    """Greibach systems for s = a^n b^n -> n and t = (dd)*c -> 0 (min-plus)."""
    t = TROPICAL
    s_sys = AlgebraicSystem(
        t,
        ("a", "b", "c", "d"),
        ("x1", "x2"),
        (_p(t, "(1) a x2 | (1) a x1 x2"), _p(t, "b")),
    )
    t_sys = AlgebraicSystem(
        t,
        ("a", "b", "c", "d"),
        ("x1", "x2"),
        (_p(t, "c | d x2 x1"), _p(t, "d")),
    )
    return s_sys, t_sys


def arctic_block_system() -> AlgebraicSystem:
    """Max-plus system whose S-component weighs a^{n1}b^{n1}...a^{nk}b^{nk} by max n_i.

    Variables: T, S, R, Q, B; component S (index 1) is the interesting one.
    """
    a = ARCTIC
    return AlgebraicSystem(
        a,
        ("a", "b"),
        ("T", "S", "R", "Q", "B"),
        (
            _p(a, "a Q T | a Q"),
            _p(a, "a Q S | (1) a R T | (1) a R"),
            _p(a, "b | (1) a R B"),
            _p(a, "b | a Q B"),
            _p(a, "b"),
        ),
    )


def tropical_omega_automaton() -> SimpleOmegaPDA:
    """Four-state min-plus automaton with behavior a^n b^n c^omega -> n.

    State 1 loops on c and is the only repeated state; reading a pushes with
    weight 1, reading b pops with weight 0.
    """
    t = TROPICAL
    n = 4

    def block(entries):
        rows = [[{} for _ in range(n)] for _ in range(n)]
        for (i, j, letter, weight) in entries:
            rows[i][j][letter] = t.value(weight)
        return tuple(tuple(r) for r in rows)

    matrix = ResetPDMatrix(
        t,
        n,
        ("a", "b", "c"),
        ("Z0", "X"),
        block([(0, 0, "c", 0), (1, 0, "c", 0)]),
        {"Z0": block([(1, 2, "a", 1)]), "X": block([(2, 2, "a", 1)])},
        {
            "X": block([(2, 3, "b", 0), (3, 3, "b", 0)]),
            "Z0": block([(2, 0, "b", 0), (3, 0, "b", 0)]),
        },
    )
    initial = tuple(t.one if q == 1 else t.zero for q in range(n))
    final = tuple(t.zero for _ in range(n))
    return SimpleOmegaPDA(matrix, initial, final, 1, ("1", "2", "3", "4"))


def contrast_mixed_system() -> MixedSystem:
    """x1 = a + c x1; x2 = a x1 x2 + a x1; z1 = c z1; z2 = a z1 + a x1 z2."""
    b = BOOLEAN
    return MixedSystem(
        b,
        ("a", "c"),
        ("x1", "x2"),
        (_p(b, "a | c x1"), _p(b, "a x1 x2 | a x1")),
        ("z1", "z2"),
        (
            (_p(b, "c"), Polynomial.zero(b)),
            (_p(b, "a"), _p(b, "a x1")),
        ),
    )


def max_block_weight(word: tuple[str, ...]) -> SemiringValue:
    """Arctic oracle: max n_i over a^{n1} b^{n1} ... blocks, zero off the language."""
    a = ARCTIC
    i, best = 0, None
    w = "".join(word)
    if not w:
        return a.zero
    while i < len(w):
        if w[i] != "a":
            return a.zero
        j = i
        while j < len(w) and w[j] == "a":
            j += 1
        k = j
        while k < len(w) and w[k] == "b":
            k += 1
        if (k - j) != (j - i):
            return a.zero
        best = max(best or 0, j - i)
        i = k
    return a.value(best)
