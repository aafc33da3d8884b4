import itertools
import random

import pytest

from staromega.checks import random_gnf_system
from staromega.fixtures import (
    arctic_block_system,
    contrast_mixed_system,
    max_block_weight,
    tropical_omega_automaton,
)
from staromega.pda import (
    EpsilonCoefficient,
    PdaLassoCaps,
    SimpleOmegaPDA,
    behavior_finite,
    behavior_omega_lasso,
    expand_entry,
    induced_finite_pda,
    induced_omega_pda,
    omega_value_from,
    pda_from_json,
    pda_to_dot,
    pda_to_json,
)
from staromega.semiring import BOOLEAN, INF, TROPICAL
from staromega.series import LassoWord, parse_polynomial
from staromega.system import (
    AlgebraicSystem,
    IllFormedSystem,
    canonical_omega_lasso,
    least_solution_finite,
    oracle_coeff_gnf,
)


def poly(inst, text):
    return parse_polynomial(text, inst)


def entry_letters(block, i, j):
    return {a: c.value for a, c in block[i][j].items()}


# -- matrix entry expansion -----------------------------------------------------


def test_expand_entry_suffix_rules():
    auto = tropical_omega_automaton()
    m = auto.matrix
    # popping with a deeper stack keeps the suffix
    assert expand_entry(m, ("X", "Z0"), ("Z0",)) == m.m_pop_eps["X"]
    # ignoring the stack is the neutral block at every depth
    assert expand_entry(m, ("X", "Z0"), ("X", "Z0")) == m.m_eps_eps
    assert expand_entry(m, (), ()) == m.m_eps_eps
    # pushing onto any stack uses the push block of the new symbol
    assert expand_entry(m, ("Z0",), ("X", "Z0")) == m.m_eps_push["X"]
    # anything else is zero, e.g. a double push
    zero = expand_entry(m, (), ("X", "Z0"))
    assert all(not lp for row in zero for lp in row)
    mismatched = expand_entry(m, ("X",), ("Z0",))
    assert all(not lp for row in mismatched for lp in row)


def test_expand_entry_on_arctic_example_blocks():
    sys = arctic_block_system()
    auto = induced_finite_pda(sys, 1)
    m = auto.matrix
    # pushes of B: R pushes B on a with weight 1, Q pushes B on a with weight 0
    r, q = sys.variables.index("R"), sys.variables.index("Q")
    assert entry_letters(m.m_eps_push["B"], r, r) == {"a": 1}
    assert entry_letters(m.m_eps_push["B"], q, q) == {"a": 0}


# -- induced finite automata -----------------------------------------------------


def test_induced_finite_structure():
    sys = arctic_block_system()
    auto = induced_finite_pda(sys, 1)
    assert len(auto.state_names) == 6
    assert auto.matrix.stack_alphabet == sys.variables
    assert auto.state_names[-1] == "f"
    # the sink has no outgoing weight in any block
    f = 5
    blocks = [auto.matrix.m_eps_eps]
    blocks += list(auto.matrix.m_eps_push.values())
    blocks += list(auto.matrix.m_pop_eps.values())
    for b in blocks:
        assert all(not lp for lp in b[f])
    # neutral block rows read off the single-variable monomials
    t, s = sys.variables.index("T"), sys.variables.index("S")
    q, r = sys.variables.index("Q"), sys.variables.index("R")
    assert entry_letters(auto.matrix.m_eps_eps, t, q) == {"a": 0}
    assert entry_letters(auto.matrix.m_eps_eps, s, r) == {"a": 1}
    assert entry_letters(auto.matrix.m_eps_eps, q, f) == {"b": 0}
    assert entry_letters(auto.matrix.m_eps_eps, r, f) == {"b": 0}


def test_induced_finite_single_rule():
    b = BOOLEAN
    sys = AlgebraicSystem(b, ("a",), ("x1",), (poly(b, "a"),))
    auto = induced_finite_pda(sys, 0)
    assert len(auto.state_names) == 2
    assert behavior_finite(auto, ("a",)).value == 1
    assert behavior_finite(auto, ()).value == 0
    assert behavior_finite(auto, ("a", "a")).value == 0


def test_induced_finite_rejects_epsilon():
    b = BOOLEAN
    sys = AlgebraicSystem(b, ("a",), ("x1",), (poly(b, "a | eps"),))
    with pytest.raises(EpsilonCoefficient) as info:
        induced_finite_pda(sys, 0)
    assert info.value.coeff.value == 1


def test_induced_finite_dyck_matches_oracle():
    b = BOOLEAN
    sys = AlgebraicSystem(b, ("a", "b"), ("x1",), (poly(b, "a x1 x1 | b"),))
    auto = induced_finite_pda(sys, 0)
    for length in range(0, 7):
        for w in itertools.product("ab", repeat=length):
            assert behavior_finite(auto, w) == oracle_coeff_gnf(sys, 0, w), w


def test_arctic_block_behavior():
    sys = arctic_block_system()
    auto = induced_finite_pda(sys, 1)
    words = ["ab", "aabb", "abab", "abaabb", "aaabbb", "ba", "aab", "abba", "b", "aabbb"]
    for w in words:
        word = tuple(w)
        assert behavior_finite(auto, word) == max_block_weight(word), w


def test_thm_behavior_equals_solution_on_random_systems():
    rng = random.Random(101)
    for _ in range(25):
        inst = rng.choice([BOOLEAN, TROPICAL])
        sys = random_gnf_system(rng, inst, n_vars=rng.randint(1, 3))
        sol = least_solution_finite(sys, 5)
        for m in range(len(sys.variables)):
            auto = induced_finite_pda(sys, m)
            for length in range(0, 6):
                for w in itertools.product(sys.terminals, repeat=length):
                    assert behavior_finite(auto, w) == sol[m].coeff(w)


# -- omega automaton fixture -----------------------------------------------------


def test_omega_automaton_worked_example():
    auto = tropical_omega_automaton()
    for n in range(0, 5):
        w = LassoWord(("a",) * n + ("b",) * n, ("c",))
        r = behavior_omega_lasso(auto, w)
        assert r.conclusive and r.value.value == n
    for u, v in [(("a",), ("a",)), (("a", "b"), ("a", "b", "a"))]:
        r = behavior_omega_lasso(auto, LassoWord(u, v))
        assert r.conclusive and r.value.value is INF
    # final weights are all zero, so every finite behavior is zero
    assert behavior_finite(auto, ("a", "b")).value is INF
    assert behavior_finite(auto, ()).value is INF


def test_omega_requires_buchi_count_and_idempotent():
    auto = tropical_omega_automaton()
    plain = SimpleOmegaPDA(auto.matrix, auto.initial, auto.final, None, auto.state_names)
    with pytest.raises(IllFormedSystem):
        behavior_omega_lasso(plain, LassoWord((), ("c",)))


# -- the contrast construction -----------------------------------------------------


def contrast_auto(start=1, l=1):
    return induced_omega_pda(contrast_mixed_system(), start, l)


def test_induced_omega_structure():
    auto = contrast_auto()
    assert auto.state_names == ("z:z1", "z:z2", "x:x1", "x:x2", "f")
    assert auto.buchi_count == 1
    m = auto.matrix
    assert entry_letters(m.m_eps_push["Z:z2"], 1, 2) == {"a": 1}
    assert entry_letters(m.m_pop_eps["Z:z2"], 2, 1) == {"a": 1}
    assert entry_letters(m.m_eps_eps, 1, 0) == {"a": 1}
    assert entry_letters(m.m_eps_eps, 0, 0) == {"c": 1}
    # initial mass sits on both copies of the start component
    assert [v.value for v in auto.initial] == [0, 1, 0, 1, 0]


def test_induced_omega_requires_square_shape():
    b = BOOLEAN
    from staromega.fixtures import tropical_mixed_system

    with pytest.raises(IllFormedSystem):
        induced_omega_pda(tropical_mixed_system(), 0, 1)


def test_contrast_behavior_and_canonical_agreement():
    auto = contrast_auto()
    sys = contrast_mixed_system()
    import re

    for length in range(0, 9):
        for w in itertools.product("ac", repeat=length):
            want = 1 if re.fullmatch(r"(ac*a)+", "".join(w)) else 0
            assert behavior_finite(auto, w).value == want
    for (u, v) in [((), ("a", "a")), (("a",), ("c",)), (("a", "c", "a", "a"), ("c",)),
                   ((), ("c",)), (("a", "c", "a"), ("a", "c", "a"))]:
        w = LassoWord(u, v)
        got = behavior_omega_lasso(auto, w)
        want = canonical_omega_lasso(sys, 1, 1, w)
        assert got.conclusive and want.conclusive and got.value == want.value


def test_omega_from_x_states_and_sink_is_zero():
    auto = contrast_auto()
    for state in (2, 3, 4):
        for (u, v) in [((), ("c",)), (("a",), ("c",)), ((), ("a", "a"))]:
            r = omega_value_from(auto, LassoWord(u, v), state, ())
            assert r.conclusive and r.value.value == 0


def test_finite_from_z_states_is_zero():
    auto = contrast_auto()
    inst = auto.instance
    for z_state in (0, 1):
        shifted = SimpleOmegaPDA(
            auto.matrix,
            tuple(inst.one if q == z_state else inst.zero for q in range(5)),
            auto.final,
            auto.buchi_count,
            auto.state_names,
        )
        for length in range(0, 7):
            for w in itertools.product("ac", repeat=length):
                assert behavior_finite(shifted, w).value == 0


def test_one_step_unfolding_invariance():
    # the omega value from a configuration is the sum over one-step successors
    auto = contrast_auto()
    from staromega.pda import _successors

    inst = auto.instance
    for (u, v) in [(("a",), ("c",)), ((), ("a", "a")), (("a", "c", "a", "a"), ("c",))]:
        w = LassoWord(u, v)
        for state in range(5):
            for stack in [(), ("Z:z2",), ("X:x2",)]:
                direct = omega_value_from(auto, w, state, stack)
                acc = inst.zero
                ok = True
                for j, stack2, c in _successors(auto.matrix, state, stack, w.letter(0)):
                    rest = omega_value_from(auto, w.shift(1), j, stack2)
                    if not rest.conclusive:
                        ok = False
                        break
                    acc = acc + c * rest.value
                if ok and direct.conclusive:
                    assert acc == direct.value, (state, stack, str(w))


def test_pop_path_equals_sink_acceptance():
    # reading w from an x-state into the sink equals the value of the runs
    # that keep to x-states and finally pop the z-return symbol
    auto = contrast_auto()
    sys = contrast_mixed_system()
    inst = auto.instance
    n = 2
    for k in range(n):
        base = SimpleOmegaPDA(
            auto.matrix,
            tuple(inst.one if q == n + k else inst.zero for q in range(5)),
            auto.final,
            auto.buchi_count,
            auto.state_names,
        )
        for j in range(n):
            for length in range(1, 7):
                for w in itertools.product("ac", repeat=length):
                    into_sink = behavior_finite(base, w)
                    via_pop = _x_run_value_to(auto, n, n + k, (f"Z:{sys.z_vars[j]}",), w, j)
                    assert into_sink == via_pop, (k, j, w)


def _x_run_value_to(auto, n, state, stack, word, target_state):
    """Run sum to (target, empty stack) with intermediate states among x-states."""
    from staromega.pda import _successors

    inst = auto.instance

    def go(pos, st, stk):
        if pos == len(word):
            return inst.one if (st == target_state and stk == ()) else inst.zero
        if pos > 0 and not n <= st < 2 * n:
            return inst.zero
        acc = inst.zero
        for j, stk2, c in _successors(auto.matrix, st, stk, word[pos]):
            acc = acc + c * go(pos + 1, j, stk2)
        return acc

    return go(0, state, stack)


# -- caps and serialization ---------------------------------------------------------


def test_growing_stack_acceptor_boundary():
    # a single repeated state pushing forever accepts a^omega without ever
    # repeating a configuration: the emptiness analysis decides the Boolean
    # value exactly, while the weighted search has no certificate and says so
    from staromega.pda import ResetPDMatrix

    for inst in (BOOLEAN, TROPICAL):
        neutral = (({},),)
        push_x = (({"a": inst.one},),)
        m = ResetPDMatrix(inst, 1, ("a",), ("X",), neutral, {"X": push_x}, {})
        auto = SimpleOmegaPDA(m, (inst.one,), (inst.zero,), 1, ("0",))
        r = behavior_omega_lasso(auto, LassoWord((), ("a",)))
        if inst is BOOLEAN:
            assert r.conclusive and r.value.value == 1
        else:
            assert not r.conclusive
        silent = SimpleOmegaPDA(m, (inst.one,), (inst.zero,), 0, ("0",))
        r0 = behavior_omega_lasso(silent, LassoWord((), ("a",)))
        assert r0.conclusive and r0.value.is_zero()


def test_inconclusive_when_caps_too_small():
    auto = tropical_omega_automaton()
    w = LassoWord(("a", "a", "b", "b"), ("c",))
    tight = PdaLassoCaps(height=1, periods=2)
    r = behavior_omega_lasso(auto, w, tight)
    assert not r.conclusive and r.value is None
    ok = behavior_omega_lasso(auto, w)
    assert ok.conclusive and ok.value.value == 2


def test_json_round_trip_and_dot():
    for auto in (tropical_omega_automaton(), contrast_auto()):
        again = pda_from_json(pda_to_json(auto))
        assert again.state_names == auto.state_names
        assert again.matrix.m_eps_eps == auto.matrix.m_eps_eps
        assert again.matrix.m_eps_push == auto.matrix.m_eps_push
        assert again.matrix.m_pop_eps == auto.matrix.m_pop_eps
        assert again.initial == auto.initial and again.final == auto.final
        assert again.buchi_count == auto.buchi_count
        w = LassoWord(("a",), ("c",)) if "z:z1" in auto.state_names else LassoWord((), ("c",))
        assert behavior_omega_lasso(again, w).value == behavior_omega_lasso(auto, w).value
    dot = pda_to_dot(contrast_auto())
    assert "digraph" in dot and "vZ:z2" in dot and "^Z:z2" in dot
