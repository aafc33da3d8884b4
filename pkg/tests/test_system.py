import itertools
import random

import pytest

from staromega.checks import random_gnf_system
from staromega.fixtures import boolean_omega_system, tropical_mixed_system
from staromega.semiring import BOOLEAN, COUNTING, INF, SemiringError, TROPICAL, natural_leq
from staromega.series import LassoWord, Polynomial, parse_polynomial, series_build, substitute
from staromega.system import (
    AlgebraicSystem,
    IllFormedSystem,
    LassoCaps,
    MixedSystem,
    NotStabilized,
    OmegaSystem,
    canonical_omega_lasso,
    default_lasso_caps,
    induce_mixed,
    is_gnf_algebraic,
    is_gnf_mixed,
    is_gnf_omega,
    kleene_rounds,
    least_solution_finite,
    oracle_coeff_gnf,
)


def poly(inst, text):
    return parse_polynomial(text, inst)


# -- construction and induced mixed systems ---------------------------------------


def test_system_validation():
    b = BOOLEAN
    with pytest.raises(IllFormedSystem):
        AlgebraicSystem(b, ("a",), ("x",), (poly(b, "a q"),))
    with pytest.raises(IllFormedSystem):
        MixedSystem(b, ("a",), ("x",), (poly(b, "a"),), ("z",), ((poly(b, "a"), poly(b, "a")),))


def test_induce_mixed_worked_example():
    sys = boolean_omega_system()
    mixed = induce_mixed(sys)
    b = BOOLEAN
    assert mixed.x_vars == ("x1", "x2")
    assert mixed.x_rhs == (poly(b, "x2 x1 | eps"), poly(b, "a x2 b | eps"))
    # z1 = z2 + x2 z1 ; z2 = a z2
    assert mixed.rho[0][0] == poly(b, "x2")
    assert mixed.rho[0][1] == poly(b, "eps")
    assert mixed.rho[1][0] == Polynomial.zero(b)
    assert mixed.rho[1][1] == poly(b, "a")


def test_induce_mixed_variable_free():
    b = BOOLEAN
    sys = OmegaSystem(b, ("a",), ("y1",), (poly(b, "a"),))
    mixed = induce_mixed(sys)
    assert mixed.rho[0][0].is_zero()


def test_induce_mixed_merges_duplicate_cuts():
    b = BOOLEAN
    sys = OmegaSystem(
        b, ("a", "c"), ("y1", "y2"),
        (poly(b, "a | c y1"), poly(b, "a y1 y2 | a y1")),
    )
    mixed = induce_mixed(sys)
    assert mixed.rho[0][0] == poly(b, "c")
    assert mixed.rho[1][0] == poly(b, "a")
    assert mixed.rho[1][1] == poly(b, "a x1")


# -- normal form predicates ---------------------------------------------------------


def test_is_gnf_predicates():
    b = BOOLEAN
    good = MixedSystem(
        b, ("a",), ("x1",), (poly(b, "a | a x1 x1 | eps"),),
        ("z1",), ((poly(b, "a | a x1"),),),
    )
    assert is_gnf_mixed(good)
    lead_var = MixedSystem(
        b, ("a",), ("x1",), (poly(b, "x1 a"),), ("z1",), ((poly(b, "a"),),)
    )
    assert not is_gnf_mixed(lead_var)
    eps_in_z = MixedSystem(
        b, ("a",), ("x1",), (poly(b, "a"),), ("z1",), ((poly(b, "eps"),),)
    )
    assert not is_gnf_mixed(eps_in_z)
    long_tail = MixedSystem(
        b, ("a",), ("x1",), (poly(b, "a x1 x1 x1"),), ("z1",), ((poly(b, "a"),),)
    )
    assert not is_gnf_mixed(long_tail)
    osys = OmegaSystem(b, ("a",), ("y1",), (poly(b, "a y1 y1 | eps"),))
    assert is_gnf_omega(osys)
    assert not is_gnf_omega(OmegaSystem(b, ("a",), ("y1",), (poly(b, "y1"),)))


# -- finite least solutions ------------------------------------------------------------


def test_least_solution_tropical_example():
    sys = tropical_mixed_system().x_part
    sol = least_solution_finite(sys, 6)
    assert sol[0].coeff(("a", "b")).value == 1
    assert sol[0].coeff(("a", "a", "b", "b")).value == 2
    assert sol[0].coeff(("a", "a", "a", "b", "b", "b")).value == 3
    assert sol[0].coeff(("a", "b", "a", "b")).value is INF


def test_least_solution_boolean_example():
    b = BOOLEAN
    sys = AlgebraicSystem(b, ("a", "b"), ("x2",), (poly(b, "a x2 b | eps"),))
    sol = least_solution_finite(sys, 4)
    assert sol[0].coeff(()).value == 1
    assert sol[0].coeff(("a", "b")).value == 1
    assert sol[0].coeff(("a", "a", "b", "b")).value == 1
    assert sol[0].coeff(("a", "b", "a", "b")).value == 0


def test_substitute_unbound_variable_errors():
    b = BOOLEAN
    from staromega.series import SeriesError

    with pytest.raises(SeriesError):
        substitute(poly(b, "a x"), {}, 3, variables=("x",))


def test_least_solution_trivial():
    b = BOOLEAN
    sys = AlgebraicSystem(b, ("a",), ("x1",), (poly(b, "a"),))
    assert least_solution_finite(sys, 3)[0].support() == [("a",)]


def test_non_stabilizing_system_errors():
    # x = x has plenty of solutions; the iteration stalls at zero and stops,
    # while x = 2x + 1 over counting keeps strictly growing and must fail
    c = COUNTING
    growing = AlgebraicSystem(c, ("a",), ("x",), (poly(c, "(2) x | (1) eps"),))
    with pytest.raises(NotStabilized):
        least_solution_finite(growing, 2, max_iter=30)


def test_gnf_systems_stabilize_quickly():
    rng = random.Random(2)
    for _ in range(25):
        inst = rng.choice([BOOLEAN, TROPICAL])
        sys = random_gnf_system(rng, inst)
        max_len = rng.randint(0, 5)
        # one leading terminal per derivation level bounds the useful depth:
        # max_len + 1 applications already carry the final coefficients
        final = least_solution_finite(sys, max_len)
        current = [series_build(inst, max_len, [])] * len(sys.variables)
        for _round in range(max_len + 1):
            assignment = dict(zip(sys.variables, current))
            current = [substitute(q, assignment, max_len) for q in sys.rhs]
        assert current == final
        assert kleene_rounds(sys, max_len) <= max_len + 2


# -- the derivation oracle --------------------------------------------------------------


def test_oracle_examples():
    t = TROPICAL
    s_sys = AlgebraicSystem(
        t, ("a", "b"), ("x1", "x2"),
        (poly(t, "(1) a x2 | (1) a x1 x2"), poly(t, "b")),
    )
    assert oracle_coeff_gnf(s_sys, 0, ("a", "b")).value == 1
    assert oracle_coeff_gnf(s_sys, 0, ("b", "a")).value is INF
    assert oracle_coeff_gnf(s_sys, 0, ("a", "a", "b", "b")).value == 2


def test_oracle_rejects_non_gnf():
    b = BOOLEAN
    sys = AlgebraicSystem(b, ("a",), ("x",), (poly(b, "x a"),))
    with pytest.raises(IllFormedSystem):
        oracle_coeff_gnf(sys, 0, ("a",))


def test_oracle_equals_kleene_on_random_gnf_systems():
    rng = random.Random(9)
    for _ in range(40):
        inst = rng.choice([BOOLEAN, TROPICAL])
        sys = random_gnf_system(rng, inst, n_vars=rng.randint(1, 3))
        sol = least_solution_finite(sys, 5)
        for m in range(len(sys.variables)):
            for length in range(0, 6):
                for w in itertools.product(sys.terminals, repeat=length):
                    assert sol[m].coeff(w) == oracle_coeff_gnf(sys, m, w)


# -- omega components at lasso words ------------------------------------------------------


def test_canonical_lasso_tropical_worked_example():
    sys = tropical_mixed_system()
    for n in range(0, 5):
        w = LassoWord(("a",) * n + ("b",) * n, ("c",))
        r = canonical_omega_lasso(sys, 1, 1, w)
        assert r.conclusive and r.value.value == n
    r = canonical_omega_lasso(sys, 1, 0, LassoWord((), ("c",)))
    assert r.conclusive and r.value.value == 0


def test_canonical_lasso_boolean_buchi_distinction():
    mixed = induce_mixed(boolean_omega_system())
    cases = [
        (1, 0, LassoWord((), ("a", "b")), 1),
        (1, 1, LassoWord((), ("a",)), 0),
        (2, 1, LassoWord((), ("a",)), 1),
        (1, 0, LassoWord((), ("a",)), 0),
        (2, 0, LassoWord((), ("a",)), 1),
    ]
    for k, comp, w, want in cases:
        r = canonical_omega_lasso(mixed, k, comp, w)
        assert r.conclusive and r.value.value == want, (k, comp, str(w))


def test_canonical_lasso_rejects_counting():
    c = COUNTING
    sys = MixedSystem(
        c, ("a",), ("x",), (poly(c, "a"),), ("z",), ((poly(c, "a"),),)
    )
    with pytest.raises(SemiringError):
        canonical_omega_lasso(sys, 1, 0, LassoWord((), ("a",)))


def test_canonical_lasso_range_checks():
    sys = tropical_mixed_system()
    with pytest.raises(IllFormedSystem):
        canonical_omega_lasso(sys, 3, 0, LassoWord((), ("c",)))
    with pytest.raises(IllFormedSystem):
        canonical_omega_lasso(sys, 1, 5, LassoWord((), ("c",)))
    with pytest.raises(IllFormedSystem):
        LassoCaps(0, 1)


def test_buchi_monotonicity():
    rng = random.Random(12)
    lassos = [
        LassoWord((), ("a",)),
        LassoWord((), ("a", "b")),
        LassoWord(("a",), ("b",)),
        LassoWord(("a", "b"), ("a",)),
    ]
    for _ in range(12):
        inst = rng.choice([BOOLEAN, TROPICAL])
        x = random_gnf_system(rng, inst, n_vars=2)
        m = 2
        rho = []
        for _i in range(m):
            row = []
            for _j in range(m):
                terms = []
                for _ in range(rng.randint(0, 2)):
                    word = (rng.choice(x.terminals),)
                    if rng.random() < 0.5:
                        word += (rng.choice(x.variables),)
                    terms.append((inst.value(1), word))
                row.append(Polynomial.build(inst, terms))
            rho.append(tuple(row))
        sys = MixedSystem(inst, x.terminals, x.variables, x.rhs, ("z0", "z1"), tuple(rho))
        for w in lassos:
            for comp in range(m):
                values = []
                for k in range(m + 1):
                    r = canonical_omega_lasso(sys, k, comp, w)
                    values.append(r)
                for lo, hi in zip(values, values[1:]):
                    if lo.conclusive and hi.conclusive:
                        assert natural_leq(lo.value, hi.value), (str(w), comp)


def test_solution_property_finite_and_omega():
    # sigma = p(sigma) coefficientwise, and the omega values satisfy one
    # unfolding step omega_i(w) = sum_j sum_len (rho_ij(sigma), w[:len]) * omega_j(w>>len)
    for sys, max_len in [(tropical_mixed_system(), 8), (induce_mixed(boolean_omega_system()), 8)]:
        sol = least_solution_finite(sys.x_part, max_len)
        assignment = dict(zip(sys.x_vars, sol))
        for p, s in zip(sys.x_rhs, sol):
            assert substitute(p, assignment, max_len) == s
        lassos = [LassoWord((), (sys.terminals[0],)),
                  LassoWord((sys.terminals[0],), (sys.terminals[-1],))]
        if sys.instance is TROPICAL:
            lassos.append(LassoWord(("a", "b"), ("c",)))
        else:
            lassos.append(LassoWord((), ("a", "b")))
        unroll = 6
        for w in lassos:
            for i in range(sys.m):
                direct = canonical_omega_lasso(sys, 1, i, w)
                if not direct.conclusive:
                    continue
                acc = sys.instance.zero
                conclusive = True
                for j in range(sys.m):
                    entry = substitute(sys.rho[i][j], assignment, unroll)
                    for length in range(0, unroll + 1):
                        c = entry.coeff(w.segment(0, length))
                        if c.is_zero():
                            continue
                        rest = canonical_omega_lasso(sys, 1, j, w.shift(length))
                        if not rest.conclusive:
                            conclusive = False
                            break
                        acc = acc + c * rest.value
                if conclusive:
                    assert acc == direct.value, (str(w), i, acc, direct.value)
