import random

import pytest

from staromega.matrix import (
    OmegaVector,
    SemiringMatrix,
    mat_add,
    mat_from_raw,
    mat_identity,
    mat_mul,
    mat_omega,
    mat_omega_t,
    mat_omega_t_alt,
    mat_star,
    mat_star_blocks,
    mat_vec_mul,
    mat_zero,
    matrix_from_json,
    matrix_to_json,
)
from staromega.semiring import ARCTIC, BOOLEAN, COUNTING, INF, SemiringError, TROPICAL

ALL = [BOOLEAN, TROPICAL, ARCTIC, COUNTING]


def raw(m):
    return [[v.value for v in row] for row in m.rows]


def vraw(v):
    return [e.value for e in v.entries]


def rand_matrix(rng, inst, n):
    return mat_from_raw(inst, [[rng.choice(inst.grid()) for _ in range(n)] for _ in range(n)])


# -- plumbing -------------------------------------------------------------------


def test_add_mul_identities():
    rng = random.Random(3)
    for inst in ALL:
        m = rand_matrix(rng, inst, 3)
        assert mat_mul(mat_identity(inst, 3), m).rows == m.rows
        assert mat_add(mat_zero(inst, 3), m).rows == m.rows


def test_min_plus_product_example():
    m = mat_from_raw(TROPICAL, [[0, 1], [INF, 0]])
    v = OmegaVector(TROPICAL, (TROPICAL.value(0), TROPICAL.value(0)))
    assert vraw(mat_vec_mul(m, v)) == [0, 0]


def test_dimension_mismatch():
    a = mat_zero(TROPICAL, 2)
    b = mat_zero(TROPICAL, 3)
    with pytest.raises(SemiringError):
        mat_mul(a, b)
    with pytest.raises(SemiringError):
        mat_add(a, b)


# -- star ------------------------------------------------------------------------


def test_star_examples():
    for inst in ALL:
        for n in (0, 1, 2, 3):
            assert raw(mat_star(mat_zero(inst, n))) == raw(mat_identity(inst, n))
    assert raw(mat_star(mat_from_raw(BOOLEAN, [[0, 1], [0, 0]]))) == [[1, 1], [0, 1]]
    assert raw(mat_star(mat_from_raw(TROPICAL, [[5]]))) == [[0]]


def test_star_partition_independence():
    rng = random.Random(11)
    for inst in ALL:
        for _ in range(60):
            n = rng.randint(1, 4)
            m = rand_matrix(rng, inst, n)
            base = mat_star(m)
            for n1 in range(n + 1):
                for variant in (1, 2):
                    assert mat_star_blocks(m, n1, variant).rows == base.rows


# -- omega -----------------------------------------------------------------------


def test_omega_examples():
    assert vraw(mat_omega(mat_from_raw(BOOLEAN, [[1]]))) == [1]
    assert vraw(mat_omega(mat_from_raw(TROPICAL, [[0]]))) == [0]
    assert vraw(mat_omega(mat_from_raw(TROPICAL, [[INF, 1], [1, INF]]))) == [INF, INF]


def test_omega_t_edges_and_example():
    rng = random.Random(5)
    m = mat_from_raw(BOOLEAN, [[0, 1], [1, 0]])
    assert vraw(mat_omega_t(m, 1)) == [1, 1]
    for inst in ALL:
        for _ in range(20):
            n = rng.randint(1, 4)
            a = rand_matrix(rng, inst, n)
            assert vraw(mat_omega_t(a, 0)) == [inst.zero.value] * n
            assert mat_omega_t(a, n).entries == mat_omega(a).entries
    with pytest.raises(SemiringError):
        mat_omega_t(m, 3)


def test_omega_t_alt_matches_all_partitions():
    rng = random.Random(17)
    for inst in ALL:
        for _ in range(60):
            n = rng.randint(1, 4)
            m = rand_matrix(rng, inst, n)
            for t in range(n + 1):
                want = mat_omega_t(m, t)
                for k in range(t, n + 1):
                    assert mat_omega_t_alt(m, t, k).entries == want.entries
    with pytest.raises(SemiringError):
        mat_omega_t_alt(rand_matrix(rng, BOOLEAN, 3), 2, 1)


def test_omega_is_matrix_fixed_point():
    rng = random.Random(23)
    for inst in ALL:
        for _ in range(60):
            n = rng.randint(1, 4)
            m = rand_matrix(rng, inst, n)
            for t in range(n + 1):
                v = mat_omega_t(m, t)
                assert mat_vec_mul(m, v).entries == v.entries


# -- Boolean Buchi cross-check ----------------------------------------------------


def buchi_oracle(m, t):
    """Reachability of a cycle through one of the first t states."""
    n = m.n
    adj = [[not m.rows[i][j].is_zero() for j in range(n)] for i in range(n)]
    closure = [row[:] for row in adj]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                closure[i][j] = closure[i][j] or (closure[i][k] and closure[k][j])
    out = []
    for j in range(n):
        # j must reach some c among the first t states that lies on a
        # nonempty cycle; the closure holds paths of length >= 1
        ok = any(
            (j == c or closure[j][c]) and closure[c][c] for c in range(t)
        )
        out.append(1 if ok else 0)
    return out


def test_boolean_omega_matches_reachability_oracle():
    rng = random.Random(31)
    for _ in range(200):
        n = rng.randint(1, 5)
        m = mat_from_raw(
            BOOLEAN, [[rng.choice([0, 0, 1]) for _ in range(n)] for _ in range(n)]
        )
        for t in range(n + 1):
            assert vraw(mat_omega_t(m, t)) == buchi_oracle(m, t), (raw(m), t)


# -- JSON -------------------------------------------------------------------------


def test_json_round_trip():
    rng = random.Random(41)
    for inst in ALL:
        m = rand_matrix(rng, inst, 3)
        again = matrix_from_json(matrix_to_json(m))
        assert again.rows == m.rows and again.instance is m.instance
