"""Finite square matrices over a star-omega semiring.

Provides semiring matrix algebra plus the star, omega and Buchi-restricted
omega operators.  `mat_star` uses the Lehmann elimination scheme, which in a
Conway semiring agrees with the recursive two-by-two block formulas; the
block formulas themselves are exposed (`mat_star_blocks`) so the partition
independence laws can be checked against arbitrary splits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .semiring import (
    INF,
    NEG_INF,
    SemiringError,
    SemiringInstance,
    SemiringValue,
    instance_by_name,
)


@dataclass(frozen=True)
class SemiringMatrix:
    instance: SemiringInstance
    n: int
    rows: tuple[tuple[SemiringValue, ...], ...]

    def __post_init__(self):
        if self.n < 0 or len(self.rows) != self.n:
            raise SemiringError(f"expected {self.n} rows, got {len(self.rows)}")
        for row in self.rows:
            if len(row) != self.n:
                raise SemiringError("matrix is not square")
            for v in row:
                if v.instance is not self.instance:
                    raise SemiringError("matrix entries must share one instance")

    def entry(self, i: int, j: int) -> SemiringValue:
        return self.rows[i][j]


@dataclass(frozen=True)
class OmegaVector:
    instance: SemiringInstance
    entries: tuple[SemiringValue, ...]

    @property
    def n(self) -> int:
        return len(self.entries)


# Rectangular blocks are plain tuples-of-tuples internally.
Rect = tuple[tuple[SemiringValue, ...], ...]


def mat_from_raw(instance: SemiringInstance, raw_rows) -> SemiringMatrix:
    rows = tuple(tuple(instance.value(v) for v in row) for row in raw_rows)
    return SemiringMatrix(instance, len(rows), rows)


def mat_zero(instance: SemiringInstance, n: int) -> SemiringMatrix:
    z = instance.zero
    return SemiringMatrix(instance, n, tuple(tuple(z for _ in range(n)) for _ in range(n)))


def mat_identity(instance: SemiringInstance, n: int) -> SemiringMatrix:
    z, o = instance.zero, instance.one
    return SemiringMatrix(
        instance, n, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n))
    )


def _check_same(a: SemiringMatrix, b: SemiringMatrix) -> None:
    if a.instance is not b.instance:
        raise SemiringError("matrices over different instances")


def mat_add(a: SemiringMatrix, b: SemiringMatrix) -> SemiringMatrix:
    _check_same(a, b)
    if a.n != b.n:
        raise SemiringError(f"dimension mismatch: {a.n} vs {b.n}")
    rows = tuple(
        tuple(a.rows[i][j] + b.rows[i][j] for j in range(a.n)) for i in range(a.n)
    )
    return SemiringMatrix(a.instance, a.n, rows)


def _rect_mul(instance: SemiringInstance, a: Rect, b: Rect) -> Rect:
    if a and b and len(a[0]) != len(b):
        raise SemiringError(f"dimension mismatch: {len(a[0])} vs {len(b)}")
    inner = len(b)
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        new = []
        for j in range(cols):
            acc = instance.zero
            for k in range(inner):
                acc = acc + row[k] * b[k][j]
            new.append(acc)
        out.append(tuple(new))
    return tuple(out)


def mat_mul(a: SemiringMatrix, b: SemiringMatrix) -> SemiringMatrix:
    _check_same(a, b)
    if a.n != b.n:
        raise SemiringError(f"dimension mismatch: {a.n} vs {b.n}")
    return SemiringMatrix(a.instance, a.n, _rect_mul(a.instance, a.rows, b.rows))


def mat_vec_mul(a: SemiringMatrix, v: OmegaVector) -> OmegaVector:
    if a.instance is not v.instance:
        raise SemiringError("matrix and vector over different instances")
    if a.n != v.n:
        raise SemiringError(f"dimension mismatch: {a.n} vs {v.n}")
    col = tuple((x,) for x in v.entries)
    res = _rect_mul(a.instance, a.rows, col)
    return OmegaVector(a.instance, tuple(r[0] for r in res))


def mat_star(m: SemiringMatrix) -> SemiringMatrix:
    """Reflexive-transitive closure: sum of all finite matrix powers.

    Lehmann elimination, one scalar star per pivot: sweep k and replace
    A[i][j] by A[i][j] + A[i][k] (A[k][k])* A[k][j], then add the identity.
    Agrees with the recursive block definition in every Conway semiring,
    which the identity suite checks explicitly.
    """
    n = m.n
    inst = m.instance
    a = [list(row) for row in m.rows]
    for k in range(n):
        pivot = a[k][k].star()
        row_k = tuple(a[k])
        col_k = tuple(a[i][k] for i in range(n))
        for i in range(n):
            left = col_k[i] * pivot
            if left.is_zero():
                continue
            for j in range(n):
                a[i][j] = a[i][j] + left * row_k[j]
    one = inst.one
    for i in range(n):
        a[i][i] = a[i][i] + one
    return SemiringMatrix(inst, n, tuple(tuple(row) for row in a))


def _split(m: SemiringMatrix, n1: int):
    n = m.n
    r1, r2 = range(n1), range(n1, n)
    a = tuple(tuple(m.rows[i][j] for j in r1) for i in r1)
    b = tuple(tuple(m.rows[i][j] for j in r2) for i in r1)
    c = tuple(tuple(m.rows[i][j] for j in r1) for i in r2)
    d = tuple(tuple(m.rows[i][j] for j in r2) for i in r2)
    return a, b, c, d


def _as_mat(instance: SemiringInstance, rows: Rect) -> SemiringMatrix:
    return SemiringMatrix(instance, len(rows), rows)


def _rect_add(instance: SemiringInstance, a: Rect, b: Rect) -> Rect:
    return tuple(
        tuple(a[i][j] + b[i][j] for j in range(len(a[i]))) for i in range(len(a))
    )


def mat_star_blocks(m: SemiringMatrix, n1: int, variant: int = 1) -> SemiringMatrix:
    """Star via one two-block step at the given split point.

    variant 1 composes the closures as (a + b d* c)* b d* in the upper right
    corner; variant 2 uses the alternative a* b (d + c a* b)*.  Both agree
    with `mat_star` in Conway semirings.
    """
    n, inst = m.n, m.instance
    if not 0 <= n1 <= n:
        raise SemiringError("split point out of range")
    if n1 == 0 or n1 == n:
        return mat_star(m)
    a, b, c, d = _split(m, n1)
    dstar = mat_star(_as_mat(inst, d)).rows
    astar = mat_star(_as_mat(inst, a)).rows
    f = _rect_add(inst, a, _rect_mul(inst, _rect_mul(inst, b, dstar), c))
    g = _rect_add(inst, d, _rect_mul(inst, _rect_mul(inst, c, astar), b))
    fstar = mat_star(_as_mat(inst, f)).rows
    gstar = mat_star(_as_mat(inst, g)).rows
    if variant == 1:
        tr = _rect_mul(inst, _rect_mul(inst, fstar, b), dstar)
        bl = _rect_mul(inst, _rect_mul(inst, gstar, c), astar)
    elif variant == 2:
        tr = _rect_mul(inst, _rect_mul(inst, astar, b), gstar)
        bl = _rect_mul(inst, _rect_mul(inst, dstar, c), fstar)
    else:
        raise SemiringError("variant must be 1 or 2")
    rows = []
    for i in range(n1):
        rows.append(tuple(fstar[i]) + tuple(tr[i]))
    for i in range(n - n1):
        rows.append(tuple(bl[i]) + tuple(gstar[i]))
    return SemiringMatrix(inst, n, tuple(rows))


def mat_omega(m: SemiringMatrix) -> OmegaVector:
    """Omega of a matrix: per-state weight of infinite paths, all states repeated.

    Recursive two-block definition with the 1/(n-1) split.
    """
    n, inst = m.n, m.instance
    if n == 0:
        return OmegaVector(inst, ())
    if n == 1:
        return OmegaVector(inst, (m.rows[0][0].omega(),))
    a, b, c, d = _split(m, 1)
    dmat = _as_mat(inst, d)
    dstar = mat_star(dmat).rows
    astar_s = a[0][0].star()
    f = _rect_add(inst, a, _rect_mul(inst, _rect_mul(inst, b, dstar), c))
    f_s = f[0][0]
    g = _rect_add(inst, d, tuple(tuple(ci[0] * astar_s * bj for bj in b[0]) for ci in c))
    d_om = mat_omega(dmat).entries
    g_om = mat_omega(_as_mat(inst, g)).entries
    gstar = mat_star(_as_mat(inst, g)).rows
    first = f_s.omega() + f_s.star() * _dot(inst, b[0], d_om)
    a_om = a[0][0].omega()
    # second block is (d + c a* b)^omega + (d + c a* b)* c a^omega
    rest = tuple(
        g_om[i] + _dot(inst, gstar[i], tuple(c[t][0] * a_om for t in range(n - 1)))
        for i in range(n - 1)
    )
    return OmegaVector(inst, (first,) + rest)


def _dot(instance: SemiringInstance, row, col) -> SemiringValue:
    acc = instance.zero
    for x, y in zip(row, col):
        acc = acc + x * y
    return acc


def mat_omega_t(m: SemiringMatrix, t: int) -> OmegaVector:
    """Buchi-restricted omega: infinite paths that revisit states 1..t forever.

    Split with the repeated block of size t: the result is
    ((a + b d* c)^omega ; d* c (a + b d* c)^omega).
    """
    n, inst = m.n, m.instance
    if not 0 <= t <= n:
        raise SemiringError(f"repeated-state count {t} out of range 0..{n}")
    if t == 0:
        return OmegaVector(inst, tuple(inst.zero for _ in range(n)))
    if t == n:
        return mat_omega(m)
    a, b, c, d = _split(m, t)
    dstar = mat_star(_as_mat(inst, d)).rows
    f = _rect_add(inst, a, _rect_mul(inst, _rect_mul(inst, b, dstar), c))
    top = mat_omega(_as_mat(inst, f)).entries
    dc = _rect_mul(inst, dstar, c)
    bottom = tuple(_dot(inst, dc[i], top) for i in range(n - t))
    return OmegaVector(inst, top + bottom)


def mat_omega_t_alt(m: SemiringMatrix, t: int, k: int) -> OmegaVector:
    """Same operator computed through a coarser split of size k >= t."""
    n, inst = m.n, m.instance
    if not 0 <= t <= k <= n:
        raise SemiringError(f"need 0 <= t <= k <= n, got t={t}, k={k}, n={n}")
    if k == n:
        return mat_omega_t(m, t)
    a, b, c, d = _split(m, k)
    dstar = mat_star(_as_mat(inst, d)).rows
    f = _rect_add(inst, a, _rect_mul(inst, _rect_mul(inst, b, dstar), c))
    top = mat_omega_t(_as_mat(inst, f), t).entries
    dc = _rect_mul(inst, dstar, c)
    bottom = tuple(_dot(inst, dc[i], top) for i in range(n - k))
    return OmegaVector(inst, top + bottom)


# -- JSON round trip -------------------------------------------------------


def _raw_to_json(v):
    if v is INF:
        return "inf"
    if v is NEG_INF:
        return "-inf"
    return v


def _raw_from_json(v):
    if v == "inf":
        return INF
    if v == "-inf":
        return NEG_INF
    if isinstance(v, int):
        return v
    raise SemiringError(f"bad matrix entry {v!r}")


def matrix_to_json(m: SemiringMatrix) -> str:
    doc = {
        "semiring": m.instance.name,
        "n": m.n,
        "rows": [[_raw_to_json(v.value) for v in row] for row in m.rows],
    }
    return json.dumps(doc, indent=2)


def matrix_from_json(text: str) -> SemiringMatrix:
    doc = json.loads(text)
    inst = instance_by_name(doc["semiring"])
    rows = tuple(
        tuple(inst.value(_raw_from_json(v)) for v in row) for row in doc["rows"]
    )
    m = SemiringMatrix(inst, doc["n"], rows)
    return m
