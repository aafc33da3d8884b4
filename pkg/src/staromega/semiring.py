"""Star-omega semirings: the four concrete instances and the quemiring pair algebra.

Everything is exact: values are Python ints plus distinguished INF / NEG_INF
tokens, never floats.  star and omega use analytic closed forms (suprema of
the monotone partial sums / products); the test-suite re-derives them from
truncations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union


class SemiringError(ValueError):
    """Invalid value for an instance, or operands from different instances."""


class _Extreme:
    """Signed infinity token, used instead of floats to keep arithmetic exact."""

    __slots__ = ("sign",)

    def __init__(self, sign: int):
        self.sign = sign

    def __repr__(self) -> str:
        return "inf" if self.sign > 0 else "-inf"

    def __deepcopy__(self, memo):
        return self

    def __copy__(self):
        return self


INF = _Extreme(1)
NEG_INF = _Extreme(-1)

Ext = Union[int, _Extreme]


def _is_nat(v: Ext) -> bool:
    return isinstance(v, int) and v >= 0


def _ext_cmp(a: Ext, b: Ext) -> int:
    """Total order on extended integers: -inf < ints < inf."""
    if a is b:
        return 0
    ka = a.sign * (10**30) if isinstance(a, _Extreme) else a
    kb = b.sign * (10**30) if isinstance(b, _Extreme) else b
    return (ka > kb) - (ka < kb)


def _ext_plus(a: Ext, b: Ext, neg_dominates: bool) -> Ext:
    """Arithmetic + on extended integers.

    neg_dominates resolves -inf + inf: True gives -inf (arctic multiplication,
    where -inf is the annihilating zero), False gives inf.
    """
    if a is NEG_INF or b is NEG_INF:
        if neg_dominates:
            return NEG_INF
        if a is INF or b is INF:
            return INF
        return NEG_INF
    if a is INF or b is INF:
        return INF
    return a + b


class SemiringInstance:
    """One of the four concrete complete star-omega semirings.

    Subclasses fix carrier, operations, and the closed forms for star/omega.
    Instances are stateless singletons; compare them by identity.
    """

    name: str = ""
    idempotent: bool = False

    def zero_raw(self) -> Ext:
        raise NotImplementedError

    def one_raw(self) -> Ext:
        raise NotImplementedError

    def add_raw(self, a: Ext, b: Ext) -> Ext:
        raise NotImplementedError

    def mul_raw(self, a: Ext, b: Ext) -> Ext:
        raise NotImplementedError

    def star_raw(self, a: Ext) -> Ext:
        raise NotImplementedError

    def omega_raw(self, a: Ext) -> Ext:
        raise NotImplementedError

    def validate_raw(self, v: Ext) -> None:
        raise NotImplementedError

    def grid(self) -> tuple[Ext, ...]:
        """Small value grid used by the exhaustive identity checks."""
        raise NotImplementedError

    # -- lifted API -------------------------------------------------------

    def __repr__(self) -> str:
        return f"<semiring {self.name}>"

    def value(self, v: Ext) -> "SemiringValue":
        self.validate_raw(v)
        return SemiringValue(self, v)

    @property
    def zero(self) -> "SemiringValue":
        return SemiringValue(self, self.zero_raw())

    @property
    def one(self) -> "SemiringValue":
        return SemiringValue(self, self.one_raw())

    def parse_value(self, text: str) -> "SemiringValue":
        text = text.strip()
        if text == "inf":
            return self.value(INF)
        if text == "-inf":
            return self.value(NEG_INF)
        try:
            return self.value(int(text))
        except ValueError as exc:
            raise SemiringError(f"cannot parse {text!r} as a {self.name} value") from exc

    @staticmethod
    def format_value(v: "SemiringValue") -> str:
        return repr(v.value)


class BooleanSemiring(SemiringInstance):
    """<B, or, and, 0, 1> with 0* = 1* = 1 and infima as infinite products."""

    name = "boolean"
    idempotent = True

    def zero_raw(self):
        return 0

    def one_raw(self):
        return 1

    def add_raw(self, a, b):
        return a | b

    def mul_raw(self, a, b):
        return a & b

    def star_raw(self, a):
        return 1

    def omega_raw(self, a):
        return a

    def validate_raw(self, v):
        if v is not int(0) and v != 0 and v != 1:
            raise SemiringError(f"boolean value must be 0 or 1, got {v!r}")
        if isinstance(v, _Extreme):
            raise SemiringError(f"boolean value must be 0 or 1, got {v!r}")

    def grid(self):
        return (0, 1)


class TropicalSemiring(SemiringInstance):
    """<N u inf, min, +, inf, 0> with the infinite numeric sum as infinite product."""

    name = "tropical"
    idempotent = True

    def zero_raw(self):
        return INF

    def one_raw(self):
        return 0

    def add_raw(self, a, b):
        return a if _ext_cmp(a, b) <= 0 else b

    def mul_raw(self, a, b):
        return _ext_plus(a, b, neg_dominates=False)

    def star_raw(self, a):
        # partial sums min_{j<=n} j*a are minimised by the j=0 term
        return 0

    def omega_raw(self, a):
        return 0 if a == 0 else INF

    def validate_raw(self, v):
        if v is INF or _is_nat(v):
            return
        raise SemiringError(f"tropical value must be a natural or inf, got {v!r}")

    def grid(self):
        return (0, 1, 2, 3, INF)


class ArcticSemiring(SemiringInstance):
    """<N u {-inf, inf}, max, +, -inf, 0> with the infinite sum as infinite product."""

    name = "arctic"
    idempotent = True

    def zero_raw(self):
        return NEG_INF

    def one_raw(self):
        return 0

    def add_raw(self, a, b):
        return a if _ext_cmp(a, b) >= 0 else b

    def mul_raw(self, a, b):
        # -inf is the annihilating zero, so it wins against inf
        return _ext_plus(a, b, neg_dominates=True)

    def star_raw(self, a):
        if a is NEG_INF or a == 0:
            return 0
        return INF

    def omega_raw(self, a):
        if a is NEG_INF:
            return NEG_INF
        if a == 0:
            return 0
        return INF

    def validate_raw(self, v):
        if v is INF or v is NEG_INF or _is_nat(v):
            return
        raise SemiringError(f"arctic value must be a natural, inf or -inf, got {v!r}")

    def grid(self):
        return (NEG_INF, 0, 1, 2, 3, INF)


class CountingSemiring(SemiringInstance):
    """<N u inf, +, *, 0, 1> with the natural infinite product; not idempotent."""

    name = "counting"
    idempotent = False

    def zero_raw(self):
        return 0

    def one_raw(self):
        return 1

    def add_raw(self, a, b):
        return _ext_plus(a, b, neg_dominates=False)

    def mul_raw(self, a, b):
        # 0 annihilates even inf
        if a == 0 or b == 0:
            return 0
        if a is INF or b is INF:
            return INF
        return a * b

    def star_raw(self, a):
        if a == 0:
            return 1
        return INF

    def omega_raw(self, a):
        if a == 0:
            return 0
        if a == 1:
            return 1
        return INF

    def validate_raw(self, v):
        if v is INF or _is_nat(v):
            return
        raise SemiringError(f"counting value must be a natural or inf, got {v!r}")

    def grid(self):
        return (0, 1, 2, 3, INF)


BOOLEAN = BooleanSemiring()
TROPICAL = TropicalSemiring()
ARCTIC = ArcticSemiring()
COUNTING = CountingSemiring()

INSTANCES: dict[str, SemiringInstance] = {
    s.name: s for s in (BOOLEAN, TROPICAL, ARCTIC, COUNTING)
}


def instance_by_name(name: str) -> SemiringInstance:
    try:
        return INSTANCES[name]
    except KeyError:
        raise SemiringError(
            f"unknown semiring {name!r}; expected one of {sorted(INSTANCES)}"
        ) from None


@dataclass(frozen=True)
class SemiringValue:
    """A scalar of one concrete instance; arithmetic checks instance agreement."""

    instance: SemiringInstance
    value: Ext

    def _check(self, other: "SemiringValue") -> None:
        if self.instance is not other.instance:
            raise SemiringError(
                f"mixed instances: {self.instance.name} and {other.instance.name}"
            )

    def __add__(self, other: "SemiringValue") -> "SemiringValue":
        self._check(other)
        return SemiringValue(self.instance, self.instance.add_raw(self.value, other.value))

    def __mul__(self, other: "SemiringValue") -> "SemiringValue":
        self._check(other)
        return SemiringValue(self.instance, self.instance.mul_raw(self.value, other.value))

    def star(self) -> "SemiringValue":
        return SemiringValue(self.instance, self.instance.star_raw(self.value))

    def omega(self) -> "OmegaValue":
        return SemiringValue(self.instance, self.instance.omega_raw(self.value))

    def is_zero(self) -> bool:
        return self.value == self.instance.zero_raw() or self.value is self.instance.zero_raw()

    def is_one(self) -> bool:
        return self.value == self.instance.one_raw()

    def __repr__(self) -> str:
        return f"{self.instance.name}:{self.value!r}"


# The semimodule side of every instance here is the semiring itself.
OmegaValue = SemiringValue


def star(a: SemiringValue) -> SemiringValue:
    """Iteration sum a* = sum of all finite powers of a."""
    return a.star()


def omega(a: SemiringValue) -> OmegaValue:
    """Infinite product of a with itself."""
    return a.omega()


def natural_leq(a: SemiringValue, b: SemiringValue) -> bool:
    """Natural order of the additive monoid: a <= b iff a + b = b."""
    return (a + b) == b


def sum_family(instance: SemiringInstance, values: Iterable[SemiringValue]) -> SemiringValue:
    """n-ary addition; the empty family gives zero."""
    acc = instance.zero
    for v in values:
        if v.instance is not instance:
            raise SemiringError(
                f"mixed instances in family: {instance.name} and {v.instance.name}"
            )
        acc = acc + v
    return acc


def prod_family(instance: SemiringInstance, values: Iterable[SemiringValue]) -> SemiringValue:
    """n-ary multiplication; the empty family gives one."""
    acc = instance.one
    for v in values:
        if v.instance is not instance:
            raise SemiringError(
                f"mixed instances in family: {instance.name} and {v.instance.name}"
            )
        acc = acc * v
    return acc


@dataclass(frozen=True)
class QuemiringValue:
    """Pair (finite part, omega part) with the semidirect product multiplication."""

    finite_part: SemiringValue
    omega_part: OmegaValue

    def __post_init__(self):
        if self.finite_part.instance is not self.omega_part.instance:
            raise SemiringError("quemiring parts must share one instance")

    @property
    def instance(self) -> SemiringInstance:
        return self.finite_part.instance

    def __add__(self, other: "QuemiringValue") -> "QuemiringValue":
        return QuemiringValue(
            self.finite_part + other.finite_part, self.omega_part + other.omega_part
        )

    def __mul__(self, other: "QuemiringValue") -> "QuemiringValue":
        return QuemiringValue(
            self.finite_part * other.finite_part,
            self.omega_part + self.finite_part * other.omega_part,
        )

    def otimes(self) -> "QuemiringValue":
        """(s, v) to (s*, s^omega + s* v), the natural star of the pair algebra."""
        s, v = self.finite_part, self.omega_part
        return QuemiringValue(s.star(), s.omega() + s.star() * v)


def quemiring_zero(instance: SemiringInstance) -> QuemiringValue:
    return QuemiringValue(instance.zero, instance.zero)


def quemiring_one(instance: SemiringInstance) -> QuemiringValue:
    return QuemiringValue(instance.one, instance.zero)


def quemiring_otimes(q: QuemiringValue) -> QuemiringValue:
    return q.otimes()
