"""Words, monomials, polynomials, truncated series and lasso words.

Words are tuples of symbol strings over a mixed alphabet of terminals and
variables.  Polynomials are kept canonical: monomials merged by word,
length-lex sorted, zero coefficients dropped.  Infinite series are only ever
materialised as truncations; ultimately periodic omega-words are handled by
the LassoWord value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .semiring import SemiringError, SemiringInstance, SemiringValue

Word = tuple[str, ...]
EPSILON: Word = ()


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Terminal symbols plus the declared variable names, kept disjoint."""

    terminals: tuple[str, ...]
    variables: tuple[str, ...] = ()

    def __post_init__(self):
        overlap = set(self.terminals) & set(self.variables)
        if overlap:
            raise SeriesError(f"symbols both terminal and variable: {sorted(overlap)}")
        seen = set()
        for s in self.terminals + self.variables:
            if s in seen:
                raise SeriesError(f"duplicate symbol {s!r}")
            seen.add(s)

    def is_terminal(self, s: str) -> bool:
        return s in self.terminals

    def is_variable(self, s: str) -> bool:
        return s in self.variables


def word_key(w: Word):
    return (len(w), w)


@dataclass(frozen=True)
class Monomial:
    coeff: SemiringValue
    word: Word

    def __post_init__(self):
        if self.coeff.is_zero():
            raise SeriesError("zero monomials are not stored")


@dataclass(frozen=True)
class Polynomial:
    """A finite sum of monomials in canonical form."""

    instance: SemiringInstance
    monomials: tuple[Monomial, ...]

    @staticmethod
    def build(
        instance: SemiringInstance, terms: Iterable[tuple[SemiringValue, Word]]
    ) -> "Polynomial":
        acc: dict[Word, SemiringValue] = {}
        for coeff, word in terms:
            if coeff.instance is not instance:
                raise SemiringError("monomial coefficient from a different instance")
            prev = acc.get(word)
            acc[word] = coeff if prev is None else prev + coeff
        monos = tuple(
            Monomial(c, w)
            for w, c in sorted(acc.items(), key=lambda kv: word_key(kv[0]))
            if not c.is_zero()
        )
        return Polynomial(instance, monos)

    @staticmethod
    def zero(instance: SemiringInstance) -> "Polynomial":
        return Polynomial(instance, ())

    @staticmethod
    def of_word(instance: SemiringInstance, word: Word) -> "Polynomial":
        return Polynomial.build(instance, [(instance.one, word)])

    def is_zero(self) -> bool:
        return not self.monomials

    def coeff_of(self, word: Word) -> SemiringValue:
        for m in self.monomials:
            if m.word == word:
                return m.coeff
        return self.instance.zero

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if other.instance is not self.instance:
            raise SemiringError("polynomials over different instances")
        return Polynomial.build(
            self.instance,
            [(m.coeff, m.word) for m in self.monomials]
            + [(m.coeff, m.word) for m in other.monomials],
        )

    def scale(self, c: SemiringValue) -> "Polynomial":
        if c.is_zero():
            return Polynomial.zero(self.instance)
        return Polynomial.build(
            self.instance, [(c * m.coeff, m.word) for m in self.monomials]
        )

    def concat(self, other: "Polynomial") -> "Polynomial":
        return Polynomial.build(
            self.instance,
            [
                (a.coeff * b.coeff, a.word + b.word)
                for a in self.monomials
                for b in other.monomials
            ],
        )

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for m in self.monomials:
            out.update(m.word)
        return out

    def substitute_symbols(self, mapping: Mapping[str, "Polynomial"]) -> "Polynomial":
        """Replace symbols by polynomials, expanding products; absent symbols stay."""
        inst = self.instance
        terms: list[tuple[SemiringValue, Word]] = []
        for m in self.monomials:
            partial: list[tuple[SemiringValue, Word]] = [(m.coeff, EPSILON)]
            for sym in m.word:
                rep = mapping.get(sym)
                if rep is None:
                    partial = [(c, w + (sym,)) for c, w in partial]
                else:
                    partial = [
                        (c * r.coeff, w + r.word)
                        for c, w in partial
                        for r in rep.monomials
                    ]
                if not partial:
                    break
            terms.extend(partial)
        return Polynomial.build(inst, terms)

    def rename_symbols(self, mapping: Mapping[str, str]) -> "Polynomial":
        return Polynomial.build(
            self.instance,
            [
                (m.coeff, tuple(mapping.get(s, s) for s in m.word))
                for m in self.monomials
            ],
        )


def split_px(
    p: Polynomial,
    y_vars: Iterable[str],
    x_of: Mapping[str, str],
    z_of: Mapping[str, str],
) -> Polynomial:
    """Omega-part expansion of a polynomial over terminals and y-variables.

    A monomial s w0 y1 w1 ... yk wk turns into the k-term sum with one z-variable
    at each cut and the preceding variables renamed to their x-copies; the
    trailing word past the cut is dropped.  Variable-free monomials vanish.
    """
    yset = set(y_vars)
    terms: list[tuple[SemiringValue, Word]] = []
    for m in p.monomials:
        var_positions = [i for i, s in enumerate(m.word) if s in yset]
        for cut in var_positions:
            prefix = tuple(
                x_of[s] if s in yset else s for s in m.word[:cut]
            )
            terms.append((m.coeff, prefix + (z_of[m.word[cut]],)))
    return Polynomial.build(p.instance, terms)


@dataclass(frozen=True)
class TruncatedSeries:
    """Finite approximation of a series: coefficients of all words up to max_len."""

    instance: SemiringInstance
    max_len: int
    coeffs: Mapping[Word, SemiringValue] = field(default_factory=dict)

    def __post_init__(self):
        for w, c in self.coeffs.items():
            if len(w) > self.max_len:
                raise SeriesError(f"word {w} longer than truncation {self.max_len}")
            if c.instance is not self.instance:
                raise SemiringError("series coefficient from a different instance")

    def coeff(self, w: Word) -> SemiringValue:
        if len(w) > self.max_len:
            raise SeriesError(
                f"coefficient of word of length {len(w)} beyond truncation {self.max_len}"
            )
        c = self.coeffs.get(w)
        return self.instance.zero if c is None else c

    def support(self) -> list[Word]:
        return sorted(self.coeffs, key=word_key)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if self.instance is not other.instance or self.max_len != other.max_len:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeff(w) == other.coeff(w) for w in keys)

    def __hash__(self):
        raise TypeError("TruncatedSeries is not hashable")


def series_build(
    instance: SemiringInstance, max_len: int, items: Iterable[tuple[Word, SemiringValue]]
) -> TruncatedSeries:
    acc: dict[Word, SemiringValue] = {}
    for w, c in items:
        if len(w) > max_len:
            continue
        prev = acc.get(w)
        acc[w] = c if prev is None else prev + c
    return TruncatedSeries(
        instance, max_len, {w: c for w, c in acc.items() if not c.is_zero()}
    )


def coeff(s: TruncatedSeries, w: Word) -> SemiringValue:
    return s.coeff(w)


def substitute(
    p: Polynomial,
    assignment: Mapping[str, TruncatedSeries],
    max_len: int,
    variables: Iterable[str] | None = None,
) -> TruncatedSeries:
    """Evaluate a polynomial under a variable assignment, truncated at max_len.

    Terminal symbols act as single-letter series.  When the variable set is
    supplied, unbound variables raise instead of being read as terminals.
    """
    if variables is not None:
        check_assignment_covers(p, assignment, variables)
    inst = p.instance
    out: dict[Word, SemiringValue] = {}
    for m in p.monomials:
        partial: dict[Word, SemiringValue] = {EPSILON: m.coeff}
        for sym in m.word:
            series = assignment.get(sym)
            nxt: dict[Word, SemiringValue] = {}
            if series is None:
                for w, c in partial.items():
                    if len(w) + 1 <= max_len:
                        key = w + (sym,)
                        prev = nxt.get(key)
                        nxt[key] = c if prev is None else prev + c
            else:
                for w, c in partial.items():
                    room = max_len - len(w)
                    for sw, sc in series.coeffs.items():
                        if len(sw) <= room:
                            key = w + sw
                            add = c * sc
                            prev = nxt.get(key)
                            nxt[key] = add if prev is None else prev + add
            partial = nxt
            if not partial:
                break
        for w, c in partial.items():
            prev = out.get(w)
            out[w] = c if prev is None else prev + c
    return TruncatedSeries(
        inst, max_len, {w: c for w, c in out.items() if not c.is_zero()}
    )


def check_assignment_covers(p: Polynomial, assignment: Mapping[str, TruncatedSeries], variables: Iterable[str]) -> None:
    missing = [v for v in set(p.symbols()) & set(variables) if v not in assignment]
    if missing:
        raise SeriesError(f"unbound variables in substitution: {sorted(missing)}")


@dataclass(frozen=True)
class LassoWord:
    """Ultimately periodic omega-word u v^omega with nonempty period v."""

    prefix: Word
    period: Word

    def __post_init__(self):
        if len(self.period) < 1:
            raise SeriesError("lasso period must be nonempty")

    def letter(self, pos: int) -> str:
        if pos < len(self.prefix):
            return self.prefix[pos]
        return self.period[(pos - len(self.prefix)) % len(self.period)]

    def segment(self, pos: int, length: int) -> Word:
        return tuple(self.letter(pos + i) for i in range(length))

    def shift(self, k: int) -> "LassoWord":
        """The same omega-word with the first k letters consumed."""
        if k <= len(self.prefix):
            return LassoWord(self.prefix[k:], self.period)
        r = (k - len(self.prefix)) % len(self.period)
        return LassoWord((), self.period[r:] + self.period[:r])

    def __str__(self) -> str:
        return f"{' '.join(self.prefix)}:{' '.join(self.period)}"


# -- polynomial text syntax --------------------------------------------------
#
#   poly      := '0' | alternative ('|' alternative)*
#   alternative := ['(' value ')'] (symbol* | 'eps')
#   value     := natural | 'inf' | '-inf'
#
# A missing coefficient means the multiplicative unit; 'eps' (or an empty
# symbol list after a coefficient) denotes the empty word.


def parse_polynomial(
    text: str,
    instance: SemiringInstance,
    symbol_check: Callable[[str], bool] | None = None,
) -> Polynomial:
    text = text.strip()
    if text == "0":
        return Polynomial.zero(instance)
    terms: list[tuple[SemiringValue, Word]] = []
    for alt in _split_alternatives(text):
        coeff, rest = _take_coeff(alt, instance)
        syms = rest.split()
        if syms == ["eps"] or not syms:
            word: Word = EPSILON
        else:
            word = tuple(syms)
            if "eps" in word:
                raise SeriesError("'eps' cannot be mixed with other symbols")
        if symbol_check is not None:
            for s in word:
                if not symbol_check(s):
                    raise SeriesError(f"undeclared symbol {s!r}")
        terms.append((coeff, word))
    return Polynomial.build(instance, terms)


def _split_alternatives(text: str) -> list[str]:
    parts = [p.strip() for p in text.split("|")]
    if any(p == "" for p in parts):
        raise SeriesError(f"empty alternative in polynomial {text!r}")
    return parts


def _take_coeff(alt: str, instance: SemiringInstance) -> tuple[SemiringValue, str]:
    alt = alt.strip()
    if alt.startswith("("):
        close = alt.find(")")
        if close < 0:
            raise SeriesError(f"unbalanced coefficient in {alt!r}")
        coeff = instance.parse_value(alt[1:close])
        return coeff, alt[close + 1 :]
    return instance.one, alt


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for m in p.monomials:
        body = " ".join(m.word) if m.word else "eps"
        if m.coeff.is_one():
            parts.append(body)
        else:
            parts.append(f"({SemiringInstance.format_value(m.coeff)}) {body}")
    return " | ".join(parts)
