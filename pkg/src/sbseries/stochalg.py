"""Exact algebra of iterated stochastic integrals on a single step [0, h].

A word (m1, ..., mn) with letters in {0, 1, ..., M} denotes the iterated
integral with innermost integrator dW_{m1} and outermost dW_{mn}; letter 0
is the time differential dt.  The orientation is pinned by the identity

    int_0^h (h - s) * dW_1(s) = I[1,0]

which the test suite checks against the shuffle calculus.  Under the Ito
reading words multiply by the quasi-shuffle product (shuffle plus a
contraction merging equal nonzero letters into a 0); under the
Stratonovich reading by the plain shuffle product.

Scalars are polynomials in sqrt(h) with exact rational coefficients
(:class:`HPoly`); exponents are stored as integer counts of sqrt(h)
powers.  The all-zero word of length n is never stored: it is normalized
eagerly to the scalar h^n/n! on the empty word, which makes the
representation basis {empty-word scalars} + {words with at least one
nonzero letter} canonical, so equality and leading-order extraction are
syntactic.
"""

from __future__ import annotations

import math
import re
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import factorial

__all__ = [
    "Interp",
    "HPoly",
    "WordPoly",
    "append_letter",
    "time_integrate",
    "product",
    "strat_to_ito",
    "expectation",
    "second_moment",
    "ms_leading_order",
    "format_wordpoly",
    "parse_wordpoly",
]

Word = tuple[int, ...]


class Interp(str, Enum):
    """How the words of a WordPoly are read."""

    ITO = "ito"
    STRATONOVICH = "stratonovich"


class HPoly:
    """Polynomial sum c_k h^(k/2) with exact rational coefficients.

    Immutable; exponents are integers counting sqrt(h) powers (negative
    allowed).  Zero coefficients are never stored.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=None):
        data: dict[int, Fraction] = {}
        if coeffs:
            for k, v in dict(coeffs).items():
                f = Fraction(v)
                if f:
                    data[int(k)] = data.get(int(k), Fraction(0)) + f
        object.__setattr__(self, "_c", {k: v for k, v in data.items() if v})

    def __setattr__(self, name, value):
        raise AttributeError("HPoly is immutable")

    @classmethod
    def zero(cls) -> "HPoly":
        return cls()

    @classmethod
    def one(cls) -> "HPoly":
        return cls({0: 1})

    @classmethod
    def h_power(cls, k2: int, coeff=1) -> "HPoly":
        """coeff * h^(k2/2)."""
        return cls({k2: coeff})

    def items(self):
        """(k2, coefficient) pairs, sorted by exponent."""
        return sorted(self._c.items())

    @property
    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self) -> int:
        return hash(frozenset(self._c.items()))

    def __add__(self, other: "HPoly") -> "HPoly":
        if not isinstance(other, HPoly):
            return NotImplemented
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out.get(k, Fraction(0)) + v
        return HPoly(out)

    def __neg__(self) -> "HPoly":
        return HPoly({k: -v for k, v in self._c.items()})

    def __sub__(self, other: "HPoly") -> "HPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, HPoly):
            out: dict[int, Fraction] = {}
            for k1, v1 in self._c.items():
                for k2, v2 in other._c.items():
                    k = k1 + k2
                    out[k] = out.get(k, Fraction(0)) + v1 * v2
            return HPoly(out)
        if isinstance(other, (int, Fraction)):
            return HPoly({k: v * other for k, v in self._c.items()})
        return NotImplemented

    __rmul__ = __mul__

    def min_exponent(self) -> Fraction | None:
        """Smallest h-exponent with a nonzero coefficient, None if zero."""
        if not self._c:
            return None
        return Fraction(min(self._c), 2)

    def eval(self, h: float) -> float:
        """Numeric value at step size h >= 0."""
        root = math.sqrt(h)
        return float(sum(float(v) * root**k for k, v in self._c.items()))

    def __str__(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for k, v in self.items():
            parts.append((("-" if v < 0 else "+"), _scalar_factors(abs(v), k)))
        return _join_terms(parts)

    def __repr__(self) -> str:
        return f"HPoly({self._c!r})"


def _scalar_factors(mag: Fraction, k2: int) -> str:
    factors = []
    if mag != 1 or k2 == 0:
        factors.append(str(mag))
    if k2 != 0:
        factors.append(_h_factor(k2))
    return " * ".join(factors)


def _h_factor(k2: int) -> str:
    e = Fraction(k2, 2)
    if e == 1:
        return "h"
    if e.denominator == 1 and e > 0:
        return f"h^{e}"
    return f"h^({e})"


def _join_terms(parts: list[tuple[str, str]]) -> str:
    first_sign, first_term = parts[0]
    out = ("-" if first_sign == "-" else "") + first_term
    for sign, term in parts[1:]:
        out += f" {sign} {term}"
    return out


class WordPoly:
    """Formal linear combination of iterated-integral words.

    Maps words to :class:`HPoly` scalars and carries the interpretation tag
    under which the words are read.  Construction normalizes: zero scalars
    are dropped and all-zero words are folded into the empty-word scalar.
    """

    __slots__ = ("_terms", "interp")

    def __init__(self, interp: Interp, terms=None):
        interp = Interp(interp)
        data: dict[Word, HPoly] = {}
        if terms:
            for w, hp in dict(terms).items():
                w = tuple(int(l) for l in w)
                if any(l < 0 for l in w):
                    raise ValueError(f"negative letter in word {w}")
                if not isinstance(hp, HPoly):
                    hp = HPoly({0: hp})
                if hp.is_zero:
                    continue
                if w and all(l == 0 for l in w):
                    # Cauchy identity: the all-zero word of length n is h^n/n!.
                    n = len(w)
                    hp = hp * HPoly.h_power(2 * n, Fraction(1, factorial(n)))
                    w = ()
                prev = data.get(w)
                merged = hp if prev is None else prev + hp
                if merged.is_zero:
                    data.pop(w, None)
                else:
                    data[w] = merged
        object.__setattr__(self, "_terms", data)
        object.__setattr__(self, "interp", interp)

    def __setattr__(self, name, value):
        raise AttributeError("WordPoly is immutable")

    @classmethod
    def zero(cls, interp: Interp) -> "WordPoly":
        return cls(interp)

    @classmethod
    def unit(cls, interp: Interp) -> "WordPoly":
        return cls(interp, {(): HPoly.one()})

    @classmethod
    def from_word(cls, word, interp: Interp, coeff=1) -> "WordPoly":
        return cls(interp, {tuple(word): HPoly({0: coeff})})

    @classmethod
    def from_scalar(cls, hpoly: HPoly, interp: Interp) -> "WordPoly":
        return cls(interp, {(): hpoly})

    def terms(self):
        """(word, HPoly) pairs sorted by (length, word)."""
        return sorted(self._terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def words(self):
        return set(self._terms)

    def coefficient(self, word) -> HPoly:
        return self._terms.get(tuple(word), HPoly.zero())

    @property
    def scalar_part(self) -> HPoly:
        return self._terms.get((), HPoly.zero())

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WordPoly):
            return NotImplemented
        return self.interp is other.interp and self._terms == other._terms

    def __add__(self, other: "WordPoly") -> "WordPoly":
        if not isinstance(other, WordPoly):
            return NotImplemented
        _require_same_interp(self, other)
        out = dict(self._terms)
        for w, hp in other._terms.items():
            prev = out.get(w)
            out[w] = hp if prev is None else prev + hp
        return WordPoly(self.interp, out)

    def __neg__(self) -> "WordPoly":
        return WordPoly(self.interp, {w: -hp for w, hp in self._terms.items()})

    def __sub__(self, other: "WordPoly") -> "WordPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, WordPoly):
            return product(self, other)
        if isinstance(other, (int, Fraction, HPoly)):
            if not isinstance(other, HPoly):
                other = HPoly({0: other})
            return WordPoly(self.interp, {w: hp * other for w, hp in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, HPoly)):
            return self * other
        return NotImplemented

    def __str__(self) -> str:
        return format_wordpoly(self)

    def __repr__(self) -> str:
        return f"WordPoly({self.interp.value}: {format_wordpoly(self)})"


def _require_same_interp(p: WordPoly, q: WordPoly) -> None:
    if p.interp is not q.interp:
        raise ValueError(
            f"interpretation mismatch: {p.interp.value} vs {q.interp.value}"
        )


# ---------------------------------------------------------------------------
# word combinatorics


@lru_cache(maxsize=None)
def _shuffle(v: Word, w: Word) -> tuple[tuple[Word, int], ...]:
    if not v:
        return ((w, 1),)
    if not w:
        return ((v, 1),)
    out: dict[Word, int] = {}
    a, b = v[-1], w[-1]
    for u, c in _shuffle(v[:-1], w):
        u = u + (a,)
        out[u] = out.get(u, 0) + c
    for u, c in _shuffle(v, w[:-1]):
        u = u + (b,)
        out[u] = out.get(u, 0) + c
    return tuple(sorted(out.items()))


@lru_cache(maxsize=None)
def _quasi_shuffle(v: Word, w: Word) -> tuple[tuple[Word, int], ...]:
    if not v:
        return ((w, 1),)
    if not w:
        return ((v, 1),)
    out: dict[Word, int] = {}
    a, b = v[-1], w[-1]
    for u, c in _quasi_shuffle(v[:-1], w):
        u = u + (a,)
        out[u] = out.get(u, 0) + c
    for u, c in _quasi_shuffle(v, w[:-1]):
        u = u + (b,)
        out[u] = out.get(u, 0) + c
    if a == b != 0:
        # dW_m dW_m = dt contraction of the Ito product rule
        for u, c in _quasi_shuffle(v[:-1], w[:-1]):
            u = u + (0,)
            out[u] = out.get(u, 0) + c
    return tuple(sorted(out.items()))


def _word_product(v: Word, w: Word, interp: Interp):
    if interp is Interp.ITO:
        return _quasi_shuffle(v, w)
    return _shuffle(v, w)


# ---------------------------------------------------------------------------
# operations


def product(p1: WordPoly, p2: WordPoly) -> WordPoly:
    """Bilinear product; quasi-shuffle under Ito, shuffle under Stratonovich."""
    _require_same_interp(p1, p2)
    out: dict[Word, HPoly] = {}
    for w1, c1 in p1._terms.items():
        for w2, c2 in p2._terms.items():
            scale = c1 * c2
            for u, n in _word_product(w1, w2, p1.interp):
                term = scale * n
                prev = out.get(u)
                out[u] = term if prev is None else prev + term
    return WordPoly(p1.interp, out)


def append_letter(p: WordPoly, m: int) -> WordPoly:
    """Integrate against *dW_m over the step: each word w becomes w + (m,).

    Scalar powers h^n multiplying a word are first expanded into zero-words
    (h^n = n! I[0,...,0]) so that the integrand is a plain word combination;
    this realizes int_0^h s^n/n! dW_m(s) = I[0^n, m].  Half-odd scalar
    powers have no word representation and are rejected.
    """
    m = int(m)
    if m < 0:
        raise ValueError(f"letter out of range: {m}")
    out: dict[Word, HPoly] = {}

    def add(word: Word, hp: HPoly) -> None:
        prev = out.get(word)
        out[word] = hp if prev is None else prev + hp

    for w, hp in p._terms.items():
        for k2, coeff in hp.items():
            if k2 == 0:
                add(w + (m,), HPoly({0: coeff}))
            elif k2 % 2 == 0:
                n = k2 // 2
                scale = coeff * factorial(n)
                for u, cnt in _word_product((0,) * n, w, p.interp):
                    add(u + (m,), HPoly({0: scale * cnt}))
            else:
                raise ValueError(
                    "cannot integrate a half-odd power of h against dW "
                    f"(h^({Fraction(k2, 2)}))"
                )
    return WordPoly(p.interp, out)


def time_integrate(p: WordPoly, q: int) -> WordPoly:
    """Convolve with the kernel (h-s)^(q-1)/(q-1)!: append q zero letters.

    On empty-word scalars this is the exact Cauchy iterated time integral,
    h^a -> h^(a+q) / ((a+1)(a+2)...(a+q)), valid for any half-integer a.
    """
    q = int(q)
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    if q == 0:
        return p
    out: dict[Word, HPoly] = {}
    for w, hp in p._terms.items():
        if w:
            new = w + (0,) * q
            prev = out.get(new)
            out[new] = hp if prev is None else prev + hp
        else:
            acc: dict[int, Fraction] = {}
            for k2, coeff in hp.items():
                a = Fraction(k2, 2)
                mult = Fraction(1)
                for j in range(1, q + 1):
                    mult /= a + j
                k = k2 + 2 * q
                acc[k] = acc.get(k, Fraction(0)) + coeff * mult
            prev = out.get(())
            hp_new = HPoly(acc)
            out[()] = hp_new if prev is None else prev + hp_new
    return WordPoly(p.interp, out)


@lru_cache(maxsize=None)
def _ito_of_strat_word(w: Word) -> WordPoly:
    """Ito representation of the single Stratonovich word J_w."""
    if not w:
        return WordPoly.unit(Interp.ITO)
    head, a = w[:-1], w[-1]
    res = append_letter(_ito_of_strat_word(head), a)
    if head and head[-1] == a != 0:
        res = res + Fraction(1, 2) * time_integrate(_ito_of_strat_word(head[:-1]), 1)
    return res


def strat_to_ito(p: WordPoly) -> WordPoly:
    """Equal-in-law Ito representation of a Stratonovich-tagged WordPoly."""
    if p.interp is not Interp.STRATONOVICH:
        raise ValueError(f"expected a Stratonovich-tagged WordPoly, got {p.interp.value}")
    out = WordPoly.zero(Interp.ITO)
    for w, hp in p._terms.items():
        out = out + hp * _ito_of_strat_word(w)
    return out


def _as_ito(p: WordPoly) -> WordPoly:
    return p if p.interp is Interp.ITO else strat_to_ito(p)


def expectation(p: WordPoly) -> HPoly:
    """Exact expectation: in the Ito reading only the scalar part survives."""
    return _as_ito(p).scalar_part


def second_moment(p: WordPoly) -> HPoly:
    """Exact E[p^2], computed via the quasi-shuffle square of the Ito form."""
    ip = _as_ito(p)
    return expectation(product(ip, ip))


def ms_leading_order(p: WordPoly):
    """Exact L2 order in h: half the leading exponent of the second moment.

    Returns math.inf for the zero (in law) polynomial.
    """
    sm = second_moment(p)
    e = sm.min_exponent()
    if e is None:
        return math.inf
    return e / 2


# ---------------------------------------------------------------------------
# textual form


def format_wordpoly(p: WordPoly) -> str:
    """Canonical textual form, e.g. ``3/2 * h^(1/2) * I[1,1,0]``."""
    if p.is_zero:
        return "0"
    parts: list[tuple[str, str]] = []
    for w, hp in p.terms():
        for k2, coeff in hp.items():
            mag = abs(coeff)
            factors = []
            if mag != 1 or (k2 == 0 and not w):
                factors.append(str(mag))
            if k2 != 0:
                factors.append(_h_factor(k2))
            if w:
                factors.append("I[" + ",".join(str(l) for l in w) + "]")
            parts.append((("-" if coeff < 0 else "+"), " * ".join(factors)))
    return _join_terms(parts)


_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+(?:/\d+)?)|(?P<h>h)|(?P<I>I\[)|(?P<op>[\^()*+,\[\]-]))"
)


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        i = 0
        while i < len(text):
            m = _TOKEN.match(text, i)
            if m is None:
                stripped = text[i:].lstrip()
                if not stripped:
                    break
                at = len(text) - len(stripped)
                raise ValueError(f"unexpected character {text[at]!r} at position {at}")
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            i = m.end()

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, "", len(self.text))

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, val, at = self.next()
        if val != value:
            raise ValueError(f"expected {value!r} at position {at}")


def parse_wordpoly(text: str, interp: Interp) -> WordPoly:
    """Parse the textual form; inverse of :func:`format_wordpoly`.

    Each term is a '*'-joined product of at most one rational, one h-power
    (``h``, ``h^2``, ``h^(1/2)``, ``h^(-1/2)``) and one word ``I[...]``;
    terms are joined by '+'/'-'; ``1`` denotes the empty word.
    """
    sc = _Scanner(text)
    result = WordPoly.zero(Interp(interp))
    first = True
    while True:
        kind, val, at = sc.peek()
        if kind is None:
            if first:
                raise ValueError("empty expression")
            break
        sign = 1
        if val in "+-":
            sc.next()
            sign = -1 if val == "-" else 1
        elif not first:
            raise ValueError(f"expected '+' or '-' at position {at}")
        result = result + _parse_term(sc, sign, interp)
        first = False
    return result


def _parse_term(sc: _Scanner, sign: int, interp: Interp) -> WordPoly:
    coeff = Fraction(sign)
    k2 = 0
    word: Word | None = None
    while True:
        kind, val, at = sc.next()
        if kind == "number":
            coeff *= Fraction(val)
        elif kind == "h":
            e = _parse_h_exponent(sc)
            if (2 * e).denominator != 1:
                raise ValueError(f"h exponent {e} is not a half-integer (position {at})")
            k2 += int(2 * e)
        elif kind == "I":
            if word is not None:
                raise ValueError(f"more than one word factor in a term (position {at})")
            word = _parse_word(sc)
        else:
            raise ValueError(f"expected a factor at position {at}")
        nkind, nval, _ = sc.peek()
        if nval == "*":
            sc.next()
            continue
        break
    return WordPoly(interp, {(word or ()): HPoly.h_power(k2, coeff)})


def _parse_h_exponent(sc: _Scanner) -> Fraction:
    kind, val, at = sc.peek()
    if val != "^":
        return Fraction(1)
    sc.next()
    kind, val, at = sc.next()
    if val == "(":
        sign = 1
        kind, val, at = sc.next()
        if val == "-":
            sign = -1
            kind, val, at = sc.next()
        if kind != "number":
            raise ValueError(f"expected exponent at position {at}")
        e = sign * Fraction(val)
        sc.expect(")")
        return e
    if val == "-":
        kind, val, at = sc.next()
        if kind != "number":
            raise ValueError(f"expected exponent at position {at}")
        return -Fraction(val)
    if kind != "number":
        raise ValueError(f"expected exponent at position {at}")
    return Fraction(val)


def _parse_word(sc: _Scanner) -> Word:
    letters: list[int] = []
    kind, val, at = sc.peek()
    if val == "]":
        sc.next()
        return ()
    while True:
        kind, val, at = sc.next()
        if kind != "number" or "/" in val:
            raise ValueError(f"expected a letter at position {at}")
        letters.append(int(val))
        kind, val, at = sc.next()
        if val == ",":
            continue
        if val == "]":
            break
        raise ValueError(f"expected ',' or ']' at position {at}")
    return tuple(letters)
