"""Linear combinations of words over the field of rational functions in lam.

Coefficients are exact: numerator and denominator are polynomials in lam with
rational coefficients, kept coprime with a monic denominator, so equality is
plain structural equality.  The parameter lam stays symbolic throughout; a
finished result can be specialized at any rational value that is not a pole.

Polynomials over words are dictionaries word -> coefficient that never store
zeros.  All operations return fresh objects.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from . import orders, terms
from .orders import OrderKind
from .terms import OmegaWord, OperatorSignature, StarWord


class CoefficientError(ValueError):
    pass


class PoleError(CoefficientError):
    pass


# Dense univariate polynomials, lowest degree first, normalized to have no
# trailing zero.  () is the zero polynomial.  Entries are exact rationals;
# integral values are stored as plain int (same equality and hash as the
# Fraction they stand for, far cheaper arithmetic), Fraction otherwise.
Poly = tuple[Fraction, ...]

_UNIT: "Poly" = (1,)


def _exact(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def _trim(cs: list[Fraction]) -> Poly:
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def _padd(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def _pneg(a: Poly) -> Poly:
    return tuple(-c for c in a)


def _pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    if len(a) == 1 and len(b) == 1:
        return (a[0] * b[0],)
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return _trim(out)


def _pdivmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    while len(r) >= len(b) and _trim(r):
        r = list(_trim(r))
        if len(r) < len(b):
            break
        c = Fraction(r[-1]) / Fraction(b[-1])
        d = len(r) - len(b)
        q[d] = c
        for i, cb in enumerate(b):
            r[i + d] -= c * cb
        r = list(_trim(r))
    return _trim(q), _trim(r)


def _pgcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, _pdivmod(a, b)[1]
    if a:
        lead = Fraction(a[-1])
        a = tuple(_exact(Fraction(c) / lead) for c in a)
    return a


def _peval(a: Poly, x: Fraction) -> Fraction:
    out = Fraction(0)
    for c in reversed(a):
        out = out * x + c
    return out


@dataclass(frozen=True)
class Coefficient:
    """Element of Q(lam), stored reduced with a monic denominator."""

    num: Poly
    den: Poly

    @staticmethod
    def make(num: Poly, den: Poly) -> "Coefficient":
        num = _trim(list(num))
        den = _trim(list(den))
        if not den:
            raise CoefficientError("zero denominator")
        if not num:
            return ZERO
        g = _pgcd(num, den)
        if len(g) > 1:
            num = _pdivmod(num, g)[0]
            den = _pdivmod(den, g)[0]
        lead = Fraction(den[-1])
        if lead != 1:
            num = tuple(_exact(Fraction(c) / lead) for c in num)
            den = tuple(_exact(Fraction(c) / lead) for c in den)
        else:
            num = tuple(_exact(c) for c in num)
            den = tuple(_exact(c) for c in den)
        return Coefficient(num, den)

    @staticmethod
    def from_rational(q) -> "Coefficient":
        q = Fraction(q)
        return Coefficient((_exact(q),), _UNIT) if q else ZERO

    def __bool__(self) -> bool:
        return bool(self.num)

    def __add__(self, other: "Coefficient") -> "Coefficient":
        # polynomial denominators are the unit in almost every computation
        if self.den == _UNIT and other.den == _UNIT:
            s = _padd(self.num, other.num)
            return Coefficient(s, _UNIT) if s else ZERO
        return Coefficient.make(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den),
        )

    def __neg__(self) -> "Coefficient":
        return Coefficient(_pneg(self.num), self.den)

    def __sub__(self, other: "Coefficient") -> "Coefficient":
        return self + (-other)

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        if not self or not other:
            return ZERO
        if self.den == _UNIT and other.den == _UNIT:
            return Coefficient(_pmul(self.num, other.num), _UNIT)
        return Coefficient.make(_pmul(self.num, other.num), _pmul(self.den, other.den))

    def __truediv__(self, other: "Coefficient") -> "Coefficient":
        if not other:
            raise CoefficientError("division by zero coefficient")
        if not self:
            return ZERO
        return Coefficient.make(_pmul(self.num, other.den), _pmul(self.den, other.num))

    def inverse(self) -> "Coefficient":
        return ONE / self

    @property
    def is_rational(self) -> bool:
        return len(self.num) <= 1 and self.den == _UNIT

    def as_rational(self) -> Fraction:
        if not self.is_rational:
            raise CoefficientError(f"{self} is not a plain rational")
        return Fraction(self.num[0]) if self.num else Fraction(0)

    def specialize(self, value: Fraction) -> Fraction:
        bottom = _peval(self.den, value)
        if bottom == 0:
            raise PoleError(f"lam = {value} is a pole of {self}")
        return _peval(self.num, value) / bottom

    def __str__(self) -> str:
        top = _poly_str(self.num)
        if self.den == _UNIT:
            return top
        return f"({top})/({_poly_str(self.den)})"


def _monomial_str(c: Fraction, k: int) -> str:
    if k == 0:
        return str(c)
    lam = "lam" if k == 1 else f"lam^{k}"
    if c == 1:
        return lam
    if c == -1:
        return f"-{lam}"
    return f"{c}*{lam}"


def _poly_str(p: Poly) -> str:
    if not p:
        return "0"
    present = [(p[k], k) for k in range(len(p) - 1, -1, -1) if p[k] != 0]
    out = _monomial_str(*present[0])
    for c, k in present[1:]:
        sign, mag = (" - ", -c) if c < 0 else (" + ", c)
        out += sign + _monomial_str(mag, k)
    return out


ZERO = Coefficient((), _UNIT)
ONE = Coefficient((1,), _UNIT)
LAM = Coefficient((0, 1), _UNIT)


def rational(q) -> Coefficient:
    return Coefficient.from_rational(q)


# ---------------------------------------------------------------- polynomials

@dataclass
class OmegaPolynomial:
    terms: dict[OmegaWord, Coefficient]

    def __post_init__(self) -> None:
        self.terms = {w: c for w, c in self.terms.items() if c}

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        return isinstance(other, OmegaPolynomial) and self.terms == other.terms

    def __add__(self, other: "OmegaPolynomial") -> "OmegaPolynomial":
        return add(self, other)

    def __sub__(self, other: "OmegaPolynomial") -> "OmegaPolynomial":
        return add(self, negate(other))

    def __neg__(self) -> "OmegaPolynomial":
        return negate(self)

    def __mul__(self, other: "OmegaPolynomial") -> "OmegaPolynomial":
        return mul(self, other)


def _raw(acc: dict[OmegaWord, Coefficient]) -> OmegaPolynomial:
    # bypasses the zero filter; callers must never pass zero coefficients
    f = object.__new__(OmegaPolynomial)
    f.terms = acc
    return f


def zero() -> OmegaPolynomial:
    return OmegaPolynomial({})


def monomial(w: OmegaWord, c: Coefficient = ONE) -> OmegaPolynomial:
    return OmegaPolynomial({w: c})


def from_terms(pairs: Iterable[tuple[Coefficient, OmegaWord]]) -> OmegaPolynomial:
    acc: dict[OmegaWord, Coefficient] = {}
    for c, w in pairs:
        prev = acc.get(w)
        acc[w] = c if prev is None else prev + c
    return OmegaPolynomial(acc)


def add(f: OmegaPolynomial, g: OmegaPolynomial) -> OmegaPolynomial:
    acc = dict(f.terms)
    for w, c in g.terms.items():
        prev = acc.get(w)
        s = c if prev is None else prev + c
        if s:
            acc[w] = s
        elif prev is not None:
            del acc[w]
    return _raw(acc)


def negate(f: OmegaPolynomial) -> OmegaPolynomial:
    return _raw({w: -c for w, c in f.terms.items()})


def scale(c: Coefficient, f: OmegaPolynomial) -> OmegaPolynomial:
    if not c:
        return zero()
    return _raw({w: c * k for w, k in f.terms.items()})


def replace_term(f: OmegaPolynomial, w: OmegaWord, replacement: OmegaPolynomial) -> OmegaPolynomial:
    """f with its w-term removed and coeff(w) times the replacement added;
    the shape of one elimination step."""
    c = f.terms.get(w)
    if c is None:
        raise CoefficientError("the word being replaced does not occur")
    acc = dict(f.terms)
    del acc[w]
    for u, cu in replacement.terms.items():
        s = c * cu
        prev = acc.get(u)
        if prev is not None:
            s = prev + s
        if s:
            acc[u] = s
        elif prev is not None:
            del acc[u]
    return _raw(acc)


def mul(f: OmegaPolynomial, g: OmegaPolynomial) -> OmegaPolynomial:
    acc: dict[OmegaWord, Coefficient] = {}
    for wf, cf in f.terms.items():
        for wg, cg in g.terms.items():
            w = terms.concat(wf, wg)
            c = cf * cg
            prev = acc.get(w)
            s = c if prev is None else prev + c
            if s:
                acc[w] = s
            elif prev is not None:
                del acc[w]
    return _raw(acc)


def op_linear(sig: OperatorSignature, op: str, args: list[OmegaPolynomial]) -> OmegaPolynomial:
    """Apply an operator linearly in every argument slot."""
    if len(args) != sig.arity(op):
        raise terms.TermError(f"{op} takes {sig.arity(op)} arguments, got {len(args)}")
    acc: dict[OmegaWord, Coefficient] = {}

    def rec(i: int, chosen: tuple[OmegaWord, ...], coeff: Coefficient) -> None:
        if i == len(args):
            w = terms.apply_op(sig, op, chosen)
            prev = acc.get(w)
            s = coeff if prev is None else prev + coeff
            if s:
                acc[w] = s
            elif prev is not None:
                del acc[w]
            return
        for word, c in args[i].terms.items():
            rec(i + 1, chosen + (word,), coeff * c)

    rec(0, (), ONE)
    return _raw(acc)


def subst_linear(context: StarWord, f: OmegaPolynomial) -> OmegaPolynomial:
    acc: dict[OmegaWord, Coefficient] = {}
    for w, c in f.terms.items():
        filled = terms.substitute(context, w)
        prev = acc.get(filled)
        s = c if prev is None else prev + c
        if s:
            acc[filled] = s
        elif prev is not None:
            del acc[filled]
    return _raw(acc)


def leading(f: OmegaPolynomial, kind: OrderKind, sig: OperatorSignature) -> tuple[OmegaWord, Coefficient]:
    if f.is_zero:
        raise CoefficientError("the zero polynomial has no leading term")
    key = orders.sort_key(kind, sig)
    w = max(f.terms, key=key)
    return w, f.terms[w]


def make_monic(f: OmegaPolynomial, kind: OrderKind, sig: OperatorSignature) -> OmegaPolynomial:
    _, c = leading(f, kind, sig)
    return scale(ONE / c, f)


def specialize_lambda(f: OmegaPolynomial, value) -> OmegaPolynomial:
    """Evaluate every coefficient at lam = value (an exact rational).  A pole
    in any term is an error naming the offending word."""
    value = Fraction(value)
    acc: dict[OmegaWord, Coefficient] = {}
    for w, c in f.terms.items():
        try:
            q = c.specialize(value)
        except PoleError as e:
            raise PoleError(f"{e} (coefficient of a term)") from None
        if q:
            acc[w] = Coefficient.from_rational(q)
    return OmegaPolynomial(acc)


def sorted_terms(f: OmegaPolynomial, kind: OrderKind, sig: OperatorSignature) -> list[tuple[OmegaWord, Coefficient]]:
    key = orders.sort_key(kind, sig)
    return sorted(f.terms.items(), key=lambda t: key(t[0]), reverse=True)
