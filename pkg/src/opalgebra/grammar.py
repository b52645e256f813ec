"""Text form of words, coefficients and polynomials.

Words print with letters juxtaposed and operators applied with parentheses:
P(xP(y))z.  Because letters juxtapose without separators, parsing a run of
name characters is signature-directed: the run is split into letter symbols
by longest match, backtracking when a greedy split dead-ends.

A polynomial is a signed sum of terms; each term is an optional coefficient
prefix (atoms joined by '*') followed by a word.  The coefficient parameter
is the reserved name lam; parenthesized coefficient expressions support
+ - * / ^ with rational literals.  A '(' or a digit at the start of a term
always begins a coefficient, since a word starts with a symbol name.

Context holes print as '*' (or '*1' / '*2' in two-hole contexts) and
metavariables print by name; neither is accepted back by the parser, which
only reads concrete words.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import poly as P
from . import orders, terms
from .orders import OrderKind
from .poly import Coefficient, OmegaPolynomial
from .terms import Hole, Letter, MetaVar, OmegaWord, OpApp, OperatorSignature


class GrammarError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)
        self.pos = pos


# ----------------------------------------------------------------- printing

def print_word(w: OmegaWord) -> str:
    return "".join(_print_prime(p) for p in w.factors)


def _print_prime(p) -> str:
    if isinstance(p, Letter):
        return p.symbol
    if isinstance(p, MetaVar):
        return p.name
    if isinstance(p, Hole):
        return "*" if p.index == 0 else f"*{p.index}"
    return f"{p.op}({','.join(print_word(a) for a in p.args)})"


def print_coeff(c: Coefficient) -> str:
    return str(c)


def _term_prefix(c: Coefficient) -> tuple[bool, str]:
    """Sign and printable coefficient prefix ('' means coefficient one)."""
    if c.is_rational:
        q = c.as_rational()
        neg, mag = q < 0, abs(q)
        return neg, "" if mag == 1 else f"{mag}*"
    if c.den == (Fraction(1),) and sum(1 for x in c.num if x) == 1:
        k = len(c.num) - 1
        q = c.num[k]
        neg, mag = q < 0, abs(q)
        lam = "lam" if k == 1 else f"lam^{k}"
        return neg, f"{lam}*" if mag == 1 else f"{mag}*{lam}*"
    return False, f"({c})*"


def print_poly(f: OmegaPolynomial, kind: OrderKind, sig: OperatorSignature) -> str:
    if f.is_zero:
        return "0"
    parts: list[str] = []
    for w, c in P.sorted_terms(f, kind, sig):
        neg, prefix = _term_prefix(c)
        body = prefix + print_word(w)
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts)


# ------------------------------------------------------------------ lexing

_PUNCT = "()+-*/^,"


def _shown(t: "Token") -> str:
    return repr(t.text) if t.text else "end of input"


@dataclass(frozen=True)
class Token:
    kind: str  # NAME | INT | one of _PUNCT | END
    text: str
    pos: int


def _lex(src: str) -> list[Token]:
    out: list[Token] = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _PUNCT:
            out.append(Token(ch, ch, i))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            out.append(Token("INT", src[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            out.append(Token("NAME", src[i:j], i))
            i = j
            continue
        raise GrammarError(f"unexpected character {ch!r}", i)
    out.append(Token("END", "", n))
    return out


def _split_letters(sig: OperatorSignature, run: str, pos: int) -> list[str]:
    """Split a name run into letter symbols, longest match first, with
    backtracking.  Raises when no split exists."""
    by_len = sorted(sig.letters, key=len, reverse=True)
    memo: dict[int, list[str] | None] = {}

    def rec(i: int) -> list[str] | None:
        if i == len(run):
            return []
        if i in memo:
            return memo[i]
        for sym in by_len:
            if run.startswith(sym, i):
                rest = rec(i + len(sym))
                if rest is not None:
                    memo[i] = [sym] + rest
                    return memo[i]
        memo[i] = None
        return None

    split = rec(0)
    if split is None:
        raise GrammarError(f"cannot read {run!r} as letters of the signature", pos)
    return split


def _split_before_op(sig: OperatorSignature, run: str, pos: int) -> tuple[list[str], str]:
    """A name run directly before '(' ends in an operator name; the remainder
    is a run of letters.  Longest operator suffix wins."""
    ops = sorted((n for n, _ in sig.operators), key=len, reverse=True)
    for op in ops:
        if run.endswith(op):
            head = run[: -len(op)]
            try:
                return (_split_letters(sig, head, pos) if head else []), op
            except GrammarError:
                continue
    raise GrammarError(f"no operator name ends {run!r}", pos)


# ------------------------------------------------------------------ parsing

class _Parser:
    def __init__(self, sig: OperatorSignature, src: str):
        self.sig = sig
        self.toks = _lex(src)
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def take(self, kind: str) -> Token:
        t = self.toks[self.i]
        if t.kind != kind:
            raise GrammarError(f"expected {kind}, found {_shown(t)}", t.pos)
        self.i += 1
        return t

    # words

    def word(self) -> OmegaWord:
        factors: list = []
        while True:
            t = self.peek()
            if t.kind != "NAME":
                break
            if self.peek(1).kind == "(":
                head, op = _split_before_op(self.sig, t.text, t.pos)
                self.i += 2
                args = [self.word()]
                while self.peek().kind == ",":
                    self.i += 1
                    args.append(self.word())
                self.take(")")
                if len(args) != self.sig.arity(op):
                    raise GrammarError(
                        f"{op} takes {self.sig.arity(op)} arguments, got {len(args)}", t.pos
                    )
                factors.extend(Letter(s) for s in head)
                factors.append(OpApp(op, tuple(args)))
            else:
                factors.extend(Letter(s) for s in _split_letters(self.sig, t.text, t.pos))
                self.i += 1
        if not factors:
            t = self.peek()
            raise GrammarError(f"expected a word, found {_shown(t)}", t.pos)
        return OmegaWord(tuple(factors))

    # coefficient expressions (inside parentheses, full arithmetic)

    def coeff_expr(self) -> Coefficient:
        neg = False
        if self.peek().kind == "-":
            self.i += 1
            neg = True
        acc = self.coeff_mul()
        if neg:
            acc = -acc
        while self.peek().kind in "+-":
            op = self.take(self.peek().kind).kind
            rhs = self.coeff_mul()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def coeff_mul(self) -> Coefficient:
        acc = self.coeff_pow()
        while self.peek().kind in "*/":
            op = self.take(self.peek().kind).kind
            rhs = self.coeff_pow()
            if op == "/":
                if not rhs:
                    raise GrammarError("division by zero in coefficient", self.peek().pos)
                acc = acc / rhs
            else:
                acc = acc * rhs
        return acc

    def coeff_pow(self) -> Coefficient:
        base = self.coeff_atom()
        if self.peek().kind == "^":
            self.i += 1
            t = self.take("INT")
            out = P.ONE
            for _ in range(int(t.text)):
                out = out * base
            return out
        return base

    def coeff_atom(self) -> Coefficient:
        t = self.peek()
        if t.kind == "INT":
            self.i += 1
            return P.rational(int(t.text))
        if t.kind == "NAME" and t.text == "lam":
            self.i += 1
            return P.LAM
        if t.kind == "(":
            self.i += 1
            inner = self.coeff_expr()
            self.take(")")
            return inner
        raise GrammarError(f"expected a coefficient, found {_shown(t)}", t.pos)

    # terms and polynomials

    def _starts_coeff_atom(self) -> bool:
        t = self.peek()
        return t.kind in ("INT", "(") or (t.kind == "NAME" and t.text == "lam")

    def term(self) -> tuple[Coefficient, OmegaWord]:
        coeff = P.ONE
        while self._starts_coeff_atom():
            t = self.peek()
            if t.kind == "INT":
                self.i += 1
                atom = P.rational(int(t.text))
            elif t.kind == "NAME":
                self.i += 1
                atom = P.LAM
                if self.peek().kind == "^":
                    self.i += 1
                    k = int(self.take("INT").text)
                    atom = P.ONE
                    for _ in range(k):
                        atom = atom * P.LAM
            else:
                self.i += 1
                atom = self.coeff_expr()
                self.take(")")
            coeff = coeff * atom
            while self.peek().kind == "/":
                self.i += 1
                div = self.coeff_pow()
                if not div:
                    raise GrammarError("division by zero in coefficient", t.pos)
                coeff = coeff / div
            self.take("*")
        return coeff, self.word()

    def poly(self) -> OmegaPolynomial:
        pairs: list[tuple[Coefficient, OmegaWord]] = []
        t = self.peek()
        if t.kind == "INT" and t.text == "0" and self.peek(1).kind == "END":
            self.i += 1
            self.take("END")
            return P.zero()
        neg = False
        if t.kind in "+-":
            neg = t.kind == "-"
            self.i += 1
        c, w = self.term()
        pairs.append((-c if neg else c, w))
        while self.peek().kind in "+-":
            neg = self.take(self.peek().kind).kind == "-"
            c, w = self.term()
            pairs.append((-c if neg else c, w))
        self.take("END")
        return P.from_terms(pairs)


def parse_word(sig: OperatorSignature, src: str) -> OmegaWord:
    p = _Parser(sig, src)
    w = p.word()
    p.take("END")
    terms.validate_word(sig, w)
    return w


def parse_poly(sig: OperatorSignature, src: str) -> OmegaPolynomial:
    f = _Parser(sig, src).poly()
    for w in f.terms:
        terms.validate_word(sig, w)
    return f
