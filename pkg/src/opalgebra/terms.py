"""Words of the free operated semigroup over a set of letters.

A word is a nonempty sequence of prime factors; a prime factor is a letter or
an operator applied to argument words.  There is no empty word and no unit:
every constructor keeps the sequence nonempty, and concatenation is plain
juxtaposition of factor sequences.  Words are immutable and hashable, so they
can serve directly as monomial keys.

Contexts (words with a single hole) and two-hole contexts reuse the same
factor machinery with a dedicated hole prime.  Substitution splices the whole
factor sequence of the replacement into the hole, so replacing the hole by a
breadth-k word raises the breadth of the surrounding word by k - 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Union


class TermError(ValueError):
    pass


@dataclass(frozen=True)
class OperatorSignature:
    """Letters and operators, each listed in order; list order defines the
    well-order used by the monomial orderings (earlier = smaller)."""

    letters: tuple[str, ...]
    operators: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        names = list(self.letters) + [n for n, _ in self.operators]
        if len(set(names)) != len(names):
            raise TermError(f"duplicate symbol in signature: {names}")
        for name in names:
            if not name or not name.isidentifier():
                raise TermError(f"bad symbol name {name!r}")
            if name == "lam":
                raise TermError("'lam' names the coefficient parameter and cannot be a symbol")
        for name, arity in self.operators:
            if arity < 1:
                raise TermError(f"operator {name} must take at least one argument")

    def arity(self, op: str) -> int:
        for name, arity in self.operators:
            if name == op:
                return arity
        raise TermError(f"unknown operator {op!r}")

    def is_letter(self, name: str) -> bool:
        return name in self.letters

    def is_operator(self, name: str) -> bool:
        return any(name == n for n, _ in self.operators)

    def letter_rank(self, name: str) -> int:
        try:
            return self.letters.index(name)
        except ValueError:
            raise TermError(f"unknown letter {name!r}") from None

    def operator_rank(self, name: str) -> int:
        for i, (n, _) in enumerate(self.operators):
            if n == name:
                return i
        raise TermError(f"unknown operator {name!r}")


@dataclass(frozen=True)
class Letter:
    symbol: str


@dataclass(frozen=True)
class OpApp:
    op: str
    args: tuple["OmegaWord", ...]


@dataclass(frozen=True)
class Hole:
    """Placeholder prime for contexts; index 0 is the single-hole star,
    indices 1 and 2 are the two holes of a double context."""

    index: int = 0


@dataclass(frozen=True)
class MetaVar:
    """Pattern variable standing for an arbitrary nonempty word."""

    name: str


Prime = Union[Letter, OpApp, Hole, MetaVar]


@dataclass(frozen=True)
class OmegaWord:
    factors: tuple[Prime, ...]

    def __post_init__(self) -> None:
        if not self.factors:
            raise TermError("the empty word does not exist in a free semigroup")


def prime_word(p: Prime) -> OmegaWord:
    return OmegaWord((p,))


def letter_word(symbols: Iterable[str]) -> OmegaWord:
    return OmegaWord(tuple(Letter(s) for s in symbols))


def concat(u: OmegaWord, v: OmegaWord) -> OmegaWord:
    return OmegaWord(u.factors + v.factors)


def concat_all(words: Iterable[OmegaWord]) -> OmegaWord:
    factors: tuple[Prime, ...] = ()
    for w in words:
        factors = factors + w.factors
    return OmegaWord(factors)


def apply_op(sig: OperatorSignature, op: str, args: Iterable[OmegaWord]) -> OmegaWord:
    args = tuple(args)
    if len(args) != sig.arity(op):
        raise TermError(f"{op} takes {sig.arity(op)} arguments, got {len(args)}")
    return prime_word(OpApp(op, args))


def validate_word(sig: OperatorSignature, w: OmegaWord) -> None:
    """Check that every symbol belongs to the signature with the right arity."""
    for p in w.factors:
        if isinstance(p, Letter):
            if not sig.is_letter(p.symbol):
                raise TermError(f"letter {p.symbol!r} not in signature")
        elif isinstance(p, OpApp):
            if len(p.args) != sig.arity(p.op):
                raise TermError(
                    f"{p.op} takes {sig.arity(p.op)} arguments, got {len(p.args)}"
                )
            for a in p.args:
                validate_word(sig, a)


# ---------------------------------------------------------------- measures

def depth(w: OmegaWord) -> int:
    d = 0
    for p in w.factors:
        if isinstance(p, OpApp):
            d = max(d, 1 + max(depth(a) for a in p.args))
    return d


def breadth(w: OmegaWord) -> int:
    return len(w.factors)


@lru_cache(maxsize=None)
def deg_letter(w: OmegaWord) -> int:
    n = 0
    for p in w.factors:
        if isinstance(p, Letter):
            n += 1
        elif isinstance(p, OpApp):
            n += sum(deg_letter(a) for a in p.args)
    return n


def deg_op(w: OmegaWord, op: str | None = None) -> int:
    n = 0
    for p in w.factors:
        if isinstance(p, OpApp):
            if op is None or p.op == op:
                n += 1
            n += sum(deg_op(a, op) for a in p.args)
    return n


def weight(w: OmegaWord) -> int:
    """Letters plus operator occurrences; the grading every enumeration uses."""
    return deg_letter(w) + deg_op(w) + hole_count(w)


def hole_count(w: OmegaWord, index: int | None = None) -> int:
    n = 0
    for p in w.factors:
        if isinstance(p, Hole):
            if index is None or p.index == index:
                n += 1
        elif isinstance(p, OpApp):
            n += sum(hole_count(a, index) for a in p.args)
    return n


def metavars_of(w: OmegaWord) -> tuple[str, ...]:
    """Names of the pattern variables in w, in first-occurrence order."""
    seen: list[str] = []

    def walk(word: OmegaWord) -> None:
        for p in word.factors:
            if isinstance(p, MetaVar):
                if p.name not in seen:
                    seen.append(p.name)
            elif isinstance(p, OpApp):
                for a in p.args:
                    walk(a)

    walk(w)
    return tuple(seen)


# ---------------------------------------------------------------- contexts

@dataclass(frozen=True)
class StarWord:
    """Context: a word containing exactly one hole."""

    word: OmegaWord

    def __post_init__(self) -> None:
        if hole_count(self.word, 0) != 1 or hole_count(self.word) != 1:
            raise TermError("a context must contain exactly one hole")


@dataclass(frozen=True)
class DoubleStarWord:
    """Two-hole context; the holes are distinguishable and each occurs once."""

    word: OmegaWord

    def __post_init__(self) -> None:
        if hole_count(self.word, 1) != 1 or hole_count(self.word, 2) != 1:
            raise TermError("a double context needs exactly one of each hole")
        if hole_count(self.word) != 2:
            raise TermError("unexpected extra hole in double context")


# Words are hashed constantly as dictionary keys; the generated hash walks
# the whole tree every call, so memoize it on the instance.
def _hash_word(self) -> int:
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash(("W", self.factors))
        object.__setattr__(self, "_hash", h)
    return h


def _hash_opapp(self) -> int:
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash((self.op, self.args))
        object.__setattr__(self, "_hash", h)
    return h


def _hash_star(self) -> int:
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash(("S", self.word))
        object.__setattr__(self, "_hash", h)
    return h


OmegaWord.__hash__ = _hash_word  # type: ignore[assignment]
OpApp.__hash__ = _hash_opapp  # type: ignore[assignment]
StarWord.__hash__ = _hash_star  # type: ignore[assignment]
Letter.__hash__ = lambda self: hash(self.symbol)  # type: ignore[assignment]


STAR = prime_word(Hole(0))
TRIVIAL_CONTEXT = StarWord(STAR)


def _fill(w: OmegaWord, repl: dict[int, OmegaWord]) -> OmegaWord:
    out: list[Prime] = []
    for p in w.factors:
        if isinstance(p, Hole) and p.index in repl:
            out.extend(repl[p.index].factors)
        elif isinstance(p, OpApp):
            out.append(OpApp(p.op, tuple(_fill(a, repl) for a in p.args)))
        else:
            out.append(p)
    return OmegaWord(tuple(out))


@lru_cache(maxsize=None)
def substitute(context: StarWord, replacement: OmegaWord) -> OmegaWord:
    return _fill(context.word, {0: replacement})


def substitute2(context: DoubleStarWord, first: OmegaWord, second: OmegaWord) -> OmegaWord:
    """Fill both holes at once; the two holes are disjoint positions, so the
    result does not depend on any fill order."""
    return _fill(context.word, {1: first, 2: second})


def occurrences(w: OmegaWord, t: OmegaWord) -> tuple[StarWord, ...]:
    """Every context c with c[t] = w, scanning left to right and, at equal
    start position, outside before inside."""
    out: list[OmegaWord] = []
    tf = t.factors
    n = len(tf)

    def walk(word: OmegaWord, embed: Callable[[OmegaWord], OmegaWord]) -> None:
        wf = word.factors
        for i in range(len(wf)):
            if i + n <= len(wf) and wf[i : i + n] == tf:
                out.append(embed(OmegaWord(wf[:i] + (Hole(0),) + wf[i + n :])))
            p = wf[i]
            if isinstance(p, OpApp):
                for j, a in enumerate(p.args):
                    def embed_arg(inner: OmegaWord, _i: int = i, _j: int = j, _p: OpApp = p,
                                  _wf: tuple[Prime, ...] = wf,
                                  _embed: Callable[[OmegaWord], OmegaWord] = embed) -> OmegaWord:
                        new_args = _p.args[:_j] + (inner,) + _p.args[_j + 1 :]
                        return _embed(OmegaWord(_wf[:_i] + (OpApp(_p.op, new_args),) + _wf[_i + 1 :]))

                    walk(a, embed_arg)

    walk(w, lambda inner: inner)
    return tuple(StarWord(c) for c in out)


# ---------------------------------------------------------------- enumeration

@lru_cache(maxsize=None)
def struct_key(w: OmegaWord):
    """Canonical structural key; used only to fix enumeration order."""
    def pk(p: Prime):
        if isinstance(p, Letter):
            return (0, p.symbol)
        if isinstance(p, OpApp):
            return (1, p.op, tuple(struct_key(a) for a in p.args))
        if isinstance(p, Hole):
            return (2, str(p.index))
        return (3, p.name)

    return tuple(pk(p) for p in w.factors)


@lru_cache(maxsize=None)
def _words_graded(sig: OperatorSignature, max_weight: int, holes: int) -> tuple[tuple[OmegaWord, ...], ...]:
    """words[k] = all words of weight exactly k carrying the given number of
    holes (0 or 1); the hole itself counts weight 1."""
    primes: list[list[list[Prime]]] = [[[], []] for _ in range(max_weight + 1)]
    words: list[list[list[OmegaWord]]] = [[[], []] for _ in range(max_weight + 1)]
    for k in range(1, max_weight + 1):
        if k == 1:
            primes[1][0] = [Letter(s) for s in sig.letters]
            if holes:
                primes[1][1] = [Hole(0)]
        for name, arity in sig.operators:
            budget = k - 1
            if budget < arity:
                continue
            for args, h in _arg_combos(words, budget, arity, holes):
                primes[k][h].append(OpApp(name, args))
        # words of weight k: a leading prime of weight j followed by a word of
        # weight k - j, or a single prime of weight k
        for h in range(holes + 1):
            for p in primes[k][h]:
                words[k][h].append(prime_word(p))
        for j in range(1, k):
            for hp in range(holes + 1):
                for p in primes[j][hp]:
                    for hr in range(holes + 1 - hp):
                        for rest in words[k - j][hr]:
                            words[k][hp + hr].append(OmegaWord((p,) + rest.factors))
    out = []
    for k in range(max_weight + 1):
        sel = [w for w in words[k][holes]]
        sel.sort(key=struct_key)
        out.append(tuple(sel))
    return tuple(out)


def _arg_combos(words, budget: int, arity: int, holes: int):
    """Argument tuples of total weight exactly `budget` carrying at most
    `holes` holes in total, as (args, hole_count) pairs."""
    def rec(remaining_args: int, budget_left: int, holes_left: int):
        if remaining_args == 0:
            if budget_left == 0:
                yield ((), 0)
            return
        min_rest = remaining_args - 1
        for j in range(1, budget_left - min_rest + 1):
            for h in range(holes_left + 1):
                for first in words[j][h]:
                    for rest, hr in rec(remaining_args - 1, budget_left - j, holes_left - h):
                        yield ((first,) + rest, h + hr)

    yield from rec(arity, budget, holes)


@lru_cache(maxsize=None)
def enumerate_words(sig: OperatorSignature, max_weight: int) -> tuple[OmegaWord, ...]:
    """All words of weight <= max_weight, in a fixed deterministic order
    (by weight, then by structure)."""
    if max_weight < 0:
        raise TermError("max_weight must be nonnegative")
    graded = _words_graded(sig, max_weight, 0)
    out: list[OmegaWord] = []
    for k in range(1, max_weight + 1):
        out.extend(graded[k])
    return tuple(out)


@lru_cache(maxsize=None)
def enumerate_contexts(sig: OperatorSignature, max_weight: int) -> tuple[StarWord, ...]:
    """All contexts of weight <= max_weight; the hole contributes weight 1,
    so the bare hole is the unique weight-1 context."""
    graded = _words_graded(sig, max_weight, 1)
    out: list[StarWord] = []
    for k in range(1, max_weight + 1):
        out.extend(StarWord(w) for w in graded[k])
    return tuple(out)
