"""Monomial well-orders on operated words.

Four orders are provided:

``deglex``
    Degree, then letters left to right.  Defined on letter words only.

``o1``
    For any signature.  Write a word without brackets as alternating letter
    blocks and operator applications ``u0 d1(args1) u1 ... dt(argst) ut`` and
    compare the tuple ``(t, d1, args1, ..., dt, argst, u0, ..., ut)``
    lexicographically: more operator factors first, then each operator by
    signature rank, then its argument vector entry by entry (recursively),
    then the letter blocks by deglex.  When two operators differ, their rank
    decides and nothing after them is inspected, so the equal-arity guarantee
    for argument vectors holds whenever a vector comparison is reached.

``o2``
    For the signature with the single unary operator D.  Compare total letter
    degree, then the top-level factors positionally: letters by rank, any
    D-factor above any letter, and two D-factors by their arguments
    (recursively with the full order).  Equal letter degree rules out one
    factor sequence being a strict prefix of the other, since every prime
    factor contains at least one letter.

``o3``
    For the signature with unary P and D.  Write a word as letter/D blocks
    separated by top-level P-factors ``u0 P(b1) u1 ... P(bn) un`` and compare

        (letter degree, P degree, D-enclosure of P, n,
         b1, ..., bn, u0, ..., un)

    where the ``b_i`` recurse through the full order and the blocks compare
    by (letter degree, P degree, factors positionally) with the same factor
    rules as ``o2``.  The D-enclosure count (for each P occurrence, the
    number of D applications strictly above it, summed) is what orients the
    Leibniz rule: without it, instantiating D(xy) -> D(x)y + ... with a word
    y carrying a top-level P-factor would flip the comparison at the
    top-level-P count and the intended left side would no longer lead.
    Rewriting with P-P, Leibniz, and D-of-P rules preserves letter and P
    degree, so this component is stable exactly where it has to be.

Every order is exposed both as a three-way ``compare`` and as a sort key:
``sort_key(kind, sig)`` returns a cached word -> tuple function whose tuples
compare exactly like the order.  Keys are built so that any two tuples
reaching the same position hold the same component type, which makes Python
tuple comparison safe and transitive.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

from .terms import (
    Hole,
    Letter,
    MetaVar,
    OmegaWord,
    OpApp,
    OperatorSignature,
    Prime,
    StarWord,
    deg_letter,
    enumerate_contexts,
    enumerate_words,
    substitute,
)


class OrderError(ValueError):
    pass


class OrderKind(str, enum.Enum):
    DEGLEX = "deglex"
    O1 = "o1"
    O2 = "o2"
    O3 = "o3"


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def validate_kind(kind: OrderKind, sig: OperatorSignature) -> None:
    ops = {(n, a) for n, a in sig.operators}
    if kind is OrderKind.O2 and ops != {("D", 1)}:
        raise OrderError("o2 needs the signature with the single operator D/1")
    if kind is OrderKind.O3 and ops != {("P", 1), ("D", 1)}:
        raise OrderError("o3 needs the signature with operators P/1 and D/1")


def _bad_prime(p: Prime) -> OrderError:
    if isinstance(p, (Hole, MetaVar)):
        return OrderError("holes and pattern variables do not participate in orders")
    return OrderError(f"factor {p!r} not covered by this order")


# Key grammar. Each component position always carries one fixed shape, with
# class tags deciding before any recursion, so tuple comparison never mixes
# types and is automatically total and transitive on the image.

def _key_deglex(sig: OperatorSignature):
    def block_key(factors: tuple[Prime, ...]):
        ranks = []
        for p in factors:
            if not isinstance(p, Letter):
                raise OrderError("deglex is defined on letter words only")
            ranks.append(sig.letter_rank(p.symbol))
        return (len(ranks), tuple(ranks))

    def key(w: OmegaWord):
        return block_key(w.factors)

    return key, block_key


def _key_o1(sig: OperatorSignature, rec):
    blk = _key_deglex(sig)[1]

    def key(w: OmegaWord):
        ops: list = []
        blocks: list = []
        current: list[Prime] = []
        for p in w.factors:
            if isinstance(p, Letter):
                current.append(p)
            elif isinstance(p, OpApp):
                blocks.append(blk(tuple(current)))
                current = []
                ops.append((sig.operator_rank(p.op), tuple(rec(a) for a in p.args)))
            else:
                raise _bad_prime(p)
        blocks.append(blk(tuple(current)))
        return (len(ops), tuple(ops), tuple(blocks))

    return key


def _key_o2(sig: OperatorSignature, rec):
    def factor_key(p: Prime):
        if isinstance(p, Letter):
            return (0, sig.letter_rank(p.symbol))
        if isinstance(p, OpApp):
            return (1, rec(p.args[0]))
        raise _bad_prime(p)

    def key(w: OmegaWord):
        return (deg_letter(w),) + tuple(factor_key(p) for p in w.factors)

    return key


@lru_cache(maxsize=None)
def _deg_p(w: OmegaWord) -> int:
    n = 0
    for p in w.factors:
        if isinstance(p, OpApp):
            if p.op == "P":
                n += 1
            n += sum(_deg_p(a) for a in p.args)
    return n


@lru_cache(maxsize=None)
def _d_enclosure(w: OmegaWord) -> int:
    """Sum over P occurrences of the number of D applications above them."""
    n = 0
    for p in w.factors:
        if isinstance(p, OpApp):
            inner = sum(_d_enclosure(a) for a in p.args)
            if p.op == "D":
                inner += sum(_deg_p(a) for a in p.args)
            n += inner
    return n


def _key_o3(sig: OperatorSignature, rec):
    def factor_key(p: Prime):
        # letter/D factors inside a block; P never appears here
        if isinstance(p, Letter):
            return (0, sig.letter_rank(p.symbol))
        if isinstance(p, OpApp) and p.op == "D":
            return (1, rec(p.args[0]))
        raise _bad_prime(p)

    def block_key(factors: tuple[Prime, ...]):
        w = OmegaWord(factors) if factors else None
        dx = deg_letter(w) if w else 0
        dp = _deg_p(w) if w else 0
        return (dx, dp, tuple(factor_key(p) for p in factors))

    def key(w: OmegaWord):
        p_args: list = []
        blocks: list = []
        current: list[Prime] = []
        for p in w.factors:
            if isinstance(p, OpApp) and p.op == "P":
                blocks.append(block_key(tuple(current)))
                current = []
                p_args.append(rec(p.args[0]))
            elif isinstance(p, (Letter, OpApp)):
                current.append(p)
            else:
                raise _bad_prime(p)
        blocks.append(block_key(tuple(current)))
        return (
            deg_letter(w),
            _deg_p(w),
            _d_enclosure(w),
            len(p_args),
            tuple(p_args),
            tuple(blocks),
        )

    return key


@lru_cache(maxsize=None)
def _key_builder(kind: OrderKind, sig: OperatorSignature):
    validate_kind(kind, sig)
    cache: dict[OmegaWord, tuple] = {}

    def key(w: OmegaWord):
        k = cache.get(w)
        if k is None:
            k = raw(w)
            cache[w] = k
        return k

    # recursion into operator arguments goes through the cache, so keys of
    # shared subwords are built once
    if kind is OrderKind.DEGLEX:
        raw = _key_deglex(sig)[0]
    elif kind is OrderKind.O1:
        raw = _key_o1(sig, key)
    elif kind is OrderKind.O2:
        raw = _key_o2(sig, key)
    else:
        raw = _key_o3(sig, key)
    return key


def sort_key(kind: OrderKind, sig: OperatorSignature) -> Callable[[OmegaWord], tuple]:
    """Word -> tuple, such that tuples compare exactly as the order does."""
    return _key_builder(kind, sig)


def compare(kind: OrderKind, sig: OperatorSignature, u: OmegaWord, v: OmegaWord) -> Ordering:
    key = _key_builder(kind, sig)
    ku, kv = key(u), key(v)
    if ku < kv:
        return Ordering.LESS
    if ku > kv:
        return Ordering.GREATER
    if u != v:
        raise OrderError(f"order collision: distinct words compare equal: {u} / {v}")
    return Ordering.EQUAL


def leading_of_set(kind: OrderKind, sig: OperatorSignature, words) -> OmegaWord:
    words = list(words)
    if not words:
        raise OrderError("no words to take a maximum of")
    return max(words, key=_key_builder(kind, sig))


@dataclass
class OrderPropertyReport:
    kind: OrderKind
    max_weight: int
    words: int
    totality_checked: int = 0
    transitivity_checked: int = 0
    compatibility_checked: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        out = [
            f"order {self.kind.value}: {self.words} words up to weight {self.max_weight}",
            f"totality checks: {self.totality_checked}",
            f"transitivity checks: {self.transitivity_checked}",
            f"context compatibility checks: {self.compatibility_checked}",
        ]
        if self.violations:
            out.append(f"VIOLATIONS: {len(self.violations)}")
            out.extend("  " + v for v in self.violations[:20])
        else:
            out.append("no violations")
        return out


def check_monomial_property(
    kind: OrderKind,
    sig: OperatorSignature,
    max_weight: int,
    samples: int = 20,
    seed: int = 0,
) -> OrderPropertyReport:
    """Exhaustively test the order axioms on all words up to ``max_weight``:
    totality (with Equal exactly on structural equality), transitivity, and
    compatibility with substitution into randomly sampled contexts."""
    words = enumerate_words(sig, max_weight)
    report = OrderPropertyReport(kind=kind, max_weight=max_weight, words=len(words))
    results: dict[tuple[int, int], Ordering] = {}
    for i, u in enumerate(words):
        for j, v in enumerate(words):
            try:
                r = compare(kind, sig, u, v)
            except OrderError as e:
                report.violations.append(f"compare failed on ({u}, {v}): {e}")
                continue
            results[(i, j)] = r
            report.totality_checked += 1
            if (r is Ordering.EQUAL) != (u == v):
                report.violations.append(f"equality mismatch on ({u}, {v})")
            if (j, i) in results:
                mirror = results[(j, i)]
                if r.value != -mirror.value:
                    report.violations.append(f"antisymmetry broken on ({u}, {v})")
    n = len(words)
    for i in range(n):
        for j in range(n):
            rij = results.get((i, j))
            if rij is not Ordering.GREATER:
                continue
            for k in range(n):
                if results.get((j, k)) is Ordering.GREATER:
                    report.transitivity_checked += 1
                    if results.get((i, k)) is not Ordering.GREATER:
                        report.violations.append(
                            f"transitivity broken on ({words[i]}, {words[j]}, {words[k]})"
                        )
    contexts = enumerate_contexts(sig, max_weight)
    rng = random.Random(seed)
    for i, u in enumerate(words):
        for j in range(i + 1, n):
            v = words[j]
            r = results.get((i, j))
            if r is None or r is Ordering.EQUAL:
                continue
            big, small = (u, v) if r is Ordering.GREATER else (v, u)
            for c in rng.sample(contexts, min(samples, len(contexts))):
                report.compatibility_checked += 1
                if compare(kind, sig, substitute(c, big), substitute(c, small)) is not Ordering.GREATER:
                    report.violations.append(
                        f"context compatibility broken: {big} > {small} but not under {c.word}"
                    )
    return report
