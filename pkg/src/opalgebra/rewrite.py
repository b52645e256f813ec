"""Rewriting with operator-compatible rules and traced normal forms.

A rule schema has a pattern word on the left whose metavariables each stand
for an arbitrary nonempty word, and a pattern polynomial on the right over
the same metavariables.  An instance is obtained by substituting concrete
words for the metavariables; every word of the instantiated right side must
be strictly smaller than the instantiated left word in the system's order,
and this is asserted every time a rule fires.

Normal forms always rewrite the largest reducible word of the current
polynomial, so the sequence of replaced words is strictly descending; the
trace records one step per replacement.  Within the chosen word the redex is
located by strategy: leftmost-outermost scans factor positions left to
right, trying the rules at each position before descending into argument
words; rightmost-innermost scans right to left and descends first.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterator, Optional

from . import grammar, orders, poly as P, terms
from .orders import OrderError, OrderKind
from .poly import Coefficient, OmegaPolynomial
from .terms import (
    Hole,
    Letter,
    MetaVar,
    OmegaWord,
    OpApp,
    OperatorSignature,
    StarWord,
)


class RewriteError(ValueError):
    pass


class FuelExhausted(RewriteError):
    def __init__(self, message: str, trace: "ReductionTrace", partial: OmegaPolynomial):
        super().__init__(message)
        self.trace = trace
        self.partial = partial


Strategy = str
LEFTMOST_OUTERMOST: Strategy = "leftmost-outermost"
RIGHTMOST_INNERMOST: Strategy = "rightmost-innermost"
STRATEGIES = (LEFTMOST_OUTERMOST, RIGHTMOST_INNERMOST)

Assignment = tuple[tuple[str, OmegaWord], ...]


def _freeze(binding: dict[str, OmegaWord]) -> Assignment:
    return tuple(sorted(binding.items()))


# ---------------------------------------------------------------- matching

def match_seq(
    pats: tuple, subs: tuple, binding: dict[str, OmegaWord]
) -> Iterator[dict[str, OmegaWord]]:
    """All ways to match the full factor sequence, metavariables binding
    nonempty runs, shortest run first."""
    if not pats:
        if not subs:
            yield binding
        return
    if len(subs) < len(pats):
        return
    p = pats[0]
    if isinstance(p, MetaVar):
        bound = binding.get(p.name)
        if bound is not None:
            k = len(bound.factors)
            if subs[:k] == bound.factors:
                yield from match_seq(pats[1:], subs[k:], binding)
            return
        limit = len(subs) - (len(pats) - 1)
        for k in range(1, limit + 1):
            b2 = dict(binding)
            b2[p.name] = OmegaWord(subs[:k])
            yield from match_seq(pats[1:], subs[k:], b2)
        return
    s = subs[0]
    if isinstance(p, Letter):
        if s == p:
            yield from match_seq(pats[1:], subs[1:], binding)
        return
    if isinstance(p, OpApp):
        if not isinstance(s, OpApp) or s.op != p.op or len(s.args) != len(p.args):
            return

        def args_match(i: int, b: dict[str, OmegaWord]) -> Iterator[dict[str, OmegaWord]]:
            if i == len(p.args):
                yield b
                return
            for b2 in match_seq(p.args[i].factors, s.args[i].factors, b):
                yield from args_match(i + 1, b2)

        for b3 in args_match(0, binding):
            yield from match_seq(pats[1:], subs[1:], b3)
        return
    raise RewriteError(f"pattern contains a non-matchable prime {p!r}")


def match_word(pattern: OmegaWord, subject: OmegaWord) -> Iterator[dict[str, OmegaWord]]:
    yield from match_seq(pattern.factors, subject.factors, {})


def match_prefix(
    pattern: OmegaWord, subs: tuple
) -> Iterator[tuple[dict[str, OmegaWord], int]]:
    """Matches of the pattern against a prefix of the factor run; yields the
    binding and the number of factors consumed, shortest prefix first."""
    for k in range(len(pattern.factors), len(subs) + 1):
        for b in match_seq(pattern.factors, subs[:k], {}):
            yield b, k


# ------------------------------------------------------------ rule schemas

def _pattern_metavars(w: OmegaWord) -> set[str]:
    out: set[str] = set()
    for p in w.factors:
        if isinstance(p, MetaVar):
            out.add(p.name)
        elif isinstance(p, OpApp):
            for a in p.args:
                out |= _pattern_metavars(a)
    return out


def _subst_metavars(w: OmegaWord, binding: dict[str, OmegaWord]) -> OmegaWord:
    out: list = []
    for p in w.factors:
        if isinstance(p, MetaVar):
            out.extend(binding[p.name].factors)
        elif isinstance(p, OpApp):
            out.append(OpApp(p.op, tuple(_subst_metavars(a, binding) for a in p.args)))
        else:
            out.append(p)
    return OmegaWord(tuple(out))


@dataclass(frozen=True)
class RuleSchema:
    """Oriented rule lhs -> rhs over declared metavariables."""

    name: str
    metavariables: tuple[str, ...]
    lhs: OmegaWord
    rhs: tuple[tuple[Coefficient, OmegaWord], ...]

    def __post_init__(self) -> None:
        declared = set(self.metavariables)
        if len(declared) != len(self.metavariables):
            raise RewriteError(f"rule {self.name}: duplicate metavariable")
        left = _pattern_metavars(self.lhs)
        if left != declared:
            raise RewriteError(
                f"rule {self.name}: left side uses {sorted(left)}, declared {sorted(declared)}"
            )
        for _, w in self.rhs:
            extra = _pattern_metavars(w) - declared
            if extra:
                raise RewriteError(f"rule {self.name}: undeclared metavariables {sorted(extra)}")

    def instantiate(self, binding: dict[str, OmegaWord]) -> tuple[OmegaWord, OmegaPolynomial]:
        missing = set(self.metavariables) - set(binding)
        if missing:
            raise RewriteError(f"rule {self.name}: unbound metavariables {sorted(missing)}")
        lhs = _subst_metavars(self.lhs, binding)
        rhs = P.from_terms((c, _subst_metavars(w, binding)) for c, w in self.rhs)
        return lhs, rhs

    def as_polynomial(self, binding: dict[str, OmegaWord]) -> OmegaPolynomial:
        lhs, rhs = self.instantiate(binding)
        return P.monomial(lhs) - rhs


def schema_from_polynomial(
    name: str, f: OmegaPolynomial, kind: OrderKind, sig: OperatorSignature
) -> RuleSchema:
    """Turn a concrete polynomial into the rule lw(f) -> lw(f) - f, made
    monic first."""
    if f.is_zero:
        raise RewriteError("cannot orient the zero polynomial")
    g = P.make_monic(f, kind, sig)
    w, _ = P.leading(g, kind, sig)
    rest = P.monomial(w) - g
    return RuleSchema(name, (), w, tuple((c, u) for u, c in rest.terms.items()))


@dataclass(eq=False)
class RewriteSystem:
    """An ordered list of rule schemas over one signature and order."""

    signature: OperatorSignature
    order: OrderKind
    schemas: tuple[RuleSchema, ...]
    family_names: dict[str, str] = field(default_factory=dict)
    family_merge: bool = False

    def __post_init__(self) -> None:
        orders.validate_kind(self.order, self.signature)
        seen = set()
        for s in self.schemas:
            if s.name in seen:
                raise RewriteError(f"duplicate rule name {s.name!r}")
            seen.add(s.name)

    def schema(self, name: str) -> RuleSchema:
        for s in self.schemas:
            if s.name == name:
                return s
        raise RewriteError(f"no rule named {name!r}")


# ------------------------------------------------------------------ redexes

@dataclass(frozen=True)
class Redex:
    context: StarWord
    instance: OmegaWord
    rule: str
    assignment: Assignment


@dataclass(frozen=True)
class TraceStep:
    replaced: OmegaWord
    rule: str
    assignment: Assignment
    context: StarWord


@dataclass(frozen=True)
class ReductionTrace:
    steps: tuple[TraceStep, ...]

    def lines(self) -> list[str]:
        out = []
        for s in self.steps:
            asg = ",".join(f"{n}:={grammar.print_word(w)}" for n, w in s.assignment)
            label = f"{s.rule}@{asg}" if asg else s.rule
            out.append(f"{grammar.print_word(s.replaced)} --[{label}]-->")
        return out

    def rule_sequence(self) -> list[str]:
        return [s.rule for s in self.steps]

    def replaced_words(self) -> list[OmegaWord]:
        return [s.replaced for s in self.steps]


class Reducer:
    """Caches redex scans and instantiated rules for one system."""

    def __init__(self, system: RewriteSystem):
        self.system = system
        self.key = orders.sort_key(system.order, system.signature)
        self._scan_cache: dict[tuple[OmegaWord, Strategy], Optional[Redex]] = {}
        self._rhs_cache: dict[tuple[str, Assignment], OmegaPolynomial] = {}
        # root discriminator: what the first factor of each pattern demands
        self._rules: list[tuple[RuleSchema, Optional[tuple[int, str]]]] = []
        for schema in system.schemas:
            first = schema.lhs.factors[0]
            if isinstance(first, OpApp):
                disc = (1, first.op)
            elif isinstance(first, Letter):
                disc = (0, first.symbol)
            else:
                disc = None
            self._rules.append((schema, disc))

    # redex location

    def find_redex(self, w: OmegaWord, strategy: Strategy = LEFTMOST_OUTERMOST) -> Optional[Redex]:
        if strategy not in STRATEGIES:
            raise RewriteError(f"unknown strategy {strategy!r}")
        hit = self._scan_cache.get((w, strategy))
        if hit is not None or (w, strategy) in self._scan_cache:
            return hit
        found = (
            self._scan_lo(w.factors) if strategy == LEFTMOST_OUTERMOST else self._scan_ri(w.factors)
        )
        self._scan_cache[(w, strategy)] = found
        return found

    def _try_rules_at(self, subs: tuple, i: int) -> Optional[tuple[Redex, int]]:
        head = subs[i]
        for schema, disc in self._rules:
            if disc is not None:
                tag, name = disc
                if tag == 1:
                    if not isinstance(head, OpApp) or head.op != name:
                        continue
                elif not isinstance(head, Letter) or head.symbol != name:
                    continue
            for binding, k in match_prefix(schema.lhs, subs[i:]):
                instance = OmegaWord(subs[i : i + k])
                ctx = StarWord(OmegaWord(subs[:i] + (Hole(0),) + subs[i + k :]))
                return Redex(ctx, instance, schema.name, _freeze(binding)), k
        return None

    @staticmethod
    def _lift(subs: tuple, i: int, arg_index: int, inner: Redex) -> Redex:
        opapp = subs[i]
        new_args = list(opapp.args)
        new_args[arg_index] = inner.context.word
        lifted = subs[:i] + (OpApp(opapp.op, tuple(new_args)),) + subs[i + 1 :]
        return Redex(StarWord(OmegaWord(lifted)), inner.instance, inner.rule, inner.assignment)

    def _scan_lo(self, subs: tuple) -> Optional[Redex]:
        for i in range(len(subs)):
            hit = self._try_rules_at(subs, i)
            if hit:
                return hit[0]
            p = subs[i]
            if isinstance(p, OpApp):
                for j, a in enumerate(p.args):
                    inner = self.find_redex(a, LEFTMOST_OUTERMOST)
                    if inner:
                        return self._lift(subs, i, j, inner)
        return None

    def _scan_ri(self, subs: tuple) -> Optional[Redex]:
        for i in range(len(subs) - 1, -1, -1):
            p = subs[i]
            if isinstance(p, OpApp):
                for j in range(len(p.args) - 1, -1, -1):
                    inner = self.find_redex(p.args[j], RIGHTMOST_INNERMOST)
                    if inner:
                        return self._lift(subs, i, j, inner)
            hit = self._try_rules_at(subs, i)
            if hit:
                return hit[0]
        return None

    # rule application

    def replacement(self, rule: str, assignment: Assignment) -> OmegaPolynomial:
        cached = self._rhs_cache.get((rule, assignment))
        if cached is not None:
            return cached
        schema = self.system.schema(rule)
        lhs, rhs = schema.instantiate(dict(assignment))
        bound = self.key(lhs)
        for u in rhs.terms:
            if not self.key(u) < bound:
                raise OrderError(
                    f"rule {rule} is not compatible with the order at this instance: "
                    f"{grammar.print_word(u)} is not below {grammar.print_word(lhs)}"
                )
        self._rhs_cache[(rule, assignment)] = rhs
        return rhs

    def is_irreducible(self, w: OmegaWord) -> bool:
        return self.find_redex(w) is None


def reduce_once(
    f: OmegaPolynomial, reducer: Reducer, strategy: Strategy = LEFTMOST_OUTERMOST
) -> Optional[tuple[OmegaPolynomial, TraceStep]]:
    """One step on the largest reducible word, or None when f is in normal
    form."""
    best: Optional[OmegaWord] = None
    best_redex: Optional[Redex] = None
    for w in sorted(f.terms, key=reducer.key, reverse=True):
        r = reducer.find_redex(w, strategy)
        if r is not None:
            best, best_redex = w, r
            break
    if best is None or best_redex is None:
        return None
    rhs = reducer.replacement(best_redex.rule, best_redex.assignment)
    out = P.replace_term(f, best, P.subst_linear(best_redex.context, rhs))
    step = TraceStep(best, best_redex.rule, best_redex.assignment, best_redex.context)
    return out, step


class _Rev:
    """Inverts comparison so tuple keys can drive a max-first heap."""

    __slots__ = ("k",)

    def __init__(self, k):
        self.k = k

    def __lt__(self, other: "_Rev") -> bool:
        return other.k < self.k


def normal_form(
    f: OmegaPolynomial,
    system: RewriteSystem,
    fuel: int = 10_000,
    strategy: Strategy = LEFTMOST_OUTERMOST,
    reducer: Optional[Reducer] = None,
) -> tuple[OmegaPolynomial, ReductionTrace]:
    red = reducer if reducer is not None else Reducer(system)
    key = red.key
    steps: list[TraceStep] = []
    prev_key = None
    cur = f
    # max-first heap of candidate words; stale entries (cancelled words) are
    # skipped on pop, and a word found irreducible never returns
    heap: list[tuple[_Rev, int, OmegaWord]] = []
    seq = 0
    for w in cur.terms:
        heap.append((_Rev(key(w)), seq, w))
        seq += 1
    heapq.heapify(heap)
    spent = 0
    while heap:
        rk, _, w = heapq.heappop(heap)
        if w not in cur.terms:
            continue
        redex = red.find_redex(w, strategy)
        if redex is None:
            continue
        if spent >= fuel:
            raise FuelExhausted(
                f"no normal form within {fuel} steps", ReductionTrace(tuple(steps)), cur
            )
        spent += 1
        if prev_key is not None and not rk.k < prev_key:
            raise RewriteError("replaced words failed to descend strictly")
        prev_key = rk.k
        rhs = red.replacement(redex.rule, redex.assignment)
        filled = P.subst_linear(redex.context, rhs)
        cur = P.replace_term(cur, w, filled)
        for u in filled.terms:
            heapq.heappush(heap, (_Rev(key(u)), seq, u))
            seq += 1
        steps.append(TraceStep(w, redex.rule, redex.assignment, redex.context))
    return cur, ReductionTrace(tuple(steps))


def is_irreducible(w: OmegaWord, system: RewriteSystem, reducer: Optional[Reducer] = None) -> bool:
    red = reducer if reducer is not None else Reducer(system)
    return red.is_irreducible(w)


def irreducible_words(
    system: RewriteSystem, max_weight: int, reducer: Optional[Reducer] = None
) -> tuple[OmegaWord, ...]:
    """All irreducible words of weight at most max_weight, ascending in the
    system's order."""
    red = reducer if reducer is not None else Reducer(system)
    words = [w for w in terms.enumerate_words(system.signature, max_weight) if red.is_irreducible(w)]
    words.sort(key=red.key)
    return tuple(words)
