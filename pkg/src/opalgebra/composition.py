"""Compositions of rules and bounded basis certification.

Two leading-word instances can interact two ways: their top-level factor
runs overlap (intersection, w = f.a = b.g with both outer parts nonempty),
or one occurs inside the other under a context (inclusion, w = f = v|_g).
Each interaction yields a composition polynomial whose leading word sits
strictly below the ambiguity w; the basis property holds at a bound when
every composition reduces to zero with all replaced words below w.

Checking is instance-based: metavariable assignments are enumerated from a
weight bound, and inclusion instances are additionally constructed by
planting one rule's leading word inside a bounded context in a slot of the
other rule, which reaches the context-parameterized ambiguity families that
finite assignment grids alone cannot.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Iterable, Optional, Sequence

from . import grammar, orders, poly as P, rewrite, terms
from .orders import OrderKind
from .poly import OmegaPolynomial
from .rewrite import Assignment, Reducer, ReductionTrace, RewriteSystem, RuleSchema
from .terms import (
    Hole,
    MetaVar,
    OmegaWord,
    OpApp,
    OperatorSignature,
    StarWord,
    STAR,
    struct_key,
    substitute,
    weight,
)


class CompositionError(ValueError):
    pass


class CompositionKind(str, Enum):
    INTERSECTION = "intersection"
    INCLUSION = "inclusion"


@dataclass(frozen=True)
class Composition:
    kind: CompositionKind
    w: OmegaWord
    f_rule: str
    f_assignment: Assignment
    g_rule: str
    g_assignment: Assignment
    # intersection: the outer parts (b, a) with w = b.g = f.a; inclusion: the context
    witness: tuple[OmegaWord, OmegaWord] | StarWord
    poly: OmegaPolynomial
    family: str = "?"


# ------------------------------------------------------- raw pair scanning

def _intersections_of(
    fw: OmegaWord, fp: OmegaPolynomial, gw: OmegaWord, gp: OmegaPolynomial
) -> list[tuple[OmegaWord, OmegaWord, OmegaWord, OmegaPolynomial]]:
    """Overlaps w = fw.a = b.gw with a, b nonempty; returns (w, b, a, poly)."""
    bf, bg = len(fw.factors), len(gw.factors)
    out = []
    for k in range(1, min(bf, bg)):
        if fw.factors[bf - k :] == gw.factors[:k]:
            a = OmegaWord(gw.factors[k:])
            b = OmegaWord(fw.factors[: bf - k])
            w = terms.concat(fw, a)
            poly = P.mul(fp, P.monomial(a)) - P.mul(P.monomial(b), gp)
            out.append((w, b, a, poly))
    return out


def find_intersections(
    f: OmegaPolynomial,
    g: OmegaPolynomial,
    kind: OrderKind,
    sig: OperatorSignature,
) -> list[Composition]:
    key = orders.sort_key(kind, sig)
    fw, fc = P.leading(f, kind, sig)
    gw, gc = P.leading(g, kind, sig)
    if fc != P.ONE or gc != P.ONE:
        raise CompositionError("inputs must be monic")
    out = []
    for w, b, a, poly in _intersections_of(fw, f, gw, g):
        c = Composition(
            CompositionKind.INTERSECTION, w, "f", (), "g", (), (b, a), poly, "int"
        )
        _check_below(c, key)
        out.append(c)
    return out


def _check_below(c: Composition, key) -> None:
    if c.kind is CompositionKind.INTERSECTION:
        b, a = c.witness
        if terms.concat(b, OmegaWord(c.w.factors[len(b.factors) :])) != c.w:
            raise CompositionError("intersection witness does not produce the ambiguity")
    if not c.poly.is_zero:
        wk = key(c.w)
        for u in c.poly.terms:
            if not key(u) < wk:
                raise CompositionError(
                    f"composition term {grammar.print_word(u)} not below ambiguity "
                    f"{grammar.print_word(c.w)}"
                )


def _inclusions_of(
    fw: OmegaWord,
    fp: OmegaPolynomial,
    gw: OmegaWord,
    gp: OmegaPolynomial,
    same_instance: bool,
) -> list[tuple[StarWord, OmegaPolynomial]]:
    out = []
    for v in terms.occurrences(fw, gw):
        if same_instance and v.word == STAR:
            continue
        poly = fp - P.subst_linear(v, gp)
        out.append((v, poly))
    return out


def find_inclusions(
    f: OmegaPolynomial,
    g: OmegaPolynomial,
    kind: OrderKind,
    sig: OperatorSignature,
) -> list[Composition]:
    key = orders.sort_key(kind, sig)
    fw, fc = P.leading(f, kind, sig)
    gw, gc = P.leading(g, kind, sig)
    if fc != P.ONE or gc != P.ONE:
        raise CompositionError("inputs must be monic")
    out = []
    for v, poly in _inclusions_of(fw, f, gw, g, same_instance=(f == g)):
        c = Composition(CompositionKind.INCLUSION, fw, "f", (), "g", (), v, poly, "?")
        _check_inclusion(c, gw, key)
        out.append(c)
    return out


def _check_inclusion(c: Composition, gw: OmegaWord, key) -> None:
    if substitute(c.witness, gw) != c.w:
        raise CompositionError("inclusion context does not produce the ambiguity")
    _check_below(c, key)


# --------------------------------------------------------------- triviality

def is_trivial(
    c: Composition,
    system: RewriteSystem,
    reducer: Optional[Reducer] = None,
    fuel: int = 10_000,
) -> tuple[bool, ReductionTrace]:
    """A composition certifies at its ambiguity when it reduces to zero and
    every replaced word stays below the ambiguity."""
    red = reducer if reducer is not None else Reducer(system)
    nf, trace = rewrite.normal_form(c.poly, system, fuel=fuel, reducer=red)
    wk = red.key(c.w)
    for step in trace.steps:
        if not red.key(step.replaced) < wk:
            raise CompositionError(
                f"replaced word {grammar.print_word(step.replaced)} not below "
                f"ambiguity {grammar.print_word(c.w)}"
            )
    return nf.is_zero, trace


# ----------------------------------------------------- instance enumeration

@dataclass(frozen=True)
class _Instance:
    rule: str
    assignment: Assignment
    word: OmegaWord
    poly: OmegaPolynomial


def _instances(system: RewriteSystem, max_weight: int) -> list[_Instance]:
    words = terms.enumerate_words(system.signature, max_weight)
    out: list[_Instance] = []
    for schema in system.schemas:
        mvs = schema.metavariables
        if not mvs:
            lhs, rhs = schema.instantiate({})
            out.append(_Instance(schema.name, (), lhs, P.monomial(lhs) - rhs))
            continue
        for combo in product(words, repeat=len(mvs)):
            binding = dict(zip(mvs, combo))
            lhs, rhs = schema.instantiate(binding)
            out.append(
                _Instance(schema.name, tuple(sorted(binding.items())), lhs, P.monomial(lhs) - rhs)
            )
    return out


def _classify_inclusion(
    schema: RuleSchema, binding: dict[str, OmegaWord], v: StarWord, inner_breadth: int
) -> str:
    """Name the region of the left pattern that contains the planted word:
    the whole word, inside one metavariable, or straddling regions."""
    if v.word == STAR:
        return "eq"

    def width(p) -> int:
        return len(binding[p.name].factors) if isinstance(p, MetaVar) else 1

    def walk(pf: tuple, cf: tuple) -> str:
        for i, c in enumerate(cf):
            if isinstance(c, Hole):
                lo, hi = i, i + inner_breadth
                pos = 0
                for p in pf:
                    wdt = width(p)
                    if lo >= pos and hi <= pos + wdt and isinstance(p, MetaVar):
                        return f"in:{p.name}"
                    pos += wdt
                return "span"
            if isinstance(c, OpApp) and any(terms.hole_count(a) for a in c.args):
                pos = 0
                for p in pf:
                    wdt = width(p)
                    if pos <= i < pos + wdt:
                        if isinstance(p, MetaVar):
                            return f"in:{p.name}"
                        for j, a in enumerate(c.args):
                            if terms.hole_count(a):
                                return walk(p.args[j].factors, a.factors)
                    pos += wdt
                return "span"
        raise CompositionError("context lost its hole")

    return walk(schema.lhs.factors, v.word.factors)


def _display_family(system: RewriteSystem, f_rule: str, g_rule: str, key: str) -> str:
    if system.family_merge:
        return f"{f_rule}∧{g_rule}"
    return system.family_names.get(key, key)


def enumerate_compositions(
    system: RewriteSystem, max_weight: int, max_context_weight: int
) -> list[Composition]:
    """Every composition among rule instances at the bounds: intersections
    and direct inclusions over the assignment grid, plus inclusions built by
    planting a leading word inside a bounded context in each pattern slot."""
    key = orders.sort_key(system.order, system.signature)
    insts = _instances(system, max_weight)
    seen: set = set()
    out: list[Composition] = []

    def emit(c: Composition, dedup_key) -> None:
        if dedup_key in seen:
            return
        seen.add(dedup_key)
        out.append(c)

    # intersections and direct inclusions over instance pairs
    for fi in insts:
        for gi in insts:
            for w, b, a, poly in _intersections_of(fi.word, fi.poly, gi.word, gi.poly):
                c = Composition(
                    CompositionKind.INTERSECTION,
                    w,
                    fi.rule,
                    fi.assignment,
                    gi.rule,
                    gi.assignment,
                    (b, a),
                    poly,
                    _display_family(system, fi.rule, gi.rule, "int"),
                )
                _check_below(c, key)
                emit(c, (fi.rule, fi.assignment, gi.rule, gi.assignment, "int", b, a))
            if terms.weight(gi.word) > terms.weight(fi.word):
                continue
            same = fi.rule == gi.rule and fi.assignment == gi.assignment
            for v, poly in _inclusions_of(fi.word, fi.poly, gi.word, gi.poly, same):
                fam = _classify_inclusion(
                    system.schema(fi.rule),
                    dict(fi.assignment),
                    v,
                    len(gi.word.factors),
                )
                c = Composition(
                    CompositionKind.INCLUSION,
                    fi.word,
                    fi.rule,
                    fi.assignment,
                    gi.rule,
                    gi.assignment,
                    v,
                    poly,
                    _display_family(system, fi.rule, gi.rule, fam),
                )
                _check_inclusion(c, gi.word, key)
                emit(c, (fi.rule, fi.assignment, gi.rule, gi.assignment, v))

    # constructed inclusions: plant g's leading word, under a context, into
    # one metavariable slot of f's pattern
    words = terms.enumerate_words(system.signature, max_weight)
    contexts = terms.enumerate_contexts(system.signature, max_context_weight)
    for schema in system.schemas:
        for slot in schema.metavariables:
            rest = [m for m in schema.metavariables if m != slot]
            for gi in insts:
                for u in contexts:
                    planted = substitute(u, gi.word)
                    for combo in product(words, repeat=len(rest)):
                        binding = dict(zip(rest, combo))
                        binding[slot] = planted
                        lhs, rhs = schema.instantiate(binding)
                        hole_binding = dict(binding)
                        hole_binding[slot] = u.word
                        v = StarWord(rewrite._subst_metavars(schema.lhs, hole_binding))
                        asg = tuple(sorted(binding.items()))
                        dedup = (schema.name, asg, gi.rule, gi.assignment, v)
                        if dedup in seen:
                            continue
                        f_poly = P.monomial(lhs) - rhs
                        poly = f_poly - P.subst_linear(v, gi.poly)
                        fam = _classify_inclusion(
                            schema, binding, v, len(gi.word.factors)
                        )
                        c = Composition(
                            CompositionKind.INCLUSION,
                            lhs,
                            schema.name,
                            asg,
                            gi.rule,
                            gi.assignment,
                            v,
                            poly,
                            _display_family(system, schema.name, gi.rule, fam),
                        )
                        _check_inclusion(c, gi.word, key)
                        emit(c, dedup)

    out.sort(key=_composition_sort_key)
    return out


def _assignment_struct(asg: Assignment):
    return tuple((n, struct_key(w)) for n, w in asg)


def _composition_sort_key(c: Composition):
    wit = (
        (0, struct_key(c.witness[0]), struct_key(c.witness[1]))
        if c.kind is CompositionKind.INTERSECTION
        else (1, struct_key(c.witness.word), ())
    )
    return (
        weight(c.w),
        struct_key(c.w),
        c.f_rule,
        _assignment_struct(c.f_assignment),
        c.g_rule,
        _assignment_struct(c.g_assignment),
        wit,
    )


# ------------------------------------------------------------------ report

@dataclass
class FamilyTally:
    compositions: int = 0
    trivial: int = 0
    failures: list[tuple[Composition, OmegaPolynomial]] = field(default_factory=list)


@dataclass
class GsbReport:
    system_label: str
    order: OrderKind
    signature: OperatorSignature
    max_weight: int
    max_context_weight: int
    instance_count: int
    families: dict[str, FamilyTally]

    @property
    def letters(self) -> tuple[str, ...]:
        return self.signature.letters

    @property
    def total_compositions(self) -> int:
        return sum(t.compositions for t in self.families.values())

    @property
    def failure_count(self) -> int:
        return sum(len(t.failures) for t in self.families.values())

    @property
    def is_basis_at_bound(self) -> bool:
        return self.failure_count == 0

    def to_text(self) -> list[str]:
        lines = [
            "# opalgebra-report v1 kind=gsb"
            f" system={self.system_label} order={self.order.value}"
            f" letters={','.join(self.letters)}"
            f" max_weight={self.max_weight} max_context={self.max_context_weight}",
            f"# verified up to metavariable weight {self.max_weight} and context"
            f" weight {self.max_context_weight}; larger instances are not examined",
            f"instances: {self.instance_count}",
        ]
        for name in sorted(self.families):
            t = self.families[name]
            lines.append(
                f"family {name}: compositions={t.compositions}"
                f" trivial={t.trivial} failures={len(t.failures)}"
            )
        for name in sorted(self.families):
            for c, nf in self.families[name].failures:
                lines.append(
                    f"failure {name} at {grammar.print_word(c.w)}:"
                    f" normal form {_poly_text(nf, self)}"
                )
        verdict = "yes" if self.is_basis_at_bound else "no"
        lines.append(f"basis at this bound: {verdict}")
        return lines

    def to_records(self) -> list[str]:
        recs = [
            "# opalgebra-report v1 kind=gsb-records"
            f" system={self.system_label} order={self.order.value}"
            f" letters={','.join(self.letters)}"
            f" max_weight={self.max_weight} max_context={self.max_context_weight}"
        ]
        for name in sorted(self.families):
            t = self.families[name]
            recs.append(
                f"family\t{name}\t{t.compositions}\t{t.trivial}\t{len(t.failures)}"
            )
            for c, nf in t.failures:
                recs.append(
                    f"failure\t{name}\t{grammar.print_word(c.w)}\t{_poly_text(nf, self)}"
                )
        recs.append(f"verdict\t{'ok' if self.is_basis_at_bound else 'failed'}")
        return recs


def _poly_text(f: OmegaPolynomial, report: GsbReport) -> str:
    return grammar.print_poly(f, report.order, report.signature)


def _jobs() -> int:
    raw = os.environ.get("OPALG_JOBS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


_POOL_SYSTEM: RewriteSystem | None = None
_POOL_COMPS: list[Composition] | None = None


def _pool_init(system: RewriteSystem, comps: list[Composition]) -> None:
    global _POOL_SYSTEM, _POOL_COMPS
    _POOL_SYSTEM = system
    _POOL_COMPS = comps


def _pool_check(span: tuple[int, int, int]) -> list[tuple[int, bool, Optional[OmegaPolynomial]]]:
    lo, hi, fuel = span
    red = Reducer(_POOL_SYSTEM)
    out = []
    for i in range(lo, hi):
        c = _POOL_COMPS[i]
        ok, _ = is_trivial(c, _POOL_SYSTEM, red, fuel)
        nf = None
        if not ok:
            nf, _ = rewrite.normal_form(c.poly, _POOL_SYSTEM, fuel=fuel, reducer=red)
        out.append((i, ok, nf))
    return out


def check_gsb(
    system: RewriteSystem,
    max_weight: int,
    max_context_weight: int,
    label: str = "custom",
    fuel: int = 10_000,
) -> GsbReport:
    comps = enumerate_compositions(system, max_weight, max_context_weight)
    results: list[tuple[bool, Optional[OmegaPolynomial]]] = [None] * len(comps)  # type: ignore
    jobs = _jobs()
    if jobs > 1 and len(comps) > 400:
        spans = []
        chunk = max(50, len(comps) // (jobs * 8))
        lo = 0
        while lo < len(comps):
            spans.append((lo, min(lo + chunk, len(comps)), fuel))
            lo += chunk
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_pool_init, initargs=(system, comps)
        ) as pool:
            for batch in pool.map(_pool_check, spans):
                for i, ok, nf in batch:
                    results[i] = (ok, nf)
    else:
        red = Reducer(system)
        for i, c in enumerate(comps):
            ok, _ = is_trivial(c, system, red, fuel)
            nf = None
            if not ok:
                nf, _ = rewrite.normal_form(c.poly, system, fuel=fuel, reducer=red)
            results[i] = (ok, nf)

    families: dict[str, FamilyTally] = {}
    for c, (ok, nf) in zip(comps, results):
        t = families.setdefault(c.family, FamilyTally())
        t.compositions += 1
        if ok:
            t.trivial += 1
        else:
            t.failures.append((c, nf))
    return GsbReport(
        label,
        system.order,
        system.signature,
        max_weight,
        max_context_weight,
        len(_instances(system, max_weight)),
        families,
    )


# -------------------------------------------------------------- completion

def complete(
    rules: Sequence[OmegaPolynomial],
    kind: OrderKind,
    sig: OperatorSignature,
    max_weight: int,
    max_rounds: int,
    fuel: int = 10_000,
) -> tuple[list[OmegaPolynomial], list[str]]:
    """Bounded closure of a concrete rule set: adjoin normal forms of
    non-trivial compositions whose ambiguity weight fits the bound, then
    inter-reduce, until a round adds nothing or the round limit is hit."""
    log: list[str] = []
    current = _interreduce([_monic(r, kind, sig) for r in rules if not r.is_zero], kind, sig, fuel)
    for round_no in range(1, max_rounds + 1):
        system = _as_system(current, kind, sig)
        red = Reducer(system)
        adjoined: list[OmegaPolynomial] = []
        pairs = [(f, g) for f in current for g in current]
        for f, g in pairs:
            fw, _ = P.leading(f, kind, sig)
            gw, _ = P.leading(g, kind, sig)
            cands: list[OmegaPolynomial] = []
            for w, b, a, poly in _intersections_of(fw, f, gw, g):
                if weight(w) <= max_weight:
                    cands.append(poly)
            for v, poly in _inclusions_of(fw, f, gw, g, same_instance=(f == g)):
                cands.append(poly)
            for poly in cands:
                nf, _ = rewrite.normal_form(poly, system, fuel=fuel, reducer=red)
                if not nf.is_zero:
                    nf = P.make_monic(nf, kind, sig)
                    if nf not in current and nf not in adjoined:
                        adjoined.append(nf)
                        log.append(
                            f"round {round_no}: adjoined {grammar.print_poly(nf, kind, sig)}"
                        )
        if not adjoined:
            log.append(f"round {round_no}: fixpoint")
            return current, log
        current = _interreduce(current + adjoined, kind, sig, fuel)
    log.append(f"stopped after {max_rounds} rounds without reaching a fixpoint")
    return current, log


def _monic(f: OmegaPolynomial, kind: OrderKind, sig: OperatorSignature) -> OmegaPolynomial:
    return P.make_monic(f, kind, sig)


def _as_system(
    rules: Sequence[OmegaPolynomial], kind: OrderKind, sig: OperatorSignature
) -> RewriteSystem:
    schemas = tuple(
        rewrite.schema_from_polynomial(f"r{i + 1}", f, kind, sig) for i, f in enumerate(rules)
    )
    return RewriteSystem(sig, kind, schemas)


def _interreduce(
    rules: list[OmegaPolynomial], kind: OrderKind, sig: OperatorSignature, fuel: int
) -> list[OmegaPolynomial]:
    key = orders.sort_key(kind, sig)
    deduped: list[OmegaPolynomial] = []
    for r in rules:
        if not r.is_zero and r not in deduped:
            deduped.append(r)
    rules = sorted(deduped, key=lambda f: key(P.leading(f, kind, sig)[0]))
    changed = True
    while changed:
        changed = False
        for i, f in enumerate(list(rules)):
            others = rules[:i] + rules[i + 1 :]
            if not others:
                continue
            system = _as_system(others, kind, sig)
            nf, _ = rewrite.normal_form(f, system, fuel=fuel)
            if nf != f:
                changed = True
                rules = others
                if not nf.is_zero:
                    rules = rules + [P.make_monic(nf, kind, sig)]
                rules = sorted(rules, key=lambda g: key(P.leading(g, kind, sig)[0]))
                break
    return rules
