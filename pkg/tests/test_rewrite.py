"""Pattern matching, single steps, normal forms, strategies, confluence."""
from __future__ import annotations

import random

import pytest

from opalgebra import grammar, poly as P, rewrite, systems
from opalgebra.rewrite import (
    LEFTMOST_OUTERMOST,
    RIGHTMOST_INNERMOST,
    FuelExhausted,
    Reducer,
    RewriteError,
    irreducible_words,
    match_prefix,
    match_word,
    normal_form,
    reduce_once,
)
from opalgebra.terms import substitute

RB = systems.rb_system(("a", "b", "c"))
DIFF = systems.diff_system(("a", "b"))
DRB = systems.drb_system(("a", "b"))


def w(src, system=RB):
    return grammar.parse_word(system.signature, src)


def p(src, system=RB):
    return grammar.parse_poly(system.signature, src)


def test_match_word_binds_metavariables():
    schema = RB.schemas[0]
    bindings = list(match_word(schema.lhs, w("P(a)P(bb)")))
    assert len(bindings) == 1
    assert grammar.print_word(bindings[0]["x"]) == "a"
    assert grammar.print_word(bindings[0]["y"]) == "bb"


def test_match_word_fails_off_pattern():
    schema = RB.schemas[0]
    assert list(match_word(schema.lhs, w("P(a)b"))) == []
    assert list(match_word(schema.lhs, w("P(a)P(b)P(c)"))) == []


def test_match_prefix_allows_a_tail():
    schema = RB.schemas[0]
    results = list(match_prefix(schema.lhs, w("P(a)P(b)c").factors))
    assert len(results) == 1
    binding, consumed = results[0]
    assert consumed == 2
    assert grammar.print_word(binding["y"]) == "b"


def test_metavariable_matches_are_nonempty_segments():
    schema = DIFF.schemas[0]
    # D(ab) splits one way per cut point: x=a,y=b only
    bindings = list(match_word(schema.lhs, w("D(ab)", DIFF)))
    assert len(bindings) == 1
    three = list(match_word(schema.lhs, w("D(aba)", DIFF)))
    assert len(three) == 2


def test_find_redex_strategies_pick_different_ends():
    reducer = Reducer(RB)
    subject = w("P(a)P(b)P(c)")
    lo = reducer.find_redex(subject, LEFTMOST_OUTERMOST)
    ri = reducer.find_redex(subject, RIGHTMOST_INNERMOST)
    assert lo is not None and ri is not None
    assert grammar.print_word(substitute(lo.context, w("z" if False else "a"))) != grammar.print_word(
        substitute(ri.context, w("a"))
    )


def test_reduce_once_rewrites_the_largest_word():
    f = p("P(a)P(b) + P(ab)")
    out, step = reduce_once(f, Reducer(RB))
    assert step.rule == "rb"
    assert w("P(a)P(b)") not in out.terms
    # the small irreducible word is untouched, the lam-term merges onto it
    assert out.terms[w("P(ab)")] == P.ONE + P.LAM


def test_trace_line_format():
    f = p("P(a)P(b)")
    result, trace = normal_form(f, RB)
    assert trace.lines() == ["P(a)P(b) --[rb@x:=a,y:=b]-->"]
    assert result == p("P(P(a)b) + P(aP(b)) + lam*P(ab)")


def test_normal_form_of_irreducible_is_identity():
    f = p("P(ab) + a")
    result, trace = normal_form(f, RB)
    assert result == f
    assert trace.steps == ()


def test_fuel_exhaustion_raises():
    f = p("P(a)P(b)P(c)")
    with pytest.raises(FuelExhausted):
        normal_form(f, RB, fuel=2)
    result, trace = normal_form(f, RB, fuel=50)
    assert len(trace.steps) <= 50 and not result.is_zero


def test_derivation_chain_terminates_with_section_rule():
    f = p("D(P(a))", DRB)
    result, _ = normal_form(f, DRB)
    assert result == p("a", DRB)
    nested, _ = normal_form(p("D(P(P(a)P(b)))", DRB), DRB)
    direct, _ = normal_form(p("P(a)P(b)", DRB), DRB)
    assert nested == direct


def test_normal_forms_agree_across_strategies():
    subject = p("P(a)P(b)P(c)")
    lo, _ = normal_form(subject, RB, strategy=LEFTMOST_OUTERMOST)
    ri, _ = normal_form(subject, RB, strategy=RIGHTMOST_INNERMOST)
    assert lo == ri


def test_triple_product_expansion_word_count():
    # independent check: random redex choices must land on one polynomial
    subject = p("P(a)P(b)P(c)")
    reference, _ = normal_form(subject, RB)
    reducer = Reducer(RB)
    rng = random.Random(7)
    for _ in range(20):
        cur = subject
        for _step in range(10_000):
            redexes = []
            for u in cur.terms:
                for strategy in (LEFTMOST_OUTERMOST, RIGHTMOST_INNERMOST):
                    r = reducer.find_redex(u, strategy)
                    if r is not None:
                        redexes.append((u, r))
            if not redexes:
                break
            u, r = rng.choice(redexes)
            schema = RB.schema(r.rule)
            _, rhs = schema.instantiate(dict(r.assignment))
            cur = P.replace_term(cur, u, P.subst_linear(r.context, rhs))
        assert cur == reference
    assert len(reference.terms) == 11


def test_irreducible_words_match_alternation_basis():
    got = irreducible_words(RB, 3)
    expected = systems.phi_words(("a", "b", "c"), 3)
    assert set(got) == set(expected)


def test_rule_schema_validation():
    schema = RB.schemas[0]
    with pytest.raises(RewriteError):
        rewrite.RuleSchema("bad", ("x",), schema.lhs, schema.rhs)
    with pytest.raises(RewriteError):
        schema.instantiate({"x": w("a")})


def test_schema_from_polynomial_orients_and_normalizes():
    f = p("lam*P(a)P(a) + lam*P(aa)")
    schema = rewrite.schema_from_polynomial("r1", f, RB.order, RB.signature)
    assert grammar.print_word(schema.lhs) == "P(a)P(a)"
    ((coeff, word),) = schema.rhs
    assert coeff == -P.ONE
    assert grammar.print_word(word) == "P(aa)"
