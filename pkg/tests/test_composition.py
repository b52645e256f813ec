"""Composition enumeration, triviality checking, reports, and completion."""

import random

import pytest

from opalgebra import composition, grammar, orders, rewrite, terms
from opalgebra import poly as P
from opalgebra.composition import CompositionError, CompositionKind
from opalgebra.orders import OrderKind
from opalgebra.systems import rb_system
from opalgebra.systems import drb_system
from opalgebra.terms import OperatorSignature


RB_X = rb_system(("x",))


def test_rb_smallest_bound_has_one_composition_per_family():
    comps = composition.enumerate_compositions(RB_X, 1, 1)
    assert sorted(c.family for c in comps) == ["(i)", "(ii)", "(iii)"]
    for c in comps:
        ok, _ = composition.is_trivial(c, RB_X)
        assert ok


def test_rb_bound_two_census():
    report = composition.check_gsb(RB_X, 2, 2, label="rb")
    tallies = {k: (t.compositions, t.trivial) for k, t in report.families.items()}
    assert tallies == {"(i)": (27, 27), "(ii)": (108, 108), "(iii)": (108, 108)}
    assert report.failure_count == 0
    assert report.is_basis_at_bound
    text = report.to_text()
    assert text[0] == (
        "# opalgebra-report v1 kind=gsb system=rb order=o1 letters=x"
        " max_weight=2 max_context=2"
    )
    assert "family (i): compositions=27 trivial=27 failures=0" in text
    assert text[-1] == "basis at this bound: yes"


def test_deleted_middle_term_is_not_a_basis():
    broken = rb_system(("x",), drop="middle")
    report = composition.check_gsb(broken, 1, 1, label="rb-drop-middle")
    assert len(report.families["(i)"].failures) == 1
    assert not report.is_basis_at_bound
    text = report.to_text()
    assert text[-1] == "basis at this bound: no"
    assert any(line.startswith("failure (i) at ") for line in text)


def test_concrete_overlap_failure_report():
    # a single rule with no metavariables cannot resolve its self-overlap
    sig = OperatorSignature(letters=("a",), operators=(("P", 1),))
    f = grammar.parse_poly(sig, "P(a)P(a) - P(P(a)a) - lam*P(aa)")
    comps = composition.find_intersections(f, f, OrderKind.O1, sig)
    assert len(comps) == 1
    assert comps[0].kind is CompositionKind.INTERSECTION
    assert grammar.print_word(comps[0].w) == "P(a)P(a)P(a)"

    schema = rewrite.schema_from_polynomial("r1", f, OrderKind.O1, sig)
    system = rewrite.RewriteSystem(sig, OrderKind.O1, (schema,))
    ok, _ = composition.is_trivial(comps[0], system)
    assert not ok

    report = composition.check_gsb(system, 0, 0, label="one-rule")
    text = report.to_text()
    assert (
        "failure int at P(a)P(a)P(a): normal form -P(P(a)a)P(a) - lam*P(aa)P(a)"
        " + P(a)P(P(a)a) + lam*P(a)P(aa)" in text
    )
    assert text[-1] == "basis at this bound: no"


def test_intersections_require_monic_inputs():
    sig = OperatorSignature(letters=("a",), operators=(("P", 1),))
    f = grammar.parse_poly(sig, "P(a)P(a) - P(aa)")
    g = P.scale(P.LAM, f)
    with pytest.raises(CompositionError, match="monic"):
        composition.find_intersections(g, g, OrderKind.O1, sig)


def test_enumeration_is_deterministic():
    def fingerprint(comps):
        return [
            (c.kind, c.w, c.f_rule, c.f_assignment, c.g_rule, c.g_assignment, c.family)
            for c in comps
        ]

    first = composition.enumerate_compositions(RB_X, 2, 2)
    second = composition.enumerate_compositions(RB_X, 2, 2)
    assert fingerprint(first) == fingerprint(second)

    a = composition.check_gsb(RB_X, 2, 2, label="rb").to_text()
    b = composition.check_gsb(RB_X, 2, 2, label="rb").to_text()
    assert a == b


def test_random_ideal_members_reduce_to_zero():
    # every combination of rule instances placed in contexts lies in the ideal
    rng = random.Random(7)
    sig = RB_X.signature
    words = terms.enumerate_words(sig, 2)
    contexts = terms.enumerate_contexts(sig, 2)
    schema = RB_X.schema("rb")
    coeffs = [P.ONE, P.LAM, P.rational(-2), P.ONE + P.LAM]
    for _ in range(10):
        h = P.zero()
        for _ in range(rng.randint(1, 3)):
            binding = {
                "x": rng.choice(words),
                "y": rng.choice(words),
            }
            ctx = rng.choice(contexts)
            inst = schema.as_polynomial(binding)
            placed = P.subst_linear(ctx, inst)
            h = h + P.scale(rng.choice(coeffs), placed)
        nf, _ = rewrite.normal_form(h, RB_X)
        assert nf.is_zero


def test_completion_adjoins_commutation_rule():
    sig = OperatorSignature(letters=("x", "y"), operators=())
    start = grammar.parse_poly(sig, "xx - y")
    rules, log = composition.complete([start], OrderKind.DEGLEX, sig, 4, 5)
    assert log == ["round 1: adjoined yx - xy", "round 2: fixpoint"]
    printed = [grammar.print_poly(r, OrderKind.DEGLEX, sig) for r in rules]
    assert printed == ["xx - y", "yx - xy"]


def test_completion_fixpoint_when_closed():
    sig = OperatorSignature(letters=("x", "y"), operators=())
    start = grammar.parse_poly(sig, "yx - xy")
    rules, log = composition.complete([start], OrderKind.DEGLEX, sig, 4, 3)
    assert log == ["round 1: fixpoint"]
    assert [grammar.print_poly(r, OrderKind.DEGLEX, sig) for r in rules] == ["yx - xy"]


def test_parallel_worker_pool_matches_sequential_census(monkeypatch):
    # large enough to cross the parallel dispatch threshold; the tallies were
    # established with the sequential path
    monkeypatch.setenv("OPALG_JOBS", "2")
    report = composition.check_gsb(drb_system(("x",)), 2, 2, label="drb")
    tallies = {k: t.compositions for k, t in report.families.items()}
    assert tallies == {
        "1∧1": 704,
        "1∧2": 640,
        "1∧3": 160,
        "2∧1": 641,
        "2∧2": 642,
        "2∧3": 160,
        "3∧1": 80,
        "3∧2": 80,
        "3∧3": 20,
    }
    assert report.failure_count == 0
