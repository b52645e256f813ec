"""Acceptance gate: the ten checks the package commits to.

Each criterion is covered by one or more test_criterion_NN_* functions; the
terminal summary appends a per-criterion verdict line (see conftest).  The
three basis-check reports are produced through the command-line driver in a
subprocess, exactly as a user would run them, and are reused by the
reproducibility criterion at the end.  Two stated targets are recorded as
strict expected failures because the computation yields a different answer;
the analysis lives in the project notes.
"""

import re
import subprocess
import sys

import pytest

from opalgebra import composition, grammar, orders, rewrite, terms
from opalgebra import poly as P
from opalgebra.cli import main as cli_main
from opalgebra.orders import OrderKind
from opalgebra.systems import (
    d_extend,
    d_omega_monomials,
    diff_system,
    diff_t_system,
    drb_system,
    phi_d_omega,
    phi_words,
    rb_product,
    rb_system,
)
from opalgebra.terms import OperatorSignature


RB_ARGV = ["check-gsb", "--letters", "x,y,z", "--max-weight", "2", "--max-context", "2"]
DIFF_ARGV = [
    "check-gsb", "--system", "diff", "--letters", "x", "--max-weight", "3", "--max-context", "2",
]
DRB_ARGV = [
    "check-gsb", "--system", "drb", "--letters", "x", "--max-weight", "2", "--max-context", "2",
]

_FAMILY = re.compile(r"family (.+): compositions=(\d+) trivial=(\d+) failures=(\d+)")


def run_driver(argv):
    return subprocess.run(
        [sys.executable, "-m", "opalgebra"] + argv, capture_output=True, timeout=540
    )


def families_of(stdout: bytes) -> dict[str, tuple[int, int, int]]:
    out = {}
    for name, comps, trivial, failures in _FAMILY.findall(stdout.decode()):
        out[name] = (int(comps), int(trivial), int(failures))
    return out


@pytest.fixture(scope="module")
def rb_report():
    return run_driver(RB_ARGV)


@pytest.fixture(scope="module")
def diff_report():
    return run_driver(DIFF_ARGV)


@pytest.fixture(scope="module")
def drb_report():
    return run_driver(DRB_ARGV)


def replay(start, system):
    """Reduce step by step, recording support sizes, every word seen, and
    the rule applied at each step."""
    red = rewrite.Reducer(system)
    cur = start
    sizes = [len(cur.terms)]
    seen = set(cur.terms)
    rules = []
    while True:
        out = rewrite.reduce_once(cur, red, rewrite.LEFTMOST_OUTERMOST)
        if out is None:
            break
        cur, step = out
        rules.append(step.rule)
        sizes.append(len(cur.terms))
        seen |= set(cur.terms)
    return cur, sizes, seen, rules


# ------------------------------------------------- 1: Rota-Baxter basis check

def test_criterion_01_rb_all_compositions_trivial(rb_report):
    assert rb_report.returncode == 0
    fams = families_of(rb_report.stdout)
    assert set(fams) == {"(i)", "(ii)", "(iii)"}
    for comps, trivial, failures in fams.values():
        assert comps >= 1
        assert failures == 0
        assert trivial == comps
    assert b"basis at this bound: yes" in rb_report.stdout


def test_criterion_01_star_slot_inclusion_replay():
    # the inclusion whose context in the pattern slot is the bare hole:
    # the inner instance P(a)P(b) sits in the slot of P( . )P(c)
    system = rb_system(("a", "b", "c"))
    sig = system.signature
    schema = system.schema("rb")
    outer = schema.as_polynomial(
        {"x": grammar.parse_word(sig, "P(a)P(b)"), "y": grammar.parse_word(sig, "c")}
    )
    inner = schema.as_polynomial(
        {"x": grammar.parse_word(sig, "a"), "y": grammar.parse_word(sig, "b")}
    )
    incls = composition.find_inclusions(outer, inner, system.order, sig)
    assert len(incls) == 1
    comp = incls[0]
    assert grammar.print_word(comp.w) == "P(P(a)P(b))P(c)"

    nf, sizes, seen, _ = replay(comp.poly, system)
    assert nf.is_zero
    assert sizes[0] == 6
    assert sizes == [6, 8, 10, 12, 8, 4, 0]
    # distinct words appearing across the whole cancellation
    assert len(seen) == 15


# ---------------------------------------------- 2: differential basis check

def test_criterion_02_diff_all_compositions_trivial(diff_report):
    assert diff_report.returncode == 0
    fams = families_of(diff_report.stdout)
    assert fams["(a)"][0] >= 1
    assert fams["(b)"][0] >= 1
    for comps, trivial, failures in fams.values():
        assert failures == 0
        assert trivial == comps
    assert b"basis at this bound: yes" in diff_report.stdout


# ------------------------------------- 3: differential Rota-Baxter families

def test_criterion_03_drb_nine_families_all_trivial(drb_report):
    assert drb_report.returncode == 0
    fams = families_of(drb_report.stdout)
    assert set(fams) == {
        "1∧1", "1∧2", "1∧3", "2∧1", "2∧2", "2∧3", "3∧1", "3∧2", "3∧3",
    }
    for comps, trivial, failures in fams.values():
        assert comps >= 1
        assert failures == 0
        assert trivial == comps
    assert b"basis at this bound: yes" in drb_report.stdout


def test_criterion_03_section_in_derivation_replay():
    # the 3-with-2 composition: the derivation rule's instance D(ab) planted
    # in the slot of the section rule's pattern D(P( . ))
    system = drb_system(("a", "b"))
    sig = system.signature
    dab = grammar.parse_word(sig, "D(ab)")
    f_inst = system.schema("3").as_polynomial({"x": dab})
    g_poly = system.schema("2").as_polynomial(
        {"x": grammar.parse_word(sig, "a"), "y": grammar.parse_word(sig, "b")}
    )
    ambiguity = grammar.parse_word(sig, "D(P(D(ab)))")
    ctx = terms.occurrences(ambiguity, dab)[0]
    comp = f_inst - P.subst_linear(ctx, g_poly)
    assert comp == grammar.parse_poly(
        sig, "lam*D(P(D(a)D(b))) + D(P(D(a)b)) + D(P(aD(b))) - D(ab)"
    )

    nf, _, seen, rules = replay(comp, system)
    assert nf.is_zero
    assert rules == ["3", "3", "3", "2"]
    assert len(seen) == 7


# ---------------------------------- 4: basis families are the normal forms

def test_criterion_04_basis_words_are_exactly_the_irreducibles():
    letters = ("x", "y")
    cases = [
        (phi_words(letters, 4), rb_system(letters)),
        (d_omega_monomials(letters, 4), diff_system(letters)),
        (phi_words(letters, 4, wrap="D"), diff_t_system(letters)),
        (phi_d_omega(letters, 4), drb_system(letters)),
    ]
    for words, system in cases:
        assert set(words) == set(rewrite.irreducible_words(system, 4))


# ------------------------------------ 5: closed products match normal forms

def test_criterion_05_products_agree_with_rewriting():
    letters = ("x", "y")
    rb = rb_system(letters)
    basis = phi_words(letters, 3)
    pairs = [
        (u, v)
        for u in basis
        for v in basis
        if terms.weight(u) + terms.weight(v) <= 4
    ]
    assert len(pairs) == 152
    for u, v in pairs:
        direct = rb_product(u, v, rb.signature)
        nf, _ = rewrite.normal_form(P.monomial(terms.concat(u, v)), rb)
        assert direct == nf

    diff = diff_system(letters)
    mons = d_omega_monomials(letters, 4)
    assert len(mons) == 80
    for u in mons:
        direct = d_extend(u, diff.signature)
        dword = terms.apply_op(diff.signature, "D", [u])
        nf, _ = rewrite.normal_form(P.monomial(dword), diff)
        assert direct == nf


# --------------------------- 6: the two derivation laws span the same ideal

def test_criterion_06_defining_families_generate_the_same_ideal():
    letters = ("x", "y")
    diff = diff_system(letters)
    quot = diff_t_system(letters)
    words = terms.enumerate_words(diff.signature, 2)

    leibniz = diff.schema("diff")
    count = 0
    for u in words:
        for v in words:
            if terms.weight(u) + terms.weight(v) > 3:
                continue
            inst = leibniz.as_polynomial({"x": u, "y": v})
            nf, _ = rewrite.normal_form(inst, quot)
            assert nf.is_zero
            count += 1
    assert count == 28

    quotient_rule = quot.schema("diffT")
    count = 0
    for u in words:
        for v in words:
            if terms.weight(u) + terms.weight(v) > 2:
                continue
            inst = quotient_rule.as_polynomial({"x": u, "y": v})
            nf, _ = rewrite.normal_form(inst, diff)
            assert nf.is_zero
            count += 1
    assert count == 4


# ----------------------------------------- 7: orders respect multiplication

def test_criterion_07_monomial_order_property():
    letters = ("x", "y")
    cases = [
        (OrderKind.O1, rb_system(letters).signature),
        (OrderKind.O2, diff_system(letters).signature),
        (OrderKind.O3, drb_system(letters).signature),
        (OrderKind.O1, OperatorSignature(letters, (("P", 1), ("Q", 2)))),
    ]
    for kind, sig in cases:
        report = orders.check_monomial_property(kind, sig, 3)
        assert report.ok, "\n".join(report.lines())


# -------------------------------------------- 8: damage is actually noticed

@pytest.mark.xfail(
    strict=True,
    reason="dropping the weight term leaves a system that still closes every"
    " composition at these bounds; analysis in the project notes",
)
def test_criterion_08_deleted_weight_term_yields_failures():
    broken = rb_system(("x",), drop="weight")
    report = composition.check_gsb(broken, 2, 2, label="rb-drop-weight")
    assert len(report.families["(i)"].failures) >= 1


def test_criterion_08_control_deleted_middle_term_yields_failures(capsys, tmp_path):
    broken = rb_system(("x",), drop="middle")
    report = composition.check_gsb(broken, 1, 1, label="rb-drop-middle")
    assert len(report.families["(i)"].failures) >= 1
    assert not report.is_basis_at_bound

    # the driver maps failing checks to exit status 2
    rules = tmp_path / "rules.txt"
    rules.write_text("P(a)P(a) - P(P(a)a) - lam*P(aa)\n")
    code = cli_main(
        [
            "check-gsb", "--system", f"file:{rules}", "--order", "o1",
            "--max-weight", "1", "--max-context", "1",
        ]
    )
    capsys.readouterr()
    assert code == 2


# ------------------------------------------------ 9: strategy independence

def test_criterion_09_strategies_agree():
    system = rb_system(("a", "b", "c"))
    w = grammar.parse_word(system.signature, "P(a)P(b)P(c)")
    lo, _ = rewrite.normal_form(
        P.monomial(w), system, strategy=rewrite.LEFTMOST_OUTERMOST
    )
    ri, _ = rewrite.normal_form(
        P.monomial(w), system, strategy=rewrite.RIGHTMOST_INNERMOST
    )
    assert lo == ri
    assert not lo.is_zero


@pytest.mark.xfail(
    strict=True,
    reason="the normal form of the triple product has eleven words, not nine;"
    " analysis in the project notes",
)
def test_criterion_09_normal_form_has_nine_words():
    system = rb_system(("a", "b", "c"))
    w = grammar.parse_word(system.signature, "P(a)P(b)P(c)")
    nf, _ = rewrite.normal_form(P.monomial(w), system)
    assert len(nf.terms) == 9


def test_criterion_09_control_normal_form_has_eleven_words():
    system = rb_system(("a", "b", "c"))
    w = grammar.parse_word(system.signature, "P(a)P(b)P(c)")
    nf, _ = rewrite.normal_form(P.monomial(w), system)
    assert len(nf.terms) == 11


# --------------------------------------------------- 10: runs are replayable

def test_criterion_10_reports_are_byte_identical_across_runs(
    rb_report, diff_report, drb_report
):
    for first, argv in [
        (rb_report, RB_ARGV),
        (diff_report, DIFF_ARGV),
        (drb_report, DRB_ARGV),
    ]:
        second = run_driver(argv)
        assert second.returncode == first.returncode
        assert second.stdout == first.stdout
