"""Parser and printer: round trips, documented examples, error positions."""
from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from opalgebra import grammar, poly as P
from opalgebra.grammar import GrammarError, parse_poly, parse_word, print_poly, print_word
from opalgebra.orders import OrderKind
from opalgebra.poly import LAM, ONE, Coefficient
from opalgebra.terms import OperatorSignature, enumerate_words

SIG_RB = OperatorSignature(("x", "y"), (("P", 1),))
SIG_D = OperatorSignature(("x", "y"), (("D", 1),))
SIG_PD = OperatorSignature(("x",), (("P", 1), ("D", 1)))


def test_word_round_trip_exhaustive_small():
    for sig in (SIG_RB, SIG_D, SIG_PD):
        for w in enumerate_words(sig, 3):
            assert parse_word(sig, print_word(w)) == w


def test_whitespace_is_insignificant():
    assert parse_word(SIG_D, "D(x y)") == parse_word(SIG_D, "D(xy)")
    assert parse_poly(SIG_D, " D( x ) + x ") == parse_poly(SIG_D, "D(x)+x")


def test_leibniz_relation_parses_to_four_terms():
    f = parse_poly(SIG_D, "D(x y) - D(x) y - x D(y) - lam * D(x) D(y)")
    assert len(f.terms) == 4
    assert f.terms[parse_word(SIG_D, "D(xy)")] == ONE
    assert f.terms[parse_word(SIG_D, "D(x)D(y)")] == -LAM


def test_empty_operator_application_is_an_arity_error():
    with pytest.raises(GrammarError):
        parse_word(SIG_RB, "P()")


def test_letter_runs_split_by_longest_match():
    assert print_word(parse_word(SIG_RB, "xy")) == "xy"
    assert print_word(parse_word(SIG_RB, "xyx")) == "xyx"
    sig = OperatorSignature(("a", "ab", "b"), ())
    # both readings of "abb" exist; the split must be consistent and parse
    assert print_word(parse_word(sig, "ab b")) == print_word(parse_word(sig, "abb"))


def test_operator_token_may_touch_letters():
    assert parse_word(SIG_RB, "xP(y)") == parse_word(SIG_RB, "x P(y)")
    assert parse_word(SIG_PD, "xD(P(x))") == parse_word(SIG_PD, "x D( P( x ) )")


def test_unknown_name_is_rejected_with_position():
    with pytest.raises(GrammarError) as err:
        parse_word(SIG_RB, "xz")
    assert "position" in str(err.value)


def test_unbalanced_and_trailing_input_rejected():
    with pytest.raises(GrammarError):
        parse_word(SIG_RB, "P(x")
    with pytest.raises(GrammarError):
        parse_word(SIG_RB, "P(x))")
    with pytest.raises(GrammarError):
        parse_poly(SIG_RB, "x +")


def test_lam_is_reserved_for_the_coefficient_parameter():
    sig = OperatorSignature(("l", "a", "m"), ())
    f = parse_poly(sig, "lam * la m")
    assert f.terms[parse_word(sig, "lam")] == LAM


def test_coefficient_grammar():
    f = parse_poly(SIG_RB, "1/2 * x - 3 * y + lam^2 * xy")
    assert f.terms[parse_word(SIG_RB, "x")] == Coefficient.from_rational("1/2")
    assert f.terms[parse_word(SIG_RB, "y")] == Coefficient.from_rational(-3)
    assert f.terms[parse_word(SIG_RB, "xy")] == LAM * LAM


def test_like_terms_collect_and_cancel():
    assert parse_poly(SIG_RB, "x + x").terms[parse_word(SIG_RB, "x")] == ONE + ONE
    assert parse_poly(SIG_RB, "x - x").is_zero
    assert parse_poly(SIG_RB, "0").is_zero


def test_unary_minus():
    f = parse_poly(SIG_RB, "-x - lam * y")
    assert f.terms[parse_word(SIG_RB, "x")] == -ONE
    assert f.terms[parse_word(SIG_RB, "y")] == -LAM


def test_print_poly_orders_terms_descending():
    f = parse_poly(SIG_RB, "lam*P(xy) + P(x)P(y) + P(P(x)y)")
    assert print_poly(f, OrderKind.O1, SIG_RB) == "P(x)P(y) + P(P(x)y) + lam*P(xy)"
    assert print_poly(P.zero(), OrderKind.O1, SIG_RB) == "0"


def test_print_poly_coefficient_forms():
    f = parse_poly(SIG_RB, "(lam + 1) * x - y - 3/2 * xy")
    s = print_poly(f, OrderKind.O1, SIG_RB)
    assert "(lam + 1)*x" in s
    assert "- y" in s
    assert "3/2*xy" in s


def test_inverse_lam_coefficients_parse_and_round_trip():
    f = parse_poly(SIG_D, "1/lam * D(xx) - 1/lam^2 * x")
    assert f.terms[parse_word(SIG_D, "D(xx)")] == ONE / LAM
    assert f.terms[parse_word(SIG_D, "x")] == -(ONE / (LAM * LAM))
    printed = print_poly(f, OrderKind.O2, SIG_D)
    assert parse_poly(SIG_D, printed) == f


@given(data=st.data())
def test_poly_print_parse_round_trip(data):
    pool = enumerate_words(SIG_PD, 3)
    coeffs = st.sampled_from(
        [ONE, -ONE, LAM, -LAM, ONE + LAM, Coefficient.from_rational("2/3"), ONE / LAM]
    )
    pairs = data.draw(st.lists(st.tuples(coeffs, st.sampled_from(pool)), min_size=1, max_size=5))
    f = P.from_terms(pairs)
    printed = print_poly(f, OrderKind.O3, SIG_PD)
    assert parse_poly(SIG_PD, printed) == f
