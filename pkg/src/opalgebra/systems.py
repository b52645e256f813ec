"""The three concrete rewriting systems and their irreducible-word bases.

Systems: the Rota-Baxter splitting rule under the operator-count order, the
Leibniz rule for a lam-differential operator under its degree order, the
inverted form of the Leibniz rule (legal because lam is invertible in the
coefficient field), and the combined differential Rota-Baxter system with
three rules under the mixed order.

Bases: words that alternate letter blocks and wrapped factors, closed under
nesting, enumerated to a weight bound; they are checked elsewhere to equal
the irreducible words of the matching system.  The closed-form product and
derivation algorithms are implemented directly from their recursions, not
via rewriting, so the two routes cross-validate each other.
"""
from __future__ import annotations

from functools import lru_cache

from . import poly as P
from . import terms
from .orders import OrderKind
from .poly import LAM, ONE, OmegaPolynomial
from .rewrite import RewriteSystem, RuleSchema
from .terms import (
    Letter,
    MetaVar,
    OmegaWord,
    OpApp,
    OperatorSignature,
    concat,
    concat_all,
    prime_word,
    struct_key,
    weight,
)


def _mv(name: str) -> OmegaWord:
    return prime_word(MetaVar(name))


def _wrap(op: str, w: OmegaWord) -> OmegaWord:
    return OmegaWord((OpApp(op, (w,)),))


_MINUS_INV_LAM = -(ONE / LAM)
_INV_LAM = ONE / LAM

RB_FAMILY_NAMES = {"int": "(i)", "in:x": "(ii)", "in:y": "(iii)"}
DIFF_FAMILY_NAMES = {"in:y": "(a)", "in:x": "(b)", "eq": "(eq)"}


def rb_system(letters: tuple[str, ...] = ("x", "y"), drop: str | None = None) -> RewriteSystem:
    """Rota-Baxter splitting rule P(x)P(y) -> P(P(x)y) + P(xP(y)) + lam P(xy).

    drop="weight" removes the lam term, drop="middle" removes P(xP(y));
    both variants exist as negative controls for the basis checker.
    """
    sig = OperatorSignature(tuple(letters), (("P", 1),))
    x, y = _mv("x"), _mv("y")
    lhs = concat(_wrap("P", x), _wrap("P", y))
    rhs = [
        (ONE, _wrap("P", concat(_wrap("P", x), y))),
        (ONE, _wrap("P", concat(x, _wrap("P", y)))),
        (LAM, _wrap("P", concat(x, y))),
    ]
    if drop == "weight":
        rhs = rhs[:2]
    elif drop == "middle":
        rhs = [rhs[0], rhs[2]]
    elif drop is not None:
        raise ValueError(f"unknown drop variant {drop!r}")
    schema = RuleSchema("rb", ("x", "y"), lhs, tuple(rhs))
    return RewriteSystem(sig, OrderKind.O1, (schema,), dict(RB_FAMILY_NAMES))


def diff_system(letters: tuple[str, ...] = ("x",)) -> RewriteSystem:
    """Leibniz rule D(xy) -> D(x)y + xD(y) + lam D(x)D(y)."""
    sig = OperatorSignature(tuple(letters), (("D", 1),))
    x, y = _mv("x"), _mv("y")
    lhs = _wrap("D", concat(x, y))
    rhs = (
        (ONE, concat(_wrap("D", x), y)),
        (ONE, concat(x, _wrap("D", y))),
        (LAM, concat(_wrap("D", x), _wrap("D", y))),
    )
    schema = RuleSchema("diff", ("x", "y"), lhs, rhs)
    return RewriteSystem(sig, OrderKind.O2, (schema,), dict(DIFF_FAMILY_NAMES))


def diff_t_system(letters: tuple[str, ...] = ("x",)) -> RewriteSystem:
    """Inverted Leibniz rule, oriented by operator count:
    D(x)D(y) -> -lam^-1 D(x)y - lam^-1 xD(y) + lam^-1 D(xy)."""
    sig = OperatorSignature(tuple(letters), (("D", 1),))
    x, y = _mv("x"), _mv("y")
    lhs = concat(_wrap("D", x), _wrap("D", y))
    rhs = (
        (_MINUS_INV_LAM, concat(_wrap("D", x), y)),
        (_MINUS_INV_LAM, concat(x, _wrap("D", y))),
        (_INV_LAM, _wrap("D", concat(x, y))),
    )
    schema = RuleSchema("diffT", ("x", "y"), lhs, rhs)
    return RewriteSystem(sig, OrderKind.O1, (schema,))


def drb_system(letters: tuple[str, ...] = ("x",)) -> RewriteSystem:
    """Differential Rota-Baxter system: splitting rule, Leibniz rule, and
    the section rule D(P(x)) -> x, under the mixed order."""
    sig = OperatorSignature(tuple(letters), (("P", 1), ("D", 1)))
    x, y = _mv("x"), _mv("y")
    r1 = RuleSchema(
        "1",
        ("x", "y"),
        concat(_wrap("P", x), _wrap("P", y)),
        (
            (ONE, _wrap("P", concat(_wrap("P", x), y))),
            (ONE, _wrap("P", concat(x, _wrap("P", y)))),
            (LAM, _wrap("P", concat(x, y))),
        ),
    )
    r2 = RuleSchema(
        "2",
        ("x", "y"),
        _wrap("D", concat(x, y)),
        (
            (ONE, concat(_wrap("D", x), y)),
            (ONE, concat(x, _wrap("D", y))),
            (LAM, concat(_wrap("D", x), _wrap("D", y))),
        ),
    )
    r3 = RuleSchema("3", ("x",), _wrap("D", _wrap("P", x)), ((ONE, x),))
    return RewriteSystem(sig, OrderKind.O3, (r1, r2, r3), family_merge=True)


SYSTEM_BUILDERS = {
    "rb": rb_system,
    "diff": diff_system,
    "diff-t": diff_t_system,
    "drb": drb_system,
}


def build_system(name: str, letters: tuple[str, ...]) -> RewriteSystem:
    try:
        builder = SYSTEM_BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown system {name!r}") from None
    return builder(letters)


# ------------------------------------------------------------------- bases

def _sorted_words(ws) -> tuple[OmegaWord, ...]:
    return tuple(sorted(set(ws), key=lambda w: (weight(w), struct_key(w))))


def alternating_product(
    y_words, z_words, wrap: str, max_weight: int
) -> tuple[OmegaWord, ...]:
    """All strict alternations of blocks from Y and wrapped factors over Z,
    in the four start/end combinations, truncated by weight."""
    blocks = [w for w in y_words if weight(w) <= max_weight]
    wrapped = [_wrap(wrap, z) for z in z_words if weight(z) + 1 <= max_weight]
    out: set[OmegaWord] = set()

    def extend(prefix: tuple, used: int, last_was_wrap: bool | None) -> None:
        if prefix:
            out.add(OmegaWord(prefix))
        if last_was_wrap is not True:
            for f in wrapped:
                wf = weight(f)
                if used + wf <= max_weight:
                    extend(prefix + f.factors, used + wf, True)
        if last_was_wrap is not False:
            for b in blocks:
                wb = weight(b)
                if used + wb <= max_weight:
                    extend(prefix + b.factors, used + wb, False)

    extend((), 0, None)
    return _sorted_words(out)


def letter_words(letters: tuple[str, ...], max_weight: int) -> tuple[OmegaWord, ...]:
    out: list[OmegaWord] = []

    def rec(prefix: tuple, used: int) -> None:
        if prefix:
            out.append(OmegaWord(prefix))
        if used < max_weight:
            for s in letters:
                rec(prefix + (Letter(s),), used + 1)

    rec((), 0)
    return _sorted_words(out)


def phi_words(
    letters: tuple[str, ...], max_weight: int, wrap: str = "P"
) -> tuple[OmegaWord, ...]:
    """Fixpoint of the alternating construction over letter blocks: the
    nested-alternation basis words up to the weight bound."""
    base = letter_words(letters, max_weight)
    return _phi_fixpoint(base, max_weight, wrap)


def _phi_fixpoint(
    base: tuple[OmegaWord, ...], max_weight: int, wrap: str
) -> tuple[OmegaWord, ...]:
    cur = base
    for _ in range(max_weight + 1):
        nxt = alternating_product(base, cur, wrap, max_weight)
        if set(nxt) == set(cur):
            return _sorted_words(cur)
        cur = nxt
    return _sorted_words(cur)


def d_omega_monomials(letters: tuple[str, ...], max_weight: int) -> tuple[OmegaWord, ...]:
    """Products of iterated-derivative factors D^i(letter)."""
    atoms: list[OmegaWord] = []
    for s in letters:
        w = prime_word(Letter(s))
        i = 0
        while i + 1 <= max_weight:
            atoms.append(w)
            w = _wrap("D", w)
            i += 1
    out: list[OmegaWord] = []

    def rec(prefix: tuple, used: int) -> None:
        if prefix:
            out.append(OmegaWord(prefix))
        for a in atoms:
            wa = weight(a)
            if used + wa <= max_weight:
                rec(prefix + a.factors, used + wa)

    rec((), 0)
    return _sorted_words(out)


def phi_d_omega(letters: tuple[str, ...], max_weight: int) -> tuple[OmegaWord, ...]:
    """Alternation fixpoint over derivative-monomial blocks with a P wrap."""
    base = d_omega_monomials(letters, max_weight)
    return _phi_fixpoint(base, max_weight, "P")


# ------------------------------------------------- closed-form algorithms

def _rb_word_ok(w: OmegaWord, wrap: str) -> bool:
    """No two adjacent wrapped factors at any nesting level."""
    prev_wrapped = False
    for p in w.factors:
        if isinstance(p, OpApp):
            if p.op == wrap and prev_wrapped:
                return False
            if not all(_rb_word_ok(a, wrap) for a in p.args):
                return False
            prev_wrapped = p.op == wrap
        else:
            prev_wrapped = False
    return True


class AlgorithmInputError(ValueError):
    pass


def rb_product(u: OmegaWord, v: OmegaWord, sig: OperatorSignature) -> OmegaPolynomial:
    """Product of two basis words in the quotient by the splitting rule,
    computed by structural recursion rather than rewriting."""
    for w in (u, v):
        if not _rb_word_ok(w, "P"):
            raise AlgorithmInputError(f"not a basis word: P factors touch in {w}")
    return _diamond(u, v, sig)


@lru_cache(maxsize=None)
def _diamond(u: OmegaWord, v: OmegaWord, sig: OperatorSignature) -> OmegaPolynomial:
    if terms.depth(u) == 0 and terms.depth(v) == 0:
        return P.monomial(concat(u, v))
    bu, bv = terms.breadth(u), terms.breadth(v)
    if bu == 1 and bv == 1:
        fu, fv = u.factors[0], v.factors[0]
        if isinstance(fu, Letter) or isinstance(fv, Letter):
            return P.monomial(concat(u, v))
        up, vp = fu.args[0], fv.args[0]
        inner = (
            _diamond(_wrap("P", up), vp, sig)
            + _diamond(up, _wrap("P", vp), sig)
            + P.scale(LAM, _diamond(up, vp, sig))
        )
        return P.op_linear(sig, "P", [inner])
    mid = _diamond(OmegaWord((u.factors[-1],)), OmegaWord((v.factors[0],)), sig)
    out = mid
    if len(u.factors) > 1:
        out = P.mul(P.monomial(OmegaWord(u.factors[:-1])), out)
    if len(v.factors) > 1:
        out = P.mul(out, P.monomial(OmegaWord(v.factors[1:])))
    return out


def rb_product_linear(
    f: OmegaPolynomial, g: OmegaPolynomial, sig: OperatorSignature
) -> OmegaPolynomial:
    acc = P.zero()
    for wu, cu in f.terms.items():
        for wv, cv in g.terms.items():
            acc = acc + P.scale(cu * cv, rb_product(wu, wv, sig))
    return acc


def _chain_height(p) -> int | None:
    """Height of an iterated-derivative factor D^i(letter), None otherwise."""
    if isinstance(p, Letter):
        return 0
    if isinstance(p, OpApp) and p.op == "D" and len(p.args) == 1:
        arg = p.args[0]
        if terms.breadth(arg) == 1:
            inner = _chain_height(arg.factors[0])
            if inner is not None:
                return inner + 1
    return None


def d_extend(u: OmegaWord, sig: OperatorSignature) -> OmegaPolynomial:
    """Derivative of a product of iterated-derivative factors, computed by
    the split-off-the-first-factor recursion."""
    heights = [_chain_height(p) for p in u.factors]
    if any(h is None for h in heights):
        raise AlgorithmInputError(f"not a product of derivative chains: {u}")
    return _d_extend(u, sig)


def _d_extend(u: OmegaWord, sig: OperatorSignature) -> OmegaPolynomial:
    if terms.breadth(u) == 1:
        return P.monomial(_wrap("D", u))
    head = OmegaWord(u.factors[:1])
    rest = OmegaWord(u.factors[1:])
    d_head = P.monomial(_wrap("D", head))
    d_rest = _d_extend(rest, sig)
    return (
        P.mul(d_head, P.monomial(rest))
        + P.mul(P.monomial(head), d_rest)
        + P.scale(LAM, P.mul(d_head, d_rest))
    )
