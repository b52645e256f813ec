"""HTTP service exposing every operation of the library.

Each endpoint takes a small request model describing the run configuration
(system selector, signature, order, bounds) plus the operation's inputs, and
returns preformatted output lines next to the structured fields a caller
needs for decisions such as exit codes.  The command-line driver is a thin
client of this service, either in-process or over the network.
"""
from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from . import composition, grammar, orders, poly as P, rewrite, systems
from .composition import CompositionError, CompositionKind
from .grammar import GrammarError
from .orders import OrderError, OrderKind
from .poly import CoefficientError, OmegaPolynomial, PoleError
from .rewrite import RewriteError, RewriteSystem, RuleSchema
from .systems import AlgorithmInputError
from .terms import OperatorSignature, TermError

_DOMAIN_ERRORS = (
    GrammarError,
    TermError,
    OrderError,
    CoefficientError,
    PoleError,
    CompositionError,
    RewriteError,
    AlgorithmInputError,
    ValueError,
)

_ORDER_DEFAULTS = {"rb": OrderKind.O1, "diff": OrderKind.O2, "diff-t": OrderKind.O1, "drb": OrderKind.O3}


class ConfigError(ValueError):
    pass


# ------------------------------------------------------- signature inference

def infer_letters(texts: list[str]) -> tuple[str, ...]:
    """Lowercase characters of name tokens, skipping the coefficient
    parameter lam; the default alphabet is whatever the inputs mention."""
    found: set[str] = set()
    for text in texts:
        for tok in grammar._lex(text):
            if tok.kind == "NAME" and tok.text != "lam":
                found.update(c for c in tok.text if c.islower())
    return tuple(sorted(found))


def infer_operators(texts: list[str]) -> tuple[tuple[str, int], ...]:
    """Operator names are the non-lowercase tails of name tokens directly
    before an opening parenthesis; arity is read off the top-level commas."""
    arities: dict[str, int] = {}
    for text in texts:
        toks = grammar._lex(text)
        for i, tok in enumerate(toks):
            if tok.kind != "NAME" or toks[i + 1].kind != "(":
                continue
            name = tok.text
            j = len(name)
            while j > 0 and not name[j - 1].islower():
                j -= 1
            op = name[j:]
            if not op:
                continue
            depth, commas = 0, 0
            for t in toks[i + 1 :]:
                if t.kind == "(":
                    depth += 1
                elif t.kind == ")":
                    depth -= 1
                    if depth == 0:
                        break
                elif t.kind == "," and depth == 1:
                    commas += 1
            arity = commas + 1
            if arities.setdefault(op, arity) != arity:
                raise ConfigError(f"operator {op} used with conflicting arities")
    return tuple(sorted(arities.items()))


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not an exact rational: {text!r}") from e


# ------------------------------------------------------------ configuration

class RunConfig(BaseModel):
    """Shared run configuration: which system, over which signature, under
    which order, with optional lam specialization."""

    model_config = ConfigDict(extra="forbid")

    system: Optional[str] = None
    letters: Optional[list[str]] = None
    operators: Optional[list[tuple[str, int]]] = None
    order: Optional[str] = None
    rules_text: Optional[str] = None
    fuel: int = Field(default=10_000, ge=1)
    lambda_value: Optional[str] = None
    format: Literal["text", "structured"] = "text"


def resolve_system_name(cfg: RunConfig) -> str:
    """Explicit selector, else rules when rule text is present, else the
    system whose signature fits an explicitly requested order."""
    if cfg.system is not None:
        return cfg.system
    if cfg.rules_text is not None:
        return "rules"
    if cfg.order == "o2":
        return "diff"
    if cfg.order == "o3":
        return "drb"
    return "rb"


def _resolve_letters(cfg: RunConfig, inputs: list[str], fallback: tuple[str, ...] = ("x",)) -> tuple[str, ...]:
    if cfg.letters is not None:
        if not cfg.letters:
            raise ConfigError("letters must be nonempty when given")
        return tuple(cfg.letters)
    texts = list(inputs)
    if cfg.rules_text is not None:
        texts.append(cfg.rules_text)
    inferred = infer_letters(texts)
    return inferred if inferred else fallback


def _resolve_order(cfg: RunConfig, name: str) -> OrderKind:
    if cfg.order is not None:
        try:
            return OrderKind(cfg.order)
        except ValueError:
            raise ConfigError(f"unknown order {cfg.order!r}") from None
    if name in _ORDER_DEFAULTS:
        return _ORDER_DEFAULTS[name]
    raise ConfigError("rule-file systems need an explicit order")


def _rules_lines(text: str) -> list[str]:
    return [line.strip() for line in text.splitlines() if line.strip()]


def build_system(cfg: RunConfig, inputs: list[str]) -> RewriteSystem:
    """The rewrite system the run works in; inputs contribute inferred
    letters so desk use needs no signature declaration."""
    name = resolve_system_name(cfg)
    if name.startswith("file:"):
        raise ConfigError("resolve file: selectors to rules_text before the request")
    if name == "rules":
        if cfg.rules_text is None:
            raise ConfigError("system 'rules' needs rules_text")
        kind = _resolve_order(cfg, name)
        letters = _resolve_letters(cfg, inputs)
        ops = tuple(cfg.operators) if cfg.operators is not None else infer_operators([cfg.rules_text])
        sig = OperatorSignature(letters, ops)
        schemas = []
        for i, line in enumerate(_rules_lines(cfg.rules_text)):
            f = grammar.parse_poly(sig, line)
            if f.is_zero:
                raise ConfigError(f"rule {i + 1} is the zero polynomial")
            schemas.append(rewrite.schema_from_polynomial(f"r{i + 1}", f, kind, sig))
        system = RewriteSystem(sig, kind, tuple(schemas))
    elif name in systems.SYSTEM_BUILDERS:
        if cfg.operators is not None:
            raise ConfigError(f"operators are fixed by the {name} system")
        letters = _resolve_letters(cfg, inputs)
        system = systems.build_system(name, letters)
        kind = _resolve_order(cfg, name)
        if kind is not system.order:
            system = replace(system, order=kind)
    else:
        raise ConfigError(f"unknown system {name!r}")
    if cfg.lambda_value is not None:
        system = _specialize_system(system, parse_rational(cfg.lambda_value))
    return system


def _specialize_system(system: RewriteSystem, value: Fraction) -> RewriteSystem:
    schemas = []
    for s in system.schemas:
        rhs = []
        for c, w in s.rhs:
            q = c.specialize(value)
            if q:
                rhs.append((P.rational(q), w))
        schemas.append(RuleSchema(s.name, s.metavariables, s.lhs, tuple(rhs)))
    return replace(system, schemas=tuple(schemas))


def _maybe_specialize(f: OmegaPolynomial, cfg: RunConfig) -> OmegaPolynomial:
    if cfg.lambda_value is None:
        return f
    return P.specialize_lambda(f, parse_rational(cfg.lambda_value))


def _poly_lines(
    f: OmegaPolynomial, kind: OrderKind, sig: OperatorSignature, fmt: str, label: str
) -> list[str]:
    if fmt == "text":
        return [grammar.print_poly(f, kind, sig)]
    lines = [f"# opalgebra-report v1 kind={label}"]
    for w, c in P.sorted_terms(f, kind, sig):
        lines.append(f"term\t{grammar.print_coeff(c)}\t{grammar.print_word(w)}")
    return lines


# ------------------------------------------------------------------- models

class NfRequest(RunConfig):
    poly: str
    trace: bool = False


class NfResponse(BaseModel):
    lines: list[str]
    is_zero: bool
    term_count: int


class OrderCmpRequest(RunConfig):
    left: str
    right: str


class OrderCmpResponse(BaseModel):
    result: Literal["LT", "EQ", "GT"]
    lines: list[str]


class ComposeRequest(RunConfig):
    max_weight: int = Field(default=2, ge=1)
    max_context: int = Field(default=2, ge=1)


class ComposeResponse(BaseModel):
    lines: list[str]
    count: int


class CheckGsbRequest(RunConfig):
    max_weight: int = Field(default=2, ge=1)
    max_context: int = Field(default=2, ge=1)


class CheckGsbResponse(BaseModel):
    lines: list[str]
    failures: int
    is_basis_at_bound: bool


class EnumBasisRequest(RunConfig):
    family: Literal["phi", "domega", "phidomega", "irr"]
    max_weight: int = Field(default=2, ge=1)


class EnumBasisResponse(BaseModel):
    lines: list[str]
    count: int


class MulRbRequest(RunConfig):
    left: str
    right: str


class DApplyRequest(RunConfig):
    word: str


class PolyResponse(BaseModel):
    lines: list[str]
    term_count: int


class CompleteRequest(RunConfig):
    max_weight: int = Field(default=6, ge=1)
    max_rounds: int = Field(default=4, ge=1)


class CompleteResponse(BaseModel):
    lines: list[str]
    adjoined: int
    reached_fixpoint: bool


# ------------------------------------------------------------------ service

def create_app() -> FastAPI:
    app = FastAPI(title="opalgebra", version="0.1.0")

    def run(handler):
        try:
            return handler()
        except _DOMAIN_ERRORS as e:
            raise HTTPException(status_code=422, detail=str(e)) from e

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/nf", response_model=NfResponse)
    def nf(req: NfRequest) -> NfResponse:
        def handler() -> NfResponse:
            system = build_system(req, [req.poly])
            f = _maybe_specialize(grammar.parse_poly(system.signature, req.poly), req)
            result, trace = rewrite.normal_form(f, system, fuel=req.fuel)
            lines = _poly_lines(result, system.order, system.signature, req.format, "nf")
            if req.trace:
                if req.format == "text":
                    lines += trace.lines()
                else:
                    lines += [f"step\t{line}" for line in trace.lines()]
            return NfResponse(lines=lines, is_zero=result.is_zero, term_count=len(result.terms))

        return run(handler)

    @app.post("/order-cmp", response_model=OrderCmpResponse)
    def order_cmp(req: OrderCmpRequest) -> OrderCmpResponse:
        def handler() -> OrderCmpResponse:
            system = build_system(req, [req.left, req.right])
            u = grammar.parse_word(system.signature, req.left)
            v = grammar.parse_word(system.signature, req.right)
            cmp = orders.compare(system.order, system.signature, u, v)
            name = {orders.Ordering.LESS: "LT", orders.Ordering.EQUAL: "EQ", orders.Ordering.GREATER: "GT"}[cmp]
            return OrderCmpResponse(result=name, lines=[name])

        return run(handler)

    @app.post("/compose", response_model=ComposeResponse)
    def compose(req: ComposeRequest) -> ComposeResponse:
        def handler() -> ComposeResponse:
            system = build_system(req, [])
            name = resolve_system_name(req)
            comps = composition.enumerate_compositions(system, req.max_weight, req.max_context)
            sig, kind = system.signature, system.order
            lines = []
            if req.format == "structured":
                lines.append(
                    "# opalgebra-report v1 kind=compositions"
                    f" system={name} order={kind.value}"
                    f" letters={','.join(sig.letters)}"
                    f" max_weight={req.max_weight} max_context={req.max_context}"
                )
            for c in comps:
                kind_name = "int" if c.kind is CompositionKind.INTERSECTION else "incl"
                value = grammar.print_poly(c.poly, kind, sig)
                w = grammar.print_word(c.w)
                if req.format == "text":
                    lines.append(f"[{c.family}] {kind_name} at {w}: {value}")
                else:
                    lines.append(f"composition\t{c.family}\t{kind_name}\t{w}\t{value}")
            return ComposeResponse(lines=lines, count=len(comps))

        return run(handler)

    @app.post("/check-gsb", response_model=CheckGsbResponse)
    def check_gsb(req: CheckGsbRequest) -> CheckGsbResponse:
        def handler() -> CheckGsbResponse:
            system = build_system(req, [])
            report = composition.check_gsb(
                system, req.max_weight, req.max_context, label=resolve_system_name(req), fuel=req.fuel
            )
            lines = report.to_text() if req.format == "text" else report.to_records()
            return CheckGsbResponse(
                lines=lines,
                failures=report.failure_count,
                is_basis_at_bound=report.is_basis_at_bound,
            )

        return run(handler)

    @app.post("/enum-basis", response_model=EnumBasisResponse)
    def enum_basis(req: EnumBasisRequest) -> EnumBasisResponse:
        def handler() -> EnumBasisResponse:
            system = build_system(req, [])
            name = resolve_system_name(req)
            sig = system.signature
            if req.family == "irr":
                words = rewrite.irreducible_words(system, req.max_weight)
            elif req.family == "phi":
                wrap = "D" if name == "diff-t" else "P"
                words = systems.phi_words(sig.letters, req.max_weight, wrap=wrap)
            elif req.family == "domega":
                words = systems.d_omega_monomials(sig.letters, req.max_weight)
            else:
                words = systems.phi_d_omega(sig.letters, req.max_weight)
            key = orders.sort_key(system.order, sig)
            ordered = sorted(words, key=key)
            lines = []
            if req.format == "structured":
                lines.append(
                    f"# opalgebra-report v1 kind=basis family={req.family}"
                    f" system={name} letters={','.join(sig.letters)}"
                    f" max_weight={req.max_weight}"
                )
                lines += [f"word\t{grammar.print_word(w)}" for w in ordered]
            else:
                lines += [grammar.print_word(w) for w in ordered]
            return EnumBasisResponse(lines=lines, count=len(ordered))

        return run(handler)

    @app.post("/mul-rb", response_model=PolyResponse)
    def mul_rb(req: MulRbRequest) -> PolyResponse:
        def handler() -> PolyResponse:
            cfg = req if req.system is not None else req.model_copy(update={"system": "rb"})
            system = build_system(cfg, [req.left, req.right])
            sig = system.signature
            u = grammar.parse_word(sig, req.left)
            v = grammar.parse_word(sig, req.right)
            result = _maybe_specialize(systems.rb_product(u, v, sig), req)
            return PolyResponse(
                lines=_poly_lines(result, system.order, sig, req.format, "mul-rb"),
                term_count=len(result.terms),
            )

        return run(handler)

    @app.post("/d-apply", response_model=PolyResponse)
    def d_apply(req: DApplyRequest) -> PolyResponse:
        def handler() -> PolyResponse:
            cfg = req if req.system is not None else req.model_copy(update={"system": "diff"})
            system = build_system(cfg, [req.word])
            sig = system.signature
            u = grammar.parse_word(sig, req.word)
            result = _maybe_specialize(systems.d_extend(u, sig), req)
            return PolyResponse(
                lines=_poly_lines(result, system.order, sig, req.format, "d-apply"),
                term_count=len(result.terms),
            )

        return run(handler)

    @app.post("/complete", response_model=CompleteResponse)
    def complete(req: CompleteRequest) -> CompleteResponse:
        def handler() -> CompleteResponse:
            if req.rules_text is None:
                raise ConfigError("completion needs rules_text")
            cfg = req.model_copy(update={"system": "rules"})
            system = build_system(cfg, [])
            sig, kind = system.signature, system.order
            start = [
                _maybe_specialize(grammar.parse_poly(sig, line), req)
                for line in _rules_lines(req.rules_text)
            ]
            rules, log = composition.complete(
                start, kind, sig, max_weight=req.max_weight, max_rounds=req.max_rounds, fuel=req.fuel
            )
            fixpoint = bool(log) and log[-1].endswith("fixpoint")
            adjoined = sum(1 for line in log if "adjoined" in line)
            lines = []
            if req.format == "structured":
                lines.append(
                    f"# opalgebra-report v1 kind=complete order={kind.value}"
                    f" letters={','.join(sig.letters)} max_weight={req.max_weight}"
                    f" max_rounds={req.max_rounds}"
                )
                lines += [f"log\t{line}" for line in log]
                lines += [f"rule\t{grammar.print_poly(r, kind, sig)}" for r in rules]
            else:
                lines += log
                lines.append("rules after completion:")
                lines += [f"  {grammar.print_poly(r, kind, sig)}" for r in rules]
            return CompleteResponse(lines=lines, adjoined=adjoined, reached_fixpoint=fixpoint)

        return run(handler)

    return app


app = create_app()
