"""Command-line driver.

Every subcommand is a thin client of the HTTP service: it assembles a
request, posts it (in-process by default, to --server when given), prints
the returned lines, and maps the outcome to an exit code.  Exit 0 means
success, 1 an operational error such as a parse or configuration problem,
and 2 means a basis check found failing compositions.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opalgebra",
        description="free operated algebras: rewriting, compositions, basis checks",
    )
    parser.add_argument(
        "--server",
        metavar="URL",
        help="send requests to a running service instead of computing in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def config_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--system", default=None, help="rb | diff | diff-t | drb | file:PATH")
        p.add_argument("--letters", default=None, help="comma-separated letters, e.g. x,y,z")
        p.add_argument(
            "--operators",
            default=None,
            help="comma-separated name:arity pairs for file systems, e.g. P:1,D:1",
        )
        p.add_argument("--order", default=None, choices=["o1", "o2", "o3", "deglex"])
        p.add_argument("--fuel", type=int, default=None, help="rewrite step budget")
        p.add_argument(
            "--lambda",
            dest="lambda_value",
            default=None,
            metavar="Q",
            help="specialize the weight parameter to an exact rational",
        )
        p.add_argument("--format", default=None, choices=["text", "structured"])

    p = sub.add_parser("nf", help="normal form of a polynomial")
    p.add_argument("poly")
    p.add_argument("--trace", action="store_true", help="print the reduction trace")
    config_args(p)

    p = sub.add_parser("compose", help="list compositions up to the bounds")
    p.add_argument("--max-weight", type=int, default=2)
    p.add_argument("--max-context", type=int, default=2)
    config_args(p)

    p = sub.add_parser("check-gsb", help="check triviality of all compositions")
    p.add_argument("--max-weight", type=int, default=2)
    p.add_argument("--max-context", type=int, default=2)
    config_args(p)

    p = sub.add_parser("enum-basis", help="list basis words up to a weight bound")
    p.add_argument("--family", required=True, choices=["phi", "domega", "phidomega", "irr"])
    p.add_argument("--max-weight", type=int, default=2)
    config_args(p)

    p = sub.add_parser("mul-rb", help="product of two basis words in the free Rota-Baxter algebra")
    p.add_argument("left")
    p.add_argument("right")
    config_args(p)

    p = sub.add_parser("d-apply", help="apply the derivation to a word")
    p.add_argument("word")
    config_args(p)

    p = sub.add_parser("order-cmp", help="compare two words under an order")
    p.add_argument("left")
    p.add_argument("right")
    config_args(p)

    p = sub.add_parser("complete", help="bounded completion of a rule file")
    p.add_argument("--rules", required=True, metavar="FILE")
    p.add_argument("--max-weight", type=int, default=6)
    p.add_argument("--max-rounds", type=int, default=4)
    config_args(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _config_payload(args: argparse.Namespace) -> dict:
    payload: dict = {}
    system = args.system
    if system is not None and system.startswith("file:"):
        path = system[len("file:") :]
        try:
            with open(path, encoding="utf-8") as fh:
                payload["rules_text"] = fh.read()
        except OSError as e:
            raise _CliError(f"cannot read rule file {path}: {e.strerror}") from e
        system = "rules"
    if system is not None:
        payload["system"] = system
    if args.letters is not None:
        letters = [s for s in args.letters.split(",") if s]
        if not letters:
            raise _CliError("--letters must name at least one letter")
        payload["letters"] = letters
    if args.operators is not None:
        ops = []
        for part in args.operators.split(","):
            name, sep, arity = part.partition(":")
            if not sep or not name or not arity.isdigit():
                raise _CliError(f"bad --operators entry {part!r}, expected name:arity")
            ops.append([name, int(arity)])
        payload["operators"] = ops
    for field in ("order", "fuel", "lambda_value", "format"):
        value = getattr(args, field)
        if value is not None:
            payload[field] = value
    return payload


class _CliError(Exception):
    pass


class _Client:
    """Minimal post-a-JSON-body client over either transport."""

    def __init__(self, server: Optional[str]):
        if server is None:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .api import app

            self._client = TestClient(app, raise_server_exceptions=False)
        else:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        try:
            r = self._client.post(path, json=payload)
        except Exception as e:
            raise _CliError(f"request failed: {e}") from e
        try:
            body = r.json()
        except ValueError:
            body = {"detail": r.text}
        return r.status_code, body


def _describe_error(status: int, body: dict) -> str:
    detail = body.get("detail", body)
    if isinstance(detail, list):
        parts = []
        for item in detail:
            loc = ".".join(str(x) for x in item.get("loc", []) if x != "body")
            parts.append(f"{loc}: {item.get('msg', item)}" if loc else str(item.get("msg", item)))
        detail = "; ".join(parts)
    return f"error ({status}): {detail}"


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; 2 is reserved for failed checks
        return 0 if e.code == 0 else 1

    if args.command == "serve":
        import uvicorn

        from .api import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        payload = _config_payload(args)
        if args.command == "nf":
            payload.update(poly=args.poly, trace=args.trace)
            path = "/nf"
        elif args.command == "compose":
            payload.update(max_weight=args.max_weight, max_context=args.max_context)
            path = "/compose"
        elif args.command == "check-gsb":
            payload.update(max_weight=args.max_weight, max_context=args.max_context)
            path = "/check-gsb"
        elif args.command == "enum-basis":
            payload.update(family=args.family, max_weight=args.max_weight)
            path = "/enum-basis"
        elif args.command == "mul-rb":
            payload.update(left=args.left, right=args.right)
            path = "/mul-rb"
        elif args.command == "d-apply":
            payload.update(word=args.word)
            path = "/d-apply"
        elif args.command == "order-cmp":
            payload.update(left=args.left, right=args.right)
            path = "/order-cmp"
        else:
            try:
                with open(args.rules, encoding="utf-8") as fh:
                    payload["rules_text"] = fh.read()
            except OSError as e:
                raise _CliError(f"cannot read rule file {args.rules}: {e.strerror}") from e
            payload.update(system="rules", max_weight=args.max_weight, max_rounds=args.max_rounds)
            path = "/complete"

        status, body = _Client(args.server).post(path, payload)
    except _CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    if status != 200:
        print(_describe_error(status, body), file=sys.stderr)
        return 1

    for line in body.get("lines", []):
        print(line)
    if args.command == "check-gsb" and body.get("failures", 0) > 0:
        return 2
    return 0


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
