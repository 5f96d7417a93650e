"""Command-line front end.

Exit status is 0 on success (or a passing suite), 1 when a suite fails and 2
on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .errors import ArtifactError, ParseError
from .harness import SUITES, SuiteConfig, run_suite
from .loops import (
    CyclicWord,
    FormalSum,
    PathWord,
    adjoint_on_wedge,
    canonicalize,
    extended_bracket,
    parse_element,
    parse_word as _letters,
    turaev_cobracket,
)
from .modulispace import make_group, parse_function, quasi_bv_delta, random_point
from .surface import BUILTIN_SKELETONS, Skeleton, builtin
from .superalgebra import format_rational

DEFAULT_SEED = 0


def parse_skeleton(text: str) -> Skeleton:
    """Skeleton from its JSON description; half-edge ids must be unique."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.pos) from None
    if not isinstance(data, dict):
        raise ParseError("skeleton must be a JSON object", 0)
    seen = set()
    for v in data.get("vertices", []) or []:
        for h in v.get("halfedges", []) if isinstance(v, dict) else []:
            if h in seen:
                pos = text.find(json.dumps(h), text.find(json.dumps(h)) + 1)
                raise ParseError(f"duplicate half-edge id {h!r}", max(pos, 0))
            seen.add(h)
    return Skeleton.from_json(data)


def parse_word(text: str, sk: Skeleton, cyclic: bool = True):
    """A reduced loop class, or a path word when ``cyclic`` is false."""
    letters = _letters(text, sk)
    if cyclic:
        return canonicalize(letters, sk)
    sk.check_path(letters)
    return PathWord(letters)


def load_surface(spec: str) -> Skeleton:
    if spec in BUILTIN_SKELETONS:
        return builtin(spec)
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            return parse_skeleton(fh.read())
    raise ParseError(f"{spec!r} is neither a built-in surface nor a file", 0)


def _terms_json(x) -> list:
    out = []
    for key, c in sorted(x.items(), key=lambda kv: repr(kv[0])):
        out.append({"basis": repr(key), "coeff": format_rational(c)})
    return out


def _emit(args, text: str, payload: dict) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, ensure_ascii=False))
    else:
        print(text)


def _cmd_surface(args) -> int:
    if args.action == "new":
        sk = load_surface(args.name or args.surface)
        if args.rot2:
            rot = {}
            for item in args.rot2:
                e, _, v = item.partition("=")
                try:
                    rot[e] = int(v)
                except ValueError:
                    raise ParseError(f"bad rotation {item!r}; expected EDGE=INT", 0) from None
            sk = sk.with_rotations(rot)
        print(json.dumps(sk.to_json(), sort_keys=True, indent=None if args.json else 2))
        return 0
    sk = load_surface(args.name or args.surface)
    info = sk.validate()
    payload = {
        "boundary_components": info.boundary_components,
        "edges": info.edges,
        "genus": info.genus,
        "vertices": info.vertices,
    }
    text = "\n".join(f"{k}: {v}" for k, v in sorted(payload.items()))
    _emit(args, text, payload)
    return 0


def _is_wedge(x) -> bool:
    return any(isinstance(k, tuple) and len(k) != 1 for k in x)


def _cmd_bracket(args) -> int:
    sk = load_surface(args.surface)
    x, y = parse_element(args.x, sk), parse_element(args.y, sk)
    if _is_wedge(x):
        raise ParseError("the first argument of bracket must be a loop or H1 element")
    if _is_wedge(y):
        out = adjoint_on_wedge(sk, x, y, seed=args.seed)
    else:
        out = extended_bracket(sk, x, y, seed=args.seed)
    _emit(args, repr(out), {"result": repr(out), "terms": _terms_json(out)})
    return 0


def _cmd_cobracket(args) -> int:
    sk = load_surface(args.surface)
    x = parse_element(args.x, sk)
    if _is_wedge(x):
        raise ParseError("cobracket takes a loop or H1 element")
    # H1 classes have zero cobracket
    out = turaev_cobracket(sk, FormalSum({k: c for k, c in x.items() if isinstance(k, CyclicWord)}), seed=args.seed)
    _emit(args, repr(out), {"result": repr(out), "terms": _terms_json(out)})
    return 0


def _point(args, sk):
    group = make_group(args.group or "gl", args.n or (1 if args.group == "q" else 2))
    return random_point(sk, group, args.seed)


def _cmd_eval(args) -> int:
    sk = load_surface(args.surface)
    f = parse_function(args.function, sk)
    val = f(_point(args, sk))
    _emit(args, repr(val), {"function": str(f), "seed": args.seed, "value": val.to_json()})
    return 0


def _cmd_bvdelta(args) -> int:
    sk = load_surface(args.surface)
    if (args.group or "q") == "gl":
        raise ParseError("bvdelta needs an odd metric group (--group q)")
    args.group = args.group or "q"
    f = parse_function(args.function, sk)
    val = quasi_bv_delta(f, _point(args, sk))
    _emit(args, repr(val), {"function": str(f), "seed": args.seed, "value": val.to_json()})
    return 0


def _cmd_verify(args) -> int:
    cfg = SuiteConfig(
        args.suite,
        surface=args.surface,
        group=args.group,
        n=args.n,
        trials=args.trials,
        max_length=args.max_length,
        seed=args.seed,
    )
    report = run_suite(cfg)
    data = report.to_json()
    if not args.timing:
        # wall-clock time would break byte-identical reruns
        data["elapsed_ms"] = None
    print(json.dumps(data, sort_keys=True, ensure_ascii=False))
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", default="torus", help="built-in name (torus, pants, genus2, annulus2) or JSON file")
    common.add_argument("--group", choices=["gl", "q", "double"], default=None)
    common.add_argument("--n", type=int, default=None, help="matrix size of the group")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--trials", type=int, default=25)
    common.add_argument("--json", action="store_true", help="emit JSON")

    p = argparse.ArgumentParser(prog="artifact", description="Loops on surfaces and holonomy functions, exactly.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("surface", parents=[common], help="print or describe a skeleton")
    s.add_argument("action", choices=["new", "info"])
    s.add_argument("name", nargs="?", default=None)
    s.add_argument("--rot2", action="append", default=[], metavar="EDGE=INT", help="set twice the rotation number")
    s.set_defaults(func=_cmd_surface)

    s = sub.add_parser("bracket", parents=[common], help="Goldman bracket of two elements")
    s.add_argument("x")
    s.add_argument("y")
    s.set_defaults(func=_cmd_bracket)

    s = sub.add_parser("cobracket", parents=[common], help="Turaev cobracket of an element")
    s.add_argument("x")
    s.set_defaults(func=_cmd_cobracket)

    s = sub.add_parser("eval", parents=[common], help="evaluate a holonomy function at a random point")
    s.add_argument("function")
    s.set_defaults(func=_cmd_eval)

    s = sub.add_parser("bvdelta", parents=[common], help="quasi-BV operator of a function at a random point")
    s.add_argument("function")
    s.set_defaults(func=_cmd_bvdelta)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("suite", type=str.upper, choices=SUITES, metavar="SUITE")
    s.add_argument("--max-length", type=int, default=5)
    s.add_argument("--timing", action="store_true", help="record elapsed_ms in the report")
    s.set_defaults(func=_cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
