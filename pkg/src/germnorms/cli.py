"""Command line driver.

Commands: norm, seminorm, delta, verify, decompose, growth.  Reports are
emitted as JSON (default) or CSV to stdout or --output.  Exit codes: 0 ok,
2 malformed input, 3 shape violation, 4 a mathematical check failed (weight
bound or inclusion), which the construction guarantees cannot happen and
therefore signals a bug.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from typing import Any

from .construction import (
    build_delta,
    decompose,
    eps_from_expression,
    verify_weight_bound,
)
from .errors import FormatError, ShapeError
from .families import (
    GERM_KINDS,
    SCALAR_KINDS,
    FamilySpec,
    binomial_power_monomials,
    default_grid,
    generate,
    polynomial_monomials_1d,
)
from .germspace import CompactGrid, TruncatedElement, load_element
from .norms import WeightSequence, classify_growth, growth_rates, step_norm, weighted_seminorm
from .sampling import run_inclusion_suite

EXIT_OK = 0
EXIT_FORMAT = 2
EXIT_SHAPE = 3
EXIT_FALSIFIED = 4


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_text(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_params(text: str) -> dict[str, Any]:
    """Parse 'a=2;coeffs=1,0,1' style parameter strings."""
    out: dict[str, Any] = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise FormatError(f"bad parameter {part!r}, expected key=value")
        key, raw = part.split("=", 1)
        try:
            nums = [float(tok) for tok in raw.split(",")]
        except ValueError:
            raise FormatError(f"parameter {key.strip()!r} has non-numeric value {raw!r}") from None
        out[key.strip()] = nums[0] if len(nums) == 1 else nums
    return out


def _parse_grid(text: str | None, dim: int) -> CompactGrid:
    if text is None:
        return default_grid(dim)
    try:
        if dim == 1 and ";" not in text:
            pts = tuple((float(tok),) for tok in text.split(","))
        else:
            pts = tuple(
                tuple(float(tok) for tok in chunk.split(","))
                for chunk in text.split(";")
                if chunk.strip()
            )
        return CompactGrid(dim, pts, label="cli")
    except ValueError as exc:
        raise FormatError(f"bad grid {text!r}: {exc}") from None


def _family_spec(args: argparse.Namespace) -> FamilySpec:
    params = _parse_params(args.params or "")
    kind = args.family
    grid = _parse_grid(args.grid, args.dim) if kind in GERM_KINDS else None
    if kind in SCALAR_KINDS and args.grid is not None:
        raise FormatError(f"family {kind!r} is scalar and takes no --grid")
    if kind == "polynomial":
        if "coeffs" in params:
            if args.dim != 1:
                raise FormatError("polynomial 'coeffs' parameter is for --dim 1")
            raw = params["coeffs"]
            coeffs = raw if isinstance(raw, list) else [raw]
            params = {"monomials": polynomial_monomials_1d(coeffs)}
        elif "degree" in params:
            params = {"monomials": binomial_power_monomials(args.dim, int(params["degree"]))}
        else:
            raise FormatError("polynomial family needs 'coeffs=...' or 'degree=...'")
    return FamilySpec(kind, args.dim, args.order_cap, params, grid)


def _resolve_element(args: argparse.Namespace) -> tuple[TruncatedElement, dict | None]:
    if args.input and args.family:
        raise FormatError("give an element file or --family, not both")
    if args.input:
        return load_element(args.input), None
    if not args.family:
        raise FormatError("need an element file argument or --family")
    spec = _family_spec(args)
    return generate(spec), spec.provenance()


def _resolve_weights(args: argparse.Namespace, order_cap: int) -> tuple[WeightSequence, dict]:
    if getattr(args, "deltas", None):
        try:
            vals = [float(tok) for tok in args.deltas.split(",")]
        except ValueError:
            raise FormatError(f"bad delta list {args.deltas!r}") from None
        ws = WeightSequence.from_values([1.0] + vals)
        return ws, {"source": "list", "deltas": vals}
    if not args.eps:
        raise FormatError("need --eps or --deltas to define the weights")
    ds = build_delta(
        eps_from_expression(args.eps, order_cap), order_cap, args.margin
    )
    return ds.weights(), {"source": "eps", "eps": args.eps, "jumps": list(ds.jumps)}


def _alpha_cell(alpha: tuple[int, ...]) -> str:
    return " ".join(str(a) for a in alpha)


def _element_header(e: TruncatedElement, provenance: dict | None) -> dict[str, Any]:
    head: dict[str, Any] = {"dim": e.dim, "order_cap": e.order_cap, "mode": e.mode}
    if provenance is not None:
        head["family"] = provenance
    return head


def cmd_norm(args: argparse.Namespace) -> int:
    e, prov = _resolve_element(args)
    report = step_norm(e, args.k)
    if e.order_cap >= 1:
        _, flags = classify_growth(e, min(5, e.order_cap), ks=[args.k])
        report = dataclasses.replace(report, heuristic_finite=flags)
    if args.format == "csv":
        d = report.to_dict()
        _emit(args, _csv_text(
            ["log_value", "magnitude", "argmax_alpha", "argmax_point"],
            [[d["log_value"], d["magnitude"], _alpha_cell(report.argmax_alpha), d["argmax_point"]]],
        ))
    else:
        _emit(args, _json_text({
            "command": "norm",
            "k": args.k,
            "element": _element_header(e, prov),
            "report": report.to_dict(),
        }))
    return EXIT_OK


def cmd_seminorm(args: argparse.Namespace) -> int:
    e, prov = _resolve_element(args)
    ws, wmeta = _resolve_weights(args, e.order_cap)
    report = weighted_seminorm(e, ws)
    if args.format == "csv":
        d = report.to_dict()
        _emit(args, _csv_text(
            ["log_value", "magnitude", "argmax_alpha", "argmax_point"],
            [[d["log_value"], d["magnitude"], _alpha_cell(report.argmax_alpha), d["argmax_point"]]],
        ))
    else:
        _emit(args, _json_text({
            "command": "seminorm",
            "weights": wmeta,
            "element": _element_header(e, prov),
            "report": report.to_dict(),
        }))
    return EXIT_OK


def cmd_delta(args: argparse.Namespace) -> int:
    ds = build_delta(eps_from_expression(args.eps, args.N), args.N, args.margin)
    wb = verify_weight_bound(ds)
    if args.format == "csv":
        margins = {int(r["n"]): r["margin"] for r in wb.to_dict()["margins"]}
        rows = [
            [n, k, repr(d), repr(ld), repr(margins[n])]
            for n, k, d, ld in ds.rows()
        ]
        _emit(args, _csv_text(["n", "k", "delta_n", "log_delta_n", "margin"], rows))
    else:
        _emit(args, _json_text({
            "command": "delta",
            "system": ds.to_dict(),
            "weight_bound": wb.to_dict(),
        }))
    return EXIT_OK if wb.passed else EXIT_FALSIFIED


def cmd_verify(args: argparse.Namespace) -> int:
    if args.samples < 1:
        raise FormatError(f"--samples must be >= 1, got {args.samples}")
    ds = build_delta(eps_from_expression(args.eps, args.N), args.N, args.margin)
    result = run_inclusion_suite(
        ds, args.dim, args.samples, args.seed, mode=args.mode, grid_count=args.points
    )
    if args.format == "csv":
        _emit(args, _csv_text(
            ["samples", "passes", "passed", "worst_margin", "shell0_separate_count"],
            [[result.samples, result.passes, result.passed,
              repr(result.worst_margin), result.shell0_separate_count]],
        ))
    else:
        _emit(args, _json_text({"command": "verify", **result.to_dict()}))
    return EXIT_OK if result.passed else EXIT_FALSIFIED


def cmd_decompose(args: argparse.Namespace) -> int:
    e, prov = _resolve_element(args)
    if e.order_cap < 1:
        raise ShapeError("decomposition needs an element with order cap >= 1")
    ds = build_delta(eps_from_expression(args.eps, e.order_cap), e.order_cap, args.margin)
    dec = decompose(e, ds)
    exact = dec.reconstruct().equals(e)
    if args.format == "csv":
        rows = [
            [b.k, b.lo, b.hi, repr(b.log_norm), repr(b.log_bound), repr(b.margin)]
            for b in dec.blocks
        ]
        _emit(args, _csv_text(["k", "lo", "hi", "log_norm", "log_bound", "margin"], rows))
    else:
        s = weighted_seminorm(e, ds.weights()).log_value
        _emit(args, _json_text({
            "command": "decompose",
            "element": _element_header(e, prov),
            "jumps": list(ds.jumps),
            "seminorm_log": s if math.isfinite(s) else None,
            "reconstruction_exact": exact,
            "decomposition": dec.to_dict(),
        }))
    return EXIT_OK


def cmd_growth(args: argparse.Namespace) -> int:
    e, prov = _resolve_element(args)
    if e.order_cap < 1:
        raise ShapeError("growth diagnostics need an element with order cap >= 1")
    window = args.window if args.window is not None else min(5, e.order_cap)
    estimate, flags = classify_growth(e, window, ks=range(1, args.kmax + 1))
    rates = growth_rates(e)
    if args.format == "csv":
        rows = [[n + 1, repr(float(s))] for n, s in enumerate(rates)]
        _emit(args, _csv_text(["n", "s_n"], rows))
    else:
        _emit(args, _json_text({
            "command": "growth",
            "element": _element_header(e, prov),
            "window": window,
            "estimate": estimate if math.isfinite(estimate) else None,
            "heuristic_finite": {str(k): v for k, v in sorted(flags.items())},
            "rates": [[n + 1, float(s) if math.isfinite(s) else None]
                      for n, s in enumerate(rates)],
        }))
    return EXIT_OK


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", help="write the report to this path instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--seed", type=int, default=0, help="master seed for randomized runs")


def _add_element_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", help="element JSON file")
    p.add_argument("--family", choices=list(GERM_KINDS + SCALAR_KINDS))
    p.add_argument("--params", default="", help="family parameters, e.g. 'a=2' or 'coeffs=1,0,1'")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--N", type=int, default=20, dest="order_cap", help="truncation order cap")
    p.add_argument("--grid", default=None,
                   help="grid points, e.g. '0,0.5,1' (1-d) or '0,0;1,1'; default unit-cube tensor grid")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="germnorms",
        description="Weighted sup-norms, null-weight seminorms, and certified block decompositions "
                    "for truncated coefficient families.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="step norm of an element")
    _add_element_flags(p)
    p.add_argument("--k", type=int, required=True, help="step index (growth rate), >= 1")
    _add_output_flags(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("seminorm", help="weighted seminorm of an element")
    _add_element_flags(p)
    p.add_argument("--eps", help="budget expression used to build the weights")
    p.add_argument("--deltas", help="explicit weight list delta_1,...,delta_N")
    p.add_argument("--margin", type=int, default=0, help="extra slack added to every jump")
    _add_output_flags(p)
    p.set_defaults(func=cmd_seminorm)

    p = sub.add_parser("delta", help="build the weight table from budgets and check its bound")
    p.add_argument("--eps", required=True, help="budget expression: comma list or 1, 1/k, 1/k^2, 2^-k, 10^-k")
    p.add_argument("--N", type=int, required=True, help="order cap")
    p.add_argument("--margin", type=int, default=0)
    _add_output_flags(p)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("verify", help="randomized inclusion check of unit-seminorm elements")
    p.add_argument("--eps", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--margin", type=int, default=0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--mode", choices=["scalar", "germ"], default="scalar")
    p.add_argument("--points", type=int, default=3, help="grid size per sample in germ mode")
    _add_output_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("decompose", help="split an element into certified blocks")
    _add_element_flags(p)
    p.add_argument("--eps", required=True)
    p.add_argument("--margin", type=int, default=0)
    _add_output_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("growth", help="per-order growth rates and step membership guesses")
    _add_element_flags(p)
    p.add_argument("--window", type=int, default=None, help="trailing shells used for the estimate")
    p.add_argument("--kmax", type=int, default=8, help="largest step index to guess about")
    _add_output_flags(p)
    p.set_defaults(func=cmd_growth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE


def entry() -> None:
    raise SystemExit(main())
