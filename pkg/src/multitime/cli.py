"""Command-line front end: single runs, run pairs, parameter sweeps, and
the invariant suite, with machine-readable JSON/CSV output.

Exit codes: 0 success, 1 invariant/verification failure, 2 usage or
configuration error.  All numbers are emitted at full double precision
(shortest round-trip form), so reports reparse to the exact values.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, verify
from .analysis import run_sweep
from .ledger import total_costs
from .protocols import (
    ONE_WAY_TOTAL,
    TWO_WAY_TOTAL,
    PairOutcome,
    ProtocolConfig,
    ProtocolKind,
    RunOutcome,
    Schedule,
    run,
    run_pair,
)
from .states import InvariantViolation, StateVector

_MAX_REPORTED_BLOCK = 1024

SWEEP_HEADER = "protocol,M,N,lambda,K,Khat,Q,Q_formula,rel_err,dG01_re,dG01_im,bound_slack,regime_ok"


def _c(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _matrix2(g: np.ndarray) -> list[list[list[float]]]:
    return [[_c(g[i, j]) for j in range(2)] for i in range(2)]


def _weights(state: StateVector) -> dict[str, float]:
    out = {}
    for label, _ in state.partition.blocks:
        block = state.block(label)
        out[label] = float((block.real ** 2 + block.imag ** 2).sum())
    return out


def _state_summary(state: StateVector) -> dict:
    amplitudes = {}
    for label, dim in state.partition.blocks:
        if dim <= _MAX_REPORTED_BLOCK:
            amplitudes[label] = [_c(a) for a in state.block(label)]
    return {"weights": _weights(state), "amplitudes": amplitudes}


def _trace_summary(outcome: RunOutcome) -> list[dict] | None:
    if outcome.trace is None:
        return None
    rows = []
    for tag, state in outcome.trace:
        if state.partition.total_dim <= 256:
            rows.append({"tag": tag, "amplitudes": [_c(a) for a in state.amps]})
        else:
            rows.append({"tag": tag, "weights": _weights(state)})
    return rows


def _config_echo(args) -> dict:
    echo = {"protocol": args.protocol}
    for key in ("bit", "rounds", "outer"):
        if hasattr(args, key):
            echo[key] = getattr(args, key)
    echo["schedule"] = list(args.schedule_values) if getattr(args, "schedule_values", None) else None
    echo["trace"] = bool(getattr(args, "trace", False))
    return echo


def _run_report(outcome: RunOutcome, args) -> dict:
    k, khat, q = total_costs(outcome.ledger)
    report = {
        "tool": "multitime",
        "version": __version__,
        "command": "run",
        "config": _config_echo(args),
        "costs": {"K": k, "Khat": khat, "Q": q},
        "final_state": _state_summary(outcome.final_state),
        "diagnostics": dict(outcome.diagnostics),
        "warnings": list(outcome.warnings),
    }
    trace = _trace_summary(outcome)
    if trace is not None:
        report["trace"] = trace
    return report


def _pair_report(pair: PairOutcome, args) -> dict:
    runs = []
    for bit, outcome in ((0, pair.run0), (1, pair.run1)):
        k, khat, q = total_costs(outcome.ledger)
        runs.append({
            "bit": bit,
            "costs": {"K": k, "Khat": khat, "Q": q},
            "final_state": _state_summary(outcome.final_state),
            "diagnostics": dict(outcome.diagnostics),
        })
    gram = {
        "blocks": {label: _matrix2(g) for label, g in sorted(pair.gram.blocks.items())},
        "totals": _matrix2(pair.gram.totals),
        "deltas": {label: _matrix2(g) for label, g in sorted(pair.gram.deltas.items())},
    }
    bound = {
        "ok": pair.bound.ok,
        "checks": [
            {"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "slack": c.slack,
             "tol": c.tol, "passed": c.passed}
            for c in pair.bound.checks
        ],
    }
    warnings = sorted(set(pair.run0.warnings) | set(pair.run1.warnings))
    return {
        "tool": "multitime",
        "version": __version__,
        "command": "pair",
        "config": _config_echo(args),
        "runs": runs,
        "delta_g01": {"states": _c(pair.delta_g01_states),
                      "ledger": _c(pair.delta_g01_ledger)},
        "gram": gram,
        "bound": bound,
        "warnings": warnings,
    }


def _flatten(obj, prefix="") -> list[tuple[str, str]]:
    rows = []
    if isinstance(obj, dict):
        for key, value in obj.items():
            rows.extend(_flatten(value, f"{prefix}.{key}" if prefix else str(key)))
    elif isinstance(obj, (list, tuple)):
        for i, value in enumerate(obj):
            rows.extend(_flatten(value, f"{prefix}[{i}]"))
    else:
        rows.append((prefix, repr(obj) if isinstance(obj, float) else str(obj)))
    return rows


def _emit(report: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2))
    else:
        for key, value in _flatten(report):
            print(f"{key},{value}")


def _load_schedule(args) -> None:
    args.schedule_values = None
    args.schedule_obj = None
    path = getattr(args, "schedule", None)
    if path is None:
        return
    kind = ProtocolKind(args.protocol)
    if kind not in (ProtocolKind.ONE_WAY, ProtocolKind.SIMPLE):
        raise ValueError(f"--schedule is not supported for protocol {kind.value}")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValueError(f"cannot read schedule file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"schedule file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, list) or not all(isinstance(x, (int, float)) for x in data):
        raise ValueError("schedule file must hold a JSON array of numbers")
    total = ONE_WAY_TOTAL if kind is ProtocolKind.ONE_WAY else TWO_WAY_TOTAL
    args.schedule_obj = Schedule(data, total)  # raises naming the violated constraint
    args.schedule_values = [float(x) for x in data]
    args.rounds = args.schedule_obj.rounds


def _make_config(args, need_bit: bool) -> ProtocolConfig:
    _load_schedule(args)
    return ProtocolConfig(
        kind=ProtocolKind(args.protocol),
        bit=args.bit if need_bit else None,
        rounds=args.rounds,
        outer=args.outer,
        schedule=args.schedule_obj,
        record_trace=bool(getattr(args, "trace", False)),
    )


def cmd_run(args) -> int:
    outcome = run(_make_config(args, need_bit=True))
    _emit(_run_report(outcome, args), args.format)
    return 0


def cmd_pair(args) -> int:
    pair = run_pair(_make_config(args, need_bit=False))
    _emit(_pair_report(pair, args), args.format)
    return 0


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"{flag} must be a comma-separated list of integers: {exc}") from exc
    if not values:
        raise ValueError(f"{flag} must not be empty")
    if any(v < 1 for v in values):
        raise ValueError(f"{flag} entries must be >= 1")
    return values


def cmd_sweep(args) -> int:
    outers = _parse_int_list(args.outer_list, "--outer-list")
    inners = _parse_int_list(args.rounds_list, "--rounds-list")
    if args.grid == "zip":
        if len(outers) != len(inners):
            raise ValueError("--grid zip needs --outer-list and --rounds-list of equal length")
        grid = list(zip(outers, inners))
    else:
        grid = [(m, n) for m in outers for n in inners]
    records = run_sweep(grid)
    lines = [SWEEP_HEADER]
    for r in records:
        lines.append(",".join([
            r.protocol, str(r.outer), str(r.inner), str(r.bit),
            repr(r.k), repr(r.khat), repr(r.q), repr(r.q_formula), repr(r.rel_err),
            repr(r.delta_g01.real), repr(r.delta_g01.imag), repr(r.bound_slack),
            "true" if r.regime_ok else "false",
        ]))
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValueError(f"cannot write {args.out}: {exc}") from exc
        print(f"wrote {len(records)} rows to {args.out}")
    return 0


def cmd_verify(args) -> int:
    results = verify.run_checks(seed=args.seed, inject_fault=args.inject_fault)
    failed = [r for r in results if not r.ok]
    for r in results:
        print(r.line())
    print(f"{len(results) - len(failed)}/{len(results)} checks passed (seed {args.seed})")
    return 1 if failed else 0


def _add_protocol_flags(p: argparse.ArgumentParser, with_bit: bool) -> None:
    p.add_argument("--protocol", required=True,
                   choices=[k.value for k in ProtocolKind])
    if with_bit:
        p.add_argument("--lambda", dest="bit", type=int, choices=(0, 1), required=True,
                       help="classical bit Bob transmits")
    p.add_argument("--rounds", type=int, default=1,
                   help="round count N (inner rounds for slaz)")
    p.add_argument("--outer", type=int, default=1, help="outer round count M (slaz only)")
    p.add_argument("--schedule", help="JSON file with per-round weight increments")
    p.add_argument("--trace", action="store_true", help="record round-boundary snapshots")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multitime",
        description="Simulate two-party multitime channel protocols and verify "
                    "their Cost and Gram-matrix accounting.",
    )
    parser.add_argument("--version", action="version", version=f"multitime {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one protocol run")
    _add_protocol_flags(p_run, with_bit=True)
    p_run.set_defaults(func=cmd_run)

    p_pair = sub.add_parser("pair", help="run both bits and compare")
    _add_protocol_flags(p_pair, with_bit=False)
    p_pair.set_defaults(func=cmd_pair)

    p_sweep = sub.add_parser("sweep", help="sweep the hierarchical protocol over a grid")
    p_sweep.add_argument("--outer-list", required=True, help="comma-separated M values")
    p_sweep.add_argument("--rounds-list", required=True, help="comma-separated N values")
    p_sweep.add_argument("--grid", choices=("zip", "cross"), default="zip")
    p_sweep.add_argument("--out", default="-", help="CSV output path (default stdout)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the invariant suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--inject-fault", choices=verify.FAULTS, default=None,
                          help="deliberately corrupt one step (suite must catch it)")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
