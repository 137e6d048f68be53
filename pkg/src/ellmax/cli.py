"""Command-line entry point.

Subcommands::

    ellmax verify                      run the invariant suite
    ellmax study  --config study.json  convergence study report
    ellmax tail   --beta 2 1           marginal tail diagnostics
    ellmax sample --config study.json  Monte Carlo estimates only

Exit status is 0 on success, 1 when a numeric check fails and 2 for
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from pathlib import Path

from .invariants import run_invariant_suite
from .norming import build_sequence, solve_a_n
from .oracle import McConfig, sample_maxima
from .radial import (
    beta_radius,
    g_tail_ratio_expansion,
    lemma2_expansion,
    lemma2_expectation_exact,
    marginal_g_tail_berman,
)
from .specfun import QuadratureError
from .study import (
    ConfigError,
    StudyConfig,
    emit_report,
    load_config,
    run_convergence_study,
)

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

TAIL_T = (1e2, 1e3, 1e4, 1e5)
TAIL_X_ABS = (0.5, 2.0)
TAIL_N = (10**3, 10**4, 10**5)
TAIL_Q = ((0.5, 0.5), (2.0, 3.0))


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ellmax", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON study configuration")
    common.add_argument("--output", metavar="PATH", help="write the table here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), help="table format (default: config or csv)")
    common.add_argument("--seed", type=_u64, metavar="U64", help="override the Monte Carlo seed")
    common.add_argument("--workers", type=_positive_int, default=1, metavar="N", help="worker threads")

    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    sub.add_parser("study", parents=[common], help="run a convergence study")
    tail = sub.add_parser("tail", parents=[common], help="marginal tail and expectation diagnostics")
    tail.add_argument("--beta", nargs=2, type=float, metavar=("A", "B"), help="use a Beta(A, B) radius")
    sub.add_parser("sample", parents=[common], help="Monte Carlo estimates of the maxima df")
    return parser


def _with_seed(cfg: StudyConfig, seed):
    if seed is None or cfg.mc is None:
        return cfg
    return dataclasses.replace(cfg, mc=dataclasses.replace(cfg.mc, seed=seed))


def _write(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _table(columns, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"columns": list(columns), "rows": [dict(zip(columns, r)) for r in rows]}, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow(["" if v is None else repr(float(v)) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _require_config(args) -> StudyConfig:
    if args.config is None:
        raise ConfigError(f"config: --config is required for {args.command}")
    return _with_seed(load_config(args.config), args.seed)


def _cmd_verify(args) -> int:
    report = run_invariant_suite()
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_NUMERIC


def _cmd_study(args) -> int:
    cfg = _require_config(args)
    report = run_convergence_study(cfg, workers=args.workers)
    fmt = args.format or cfg.output_format
    _write(emit_report(report, fmt), args.output or cfg.output_path)
    for s in report.summary:
        status = "PASS" if s.passed else "FAIL"
        print(f"{status}  ({s.x!r}, {s.y!r}) {s.regime}: final ratio {s.final_ratio}, monotone {s.monotone}",
              file=sys.stderr)
    for err in report.errors:
        print(f"error  {err}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_NUMERIC


def _tail_rows(model):
    ratios = []
    for xa in TAIL_X_ABS:
        for t in TAIL_T:
            num = marginal_g_tail_berman(model, 1 / (t * xa)) / marginal_g_tail_berman(model, 1 / t)
            pred = g_tail_ratio_expansion(model, t, xa)
            ratios.append(("ratio", xa, t, num, pred, abs(num - pred) / (1 / t + abs(model.aux(t)))))
    mixtures = []
    for qa, qb in TAIL_Q:
        for n in TAIL_N:
            a_n = solve_a_n(model, n)
            ex = lemma2_expectation_exact(model, qa, qb, n, -1.0, a_n=a_n)
            ap = lemma2_expansion(model, qa, qb, n, -1.0, a_n=a_n)
            mixtures.append((f"expectation({qa:g},{qb:g})", -1.0, float(n), ex, ap,
                           abs(ex - ap) / ex / (a_n + abs(model.aux(1 / a_n)))))
    return ratios + mixtures


def _cmd_tail(args) -> int:
    if args.beta is not None:
        a, b = args.beta
        if not (a > 0 and b > 0):
            raise ConfigError("--beta: parameters must be positive")
        model, fmt, path = beta_radius(a, b), args.format or "csv", args.output
    else:
        cfg = _require_config(args)
        model, fmt, path = cfg.model, args.format or cfg.output_format, args.output or cfg.output_path
    rows = _tail_rows(model)
    _write(_table(("quantity", "x", "scale", "numeric", "expansion", "normalized_residual"), rows, fmt), path)
    return EXIT_OK if all(math.isfinite(r[-1]) for r in rows) else EXIT_NUMERIC


def _cmd_sample(args) -> int:
    cfg = _require_config(args)
    if cfg.mc is None:
        raise ConfigError("mc: the sample command needs an mc section")
    mc: McConfig = cfg.mc
    lam = None
    rows = []
    for n in cfg.n_schedule:
        a_n = solve_a_n(cfg.model, n, cfg.quadrature)
        if lam is None:
            lam = build_sequence(cfg.model, cfg.rho, n, cfg.quadrature).lam
        points = [gp.resolve(lam) for gp in cfg.grid]
        res = sample_maxima(cfg.model, cfg.rho, n, mc, points, args.workers, cfg.quadrature, a_n=a_n)
        for (x, y), est, se, cnt in zip(points, res.estimates, res.std_errors, res.counts):
            rows.append((n, float(x), float(y), float(est), float(se), int(cnt), mc.replications))
    cols = ("n", "x", "y", "mc_estimate", "mc_se", "count", "replications")
    _write(_table(cols, rows, args.format or cfg.output_format), args.output or cfg.output_path)
    return EXIT_OK


_COMMANDS = {"verify": _cmd_verify, "study": _cmd_study, "tail": _cmd_tail, "sample": _cmd_sample}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, ArithmeticError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
