"""Command-line driver for the verification suites.

Reports go to --out (or stdout) as CSV or JSON.  The bytes depend only on the
configuration and seed; timings are printed to stderr.

Exit codes: 0 pass, 1 identity failure, 2 bracket failure, 64 bad configuration.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time

from .maximal import HypothesisError
from .suites import (
    SuiteConfig,
    VerificationReport,
    run_atom_suite,
    run_counterexample_suite,
    run_cr_suite,
    run_equivalence_suite,
    run_kernel_suite,
)

EXIT_OK, EXIT_IDENTITY, EXIT_BRACKET, EXIT_CONFIG = 0, 1, 2, 64
COLUMNS = ("suite", "check", "lambda", "p", "value", "lower", "upper", "status", "witness", "anchor")

SUITES = {
    "kernel": (run_kernel_suite,),
    "cr": (run_cr_suite,),
    "equiv": (run_equivalence_suite, run_atom_suite),
    "counterexample": (run_counterexample_suite,),
}
SUITES["all"] = SUITES["kernel"] + SUITES["cr"] + SUITES["equiv"] + SUITES["counterexample"]


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with a bracket failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def fmt_float(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _csv_floats(text: str, name: str) -> tuple:
    try:
        vals = tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ConfigError(f"--{name} expects comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"--{name} is empty")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dunkl-verify", description="Run numerical verification suites and write a report.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUITES:
        sp = sub.add_parser(name, help=f"run the {name} suite" if name != "all" else "run every suite")
        sp.add_argument("--lambda", dest="lambdas", default="0.25,0.5,1,2", help="comma-separated lambda values")
        sp.add_argument("--p", dest="ps", default="0.9,1", help="comma-separated exponents p")
        sp.add_argument("--profile", choices=("fast", "strict"), default="strict")
        sp.add_argument("--seed", type=int, default=SuiteConfig.seed)
        sp.add_argument("--out", default=None, help="report path (default stdout)")
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        if name in ("counterexample", "all"):
            sp.add_argument("--m", type=int, default=None, help="order of the moment-vanishing bump")
    return parser


def config_from_args(args) -> SuiteConfig:
    if not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    kw = dict(
        lambdas=_csv_floats(args.lambdas, "lambda"),
        ps=_csv_floats(args.ps, "p"),
        profile=args.profile,
        seed=args.seed,
        out=args.out,
        fmt=args.fmt,
    )
    if getattr(args, "m", None) is not None:
        if args.m < 0:
            raise ConfigError("--m must be nonnegative")
        kw["m_orders"] = (args.m,)
    try:
        return SuiteConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _row(r) -> list:
    return [r.suite, r.check, fmt_float(r.lam), fmt_float(r.p), fmt_float(r.value), fmt_float(r.lower),
            fmt_float(r.upper), r.status, r.witness, r.anchor]


def _config_echo(cfg: SuiteConfig, command: str) -> dict:
    return {
        "command": command,
        "lambda": [fmt_float(v) for v in cfg.lambdas],
        "p": [fmt_float(v) for v in cfg.ps],
        "profile": cfg.profile,
        "seed": cfg.seed,
        "m": list(cfg.m_orders),
        "span_bound": fmt_float(cfg.span_bound),
        "drift_bound": fmt_float(cfg.drift_bound),
    }


def render_csv(report: VerificationReport, command: str) -> str:
    import csv

    buf = io.StringIO()
    for key, val in _config_echo(report.config, command).items():
        buf.write(f"# {key}: {val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in report.records:
        w.writerow(_row(r))
    return buf.getvalue()


def _json_number(s: str) -> str:
    # 17 significant digits as a raw token; non-finite values are not JSON numbers
    return s if s not in ("nan", "inf", "-inf") else json.dumps(s)


def render_json(report: VerificationReport, command: str) -> str:
    rows = []
    for r in report.records:
        cells = _row(r)
        parts = []
        for col, cell in zip(COLUMNS, cells):
            numeric = col in ("lambda", "p", "value", "lower", "upper")
            parts.append(f"{json.dumps(col)}: {_json_number(cell) if numeric else json.dumps(cell)}")
        rows.append("    {" + ", ".join(parts) + "}")
    head = json.dumps({"config": _config_echo(report.config, command), "exit_code": report.exit_code}, sort_keys=True)
    return head[:-1] + ', "records": [\n' + ",\n".join(rows) + "\n]}\n"


def run(command: str, cfg: SuiteConfig) -> VerificationReport:
    report = VerificationReport(command, cfg)
    for suite in SUITES[command]:
        t0 = time.perf_counter()
        part = suite(cfg)
        report.extend(part)
        print(f"[{suite.__name__}] {len(part.records)} rows in {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    return report


def write_report(report: VerificationReport, command: str) -> None:
    cfg = report.config
    text = render_csv(report, command) if cfg.fmt == "csv" else render_json(report, command)
    if cfg.out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = run(args.command, cfg)
    except (ConfigError, HypothesisError) as exc:
        print(f"dunkl-verify: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_report(report, args.command)
    for r in report.failures():
        print(f"FAIL {r.suite}/{r.check} lambda={fmt_float(r.lam)} p={fmt_float(r.p)} "
              f"value={fmt_float(r.value)} witness: {r.witness}", file=sys.stderr)
    print(f"runtime {report.runtime:.1f} s, exit {report.exit_code}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
