"""Command-line entry point: ``overparam {run,grid,verify,curve,plot}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict

import numpy as np

from ..objective import ConvergenceError
from ..verify import conservativity_report, quadratic_plus_linear
from .config import ConfigError, ExperimentConfig
from .data import ParseError
from .plot import emit_plot
from .runner import DEFAULT_RATES, grid_search, run_experiment
from .suite import verify_suite

OK, FAILED, USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _rates(text: str) -> list[float]:
    try:
        rates = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rate list {text!r}") from None
    if not rates or any(r <= 0 for r in rates):
        raise argparse.ArgumentTypeError("rates must be a non-empty list of positive numbers")
    return rates


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="overparam", description="Deep linear network experiments and checks.")
    ap.add_argument("--data", help="dataset root (overrides $OVERPARAM_DATA)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one configuration and write a trace")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--stem", default="run")

    grid = sub.add_parser("grid", help="learning-rate grid search")
    grid.add_argument("--config", required=True)
    grid.add_argument("--rates", type=_rates, default=list(DEFAULT_RATES))
    grid.add_argument("--out", default=None, help="directory for per-rate traces")

    ver = sub.add_parser("verify", help="run the numerical check battery")
    ver.add_argument("--report", help="also write the JSON report here")
    ver.add_argument("--quick", action="store_true", help="skip the slow checks")

    curve = sub.add_parser("curve", help="loop integral of the depth-induced field")
    curve.add_argument("--n", type=int, required=True)
    curve.add_argument("--r", type=float, default=None)
    curve.add_argument("--R", type=float, default=0.1)
    curve.add_argument("--dim", type=int, default=3)
    curve.add_argument("--m", type=int, default=2**14)

    plot = sub.add_parser("plot", help="render traces to SVG")
    plot.add_argument("--out", required=True)
    plot.add_argument("traces", nargs="+")
    return ap


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=float))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.cmd == "run":
            cfg = ExperimentConfig.from_json(args.config)
            res = run_experiment(cfg, args.out, args.stem, data_root=args.data)
            _print_json({"status": res.status, "iters_to_threshold": res.iters_to_threshold,
                         "loss_star": res.loss_star, "final_loss": float(res.loss[-1])})
            return FAILED if res.diverged else OK
        if args.cmd == "grid":
            cfg = ExperimentConfig.from_json(args.config)
            res = grid_search(cfg, args.rates, args.out, data_root=args.data)
            _print_json({"best_rate": res.best_rate, "table": res.table()})
            return OK if res.best_rate is not None else FAILED
        if args.cmd == "verify":
            report = verify_suite(include_slow=not args.quick)
            for c in report["checks"]:
                print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['measured']} ({c['tolerance']})")
            if args.report:
                with open(args.report, "w", encoding="utf-8") as fh:
                    json.dump(report, fh, indent=2, default=float)
            return OK if report["passed"] else FAILED
        if args.cmd == "curve":
            if args.dim < 2:
                raise ConfigError("--dim must be >= 2")
            u = np.zeros(args.dim)
            u[0] = 1.0
            rep = conservativity_report(quadratic_plus_linear(u), args.n, args.r, args.R, args.m, args.dim)
            _print_json(asdict(rep))
            return OK
        if args.cmd == "plot":
            print(emit_plot(args.traces, args.out))
            return OK
    except (ConfigError, ParseError, FileNotFoundError) as exc:
        print(f"overparam: {exc}", file=sys.stderr)
        return USAGE
    except (ValueError, OSError, ConvergenceError) as exc:
        print(f"overparam: {exc}", file=sys.stderr)
        return FAILED
    return USAGE


if __name__ == "__main__":
    sys.exit(main())
