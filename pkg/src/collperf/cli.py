"""Command-line front end.

CSV goes to standard output, diagnostics to standard error.  Exit codes:
0 success, 2 bad arguments, 3 unreadable or malformed input file, 4 inputs
rejected by a model precondition.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings
from dataclasses import dataclass

from . import models, simulator
from .contention import ContentionModel, fit_gamma, predict_alltoall, read_measurements
from .models import ModelError, Strategy
from .params import ParamFileError, SegmentSpec, read_table
from .segment import hill_climb, optimize_segment, sweep_powers_of_two
from .selector import DEFAULT_CANDIDATES, evaluate_candidate, select

log = logging.getLogger("collperf")

EXIT_USAGE, EXIT_INPUT, EXIT_MODEL = 2, 3, 4

PREDICT_HEADER = ("family", "strategy", "P", "m", "segment", "time_s")


def fmt(x: float) -> str:
    """Nine significant digits, exponent only for very large or small values."""
    return format(x, "#.9g")


def _writer(out):
    return csv.writer(out, lineterminator="\n")


@dataclass
class SweepSpec:
    P_values: list[int]
    m_values: list[int]
    strategies: list[str]
    unit: int = 1


def int_list(text: str) -> list[int]:
    """``2,4,8`` or inclusive ranges ``2:32`` / ``2:32:2``, comma-joined."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ":" in part:
                bits = [int(b) for b in part.split(":")]
                if len(bits) not in (2, 3) or (len(bits) == 3 and bits[2] < 1):
                    raise ValueError
                step = bits[2] if len(bits) == 3 else 1
                out.extend(range(bits[0], bits[1] + 1, step))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers or ranges like 2:32, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def ladder(text: str) -> list[int]:
    """Geometric ladder ``start,factor,count``."""
    try:
        start, factor, count = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start,factor,count, got {text!r}") from None
    if start < 1 or factor < 2 or count < 1:
        raise argparse.ArgumentTypeError("ladder needs start >= 1, factor >= 2, count >= 1")
    return [start * factor ** i for i in range(count)]


def name_list(text: str) -> list[str]:
    names = [n.strip() for n in text.split(",") if n.strip()]
    if not names:
        raise argparse.ArgumentTypeError("empty strategy list")
    return names


# -- helpers -----------------------------------------------------------------

def _gamma(args) -> ContentionModel | None:
    if getattr(args, "gamma", None) is not None:
        return ContentionModel(gamma=args.gamma)
    if getattr(args, "gamma_file", None):
        table = read_table(args.params)
        return fit_gamma(table, read_measurements(args.gamma_file))
    return None


def _predict(table, strategy: Strategy, P, m, unit, segment, auto, gamma):
    if strategy.variant == "contended":
        if gamma is None:
            raise ModelError("the contended strategy needs --gamma or --gamma-file")
        return predict_alltoall(table, P, m, gamma)
    if strategy.segmented:
        if segment is not None:
            return models.evaluate(strategy, table, P, m, _segment(m, segment, unit))
        if auto:
            return evaluate_candidate(table, strategy, P, m, unit)
        raise ModelError(f"{strategy.variant} needs --segment or --auto-segment")
    if segment is not None:
        raise ModelError(f"{strategy.variant} does not take a segment size")
    return models.evaluate(strategy, table, P, m)


def _segment(m, s, unit) -> SegmentSpec:
    try:
        return SegmentSpec.for_message(m, s, unit)
    except ValueError as exc:
        raise ModelError(str(exc)) from None


def _predict_row(p):
    return (p.strategy.family, p.strategy.variant, p.P, p.m,
            p.segment.s if p.segment else "", fmt(p.time))


# -- commands ----------------------------------------------------------------

def cmd_predict(args, out) -> int:
    table = read_table(args.params)
    gamma = _gamma(args)
    strategy = Strategy.parse(args.family, args.strategy)
    p = _predict(table, strategy, args.P, args.m, args.unit, args.segment, args.auto_segment, gamma)
    w = _writer(out)
    w.writerow(PREDICT_HEADER)
    w.writerow(_predict_row(p))
    return 0


def cmd_sweep(args, out) -> int:
    table = read_table(args.params)
    gamma = _gamma(args)
    spec = SweepSpec(
        P_values=args.P,
        m_values=args.m if args.m is not None else args.m_ladder,
        strategies=args.strategies or list(DEFAULT_CANDIDATES[args.family]),
        unit=args.unit,
    )
    strategies = [Strategy.parse(args.family, s) for s in spec.strategies]
    if any(s.variant == "contended" for s in strategies) and gamma is None:
        raise ModelError("the contended strategy needs --gamma or --gamma-file")
    w = _writer(out)
    w.writerow(PREDICT_HEADER)
    rejected = 0
    for strategy in strategies:
        for P in spec.P_values:
            for m in spec.m_values:
                try:
                    segment = args.segment if strategy.segmented else None
                    p = _predict(table, strategy, P, m, spec.unit, segment, True, gamma)
                except ModelError as exc:
                    rejected += 1
                    log.warning("skipped %s P=%s m=%s: %s", strategy, P, m, exc)
                    continue
                w.writerow(_predict_row(p))
    if rejected:
        log.warning("%d sweep cell(s) rejected", rejected)
    return 0


def cmd_segment(args, out) -> int:
    table = read_table(args.params)
    strategy = Strategy.parse("broadcast", args.strategy)
    if not strategy.segmented:
        raise ModelError(f"{strategy.variant} is not a segmented model")
    model = models.MODELS[strategy]
    models.check_inputs(args.P, args.m)
    if args.method == "sweep":
        result = sweep_powers_of_two(model, table, args.P, args.m, args.unit)
    elif args.method == "hill-climb":
        if args.start is None:
            raise ModelError("--method hill-climb needs --start")
        start = _segment(args.m, args.start, args.unit)
        result = hill_climb(model, table, args.P, args.m, args.unit, start)
    else:
        result = optimize_segment(model, table, args.P, args.m, args.unit)
    w = _writer(out)
    w.writerow(("step", "s", "k", "time_s"))
    for i, (s, t) in enumerate(result.trace):
        w.writerow((i, s, -(-args.m // s), fmt(t)))
    w.writerow(("best", result.best.s, result.best.k, fmt(result.time)))
    if result.budget_exhausted:
        log.warning("hill-climb step budget exhausted; result is the best size found so far")
    return 0


def cmd_calibrate(args, out) -> int:
    table = read_table(args.params)
    model = fit_gamma(table, read_measurements(args.measurements))
    out.write(f"gamma {fmt(model.gamma)}\n")
    out.write(f"residual_s {fmt(model.fit_residual)}\n")
    out.write(f"samples {model.sample_count}\n")
    out.write(f"skipped {model.skipped}\n")
    out.write(f"in_range {'yes' if not model.out_of_range else 'no'}\n")
    for note in model.notes:
        out.write(f"note {note}\n")
    return 0


def cmd_select(args, out) -> int:
    table = read_table(args.params)
    gamma = _gamma(args)
    candidates = args.strategies
    if candidates is None and args.family == "alltoall" and gamma is None:
        candidates = ["lower_bound", "upper_bound"]
        log.warning("no contention factor given; ranking the bounds only")
    report = select(table, args.family, args.P, args.m, args.unit, candidates, gamma)
    w = _writer(out)
    w.writerow(("rank", "strategy", "segment", "time_s", "caveats"))
    for i, p in enumerate(report.ranked, start=1):
        w.writerow((i, p.strategy.variant, p.segment.s if p.segment else "",
                    fmt(p.time), "; ".join(p.notes)))
    return 0


_CLOSED_FORM = {
    ("broadcast", "flat", False): "flat",
    ("broadcast", "flat", True): "flat_segmented",
    ("broadcast", "chain", False): "chain",
    ("broadcast", "chain", True): "pipeline",
    ("broadcast", "binomial", False): "binomial",
    ("broadcast", "binomial", True): "binomial_segmented",
    ("scatter", "flat", False): "flat",
    ("scatter", "chain", False): "chain",
    ("scatter", "binomial", False): "binomial",
    ("alltoall", "serialized", False): "upper_bound",
    ("alltoall", "overlapped", False): "lower_bound",
}


def cmd_simulate(args, out) -> int:
    table = read_table(args.params)
    seg = _segment(args.m, args.segment, args.unit) if args.segment is not None else None
    if args.family == "broadcast":
        timeline = simulator.simulate_broadcast(table, args.P, args.m, args.variant, seg)
    elif seg is not None:
        raise ModelError(f"{args.family} simulation does not take a segment size")
    elif args.family == "scatter":
        timeline = simulator.simulate_scatter(table, args.P, args.m, args.variant)
    else:
        timeline = simulator.simulate_alltoall(table, args.P, args.m, args.variant)
    key = (args.family, args.variant, seg is not None)
    closed = models.evaluate(Strategy(args.family, _CLOSED_FORM[key]), table, args.P, args.m, seg)
    for line in timeline.to_lines():
        out.write(line + "\n")
    out.write(f"# completion {fmt(timeline.completion)} closed_form {fmt(closed.time)} "
              f"model {closed.strategy}\n")
    return 0


# -- parser ------------------------------------------------------------------

def _common(p, *, family=True):
    p.add_argument("--params", required=True, help="pLogP parameter file")
    if family:
        p.add_argument("--family", required=True, choices=models.FAMILIES)
    p.add_argument("--unit", type=int, default=1, help="basic datatype size in bytes")


def _gamma_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gamma", type=float, help="contention factor")
    g.add_argument("--gamma-file", help="all-to-all measurements to fit the contention factor from")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collperf", description="Predict collective communication times from pLogP parameters.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="one prediction as CSV")
    _common(p)
    p.add_argument("--strategy", required=True)
    p.add_argument("-P", type=int, required=True, help="process count")
    p.add_argument("-m", type=int, required=True, help="message size in bytes")
    seg = p.add_mutually_exclusive_group()
    seg.add_argument("--segment", type=int, help="segment size in bytes")
    seg.add_argument("--auto-segment", action="store_true", help="search the best segment size")
    _gamma_args(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep", help="predictions over P and m axes")
    _common(p)
    p.add_argument("--strategies", type=name_list, help="comma-separated; default per family")
    p.add_argument("-P", type=int_list, required=True, help="e.g. 2,4,8 or 2:32")
    axis = p.add_mutually_exclusive_group(required=True)
    axis.add_argument("-m", type=int_list, help="explicit message sizes")
    axis.add_argument("--m-ladder", type=ladder, help="geometric ladder start,factor,count")
    p.add_argument("--segment", type=int, help="fixed segment size instead of searching")
    _gamma_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("segment", help="segment-size search trace")
    _common(p, family=False)
    p.add_argument("--strategy", default="pipeline",
                   choices=["flat_segmented", "pipeline", "chain_segmented", "binomial_segmented"])
    p.add_argument("-P", type=int, required=True)
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--method", choices=["optimize", "sweep", "hill-climb"], default="optimize")
    p.add_argument("--start", type=int, help="starting segment size for hill-climb")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("calibrate", help="fit the all-to-all contention factor")
    p.add_argument("--params", required=True)
    p.add_argument("--measurements", required=True, help="lines of '<P> <m> <seconds>'")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("select", help="rank strategies by predicted time")
    _common(p)
    p.add_argument("--strategies", type=name_list)
    p.add_argument("-P", type=int, required=True)
    p.add_argument("-m", type=int, required=True)
    _gamma_args(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="event timeline from the schedule simulator")
    _common(p)
    p.add_argument("--variant", required=True,
                   help="flat, chain or binomial; serialized or overlapped for alltoall")
    p.add_argument("-P", type=int, required=True)
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--segment", type=int)
    p.set_defaults(func=cmd_simulate)
    return parser


def _log_warning(message, category, filename, lineno, file=None, line=None):
    log.warning("%s", message)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s: %(message)s",
                        level=logging.INFO if args.verbose else logging.WARNING)
    if getattr(args, "unit", 1) < 1:
        log.error("--unit must be >= 1")
        return EXIT_USAGE
    if args.command == "simulate" and (args.family, args.variant, args.segment is not None) not in _CLOSED_FORM:
        log.error("variant %r is not simulated for %s%s", args.variant, args.family,
                  " with segments" if args.segment is not None else "")
        return EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.showwarning = _log_warning
            return args.func(args, out)
    except (OSError, ParamFileError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
