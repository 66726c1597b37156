"""Command-line entry point.

Exit codes: 0 ok, 1 solver refused (size limit or time budget), 2 scenario
generation failed, 3 infeasible, 4 stuck or stalled, 5 unreadable input or
bad arguments.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .channel import SuccessRateConvention
from .geometry import Rect, SaturationShortfall
from .model import Tour, evaluate_tour
from .plot import save_tour_svg
from .runs import BenchGrid, format_table, record_from_result, run_bench, sha256_text, summarize
from .scenario import (
    GenerationFailure,
    InfeasibleCoverage,
    ScenarioConfig,
    SchemaError,
    StopLayout,
    build_instance,
    dumps_scenario,
    energy_upper_bound,
    generate_scenario,
    loads_scenario,
)
from .solvers import (
    ExactLimits,
    GreedyConfig,
    Infeasible,
    LimitExceeded,
    StalledZeroGain,
    Strategy,
    Stuck,
    TieBreak,
    TimeBudgetExceeded,
    solve,
)

EXIT_OK = 0
EXIT_REFUSED = 1
EXIT_GENERATION = 2
EXIT_INFEASIBLE = 3
EXIT_STUCK = 4
EXIT_PARSE = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _rect(text: str) -> Rect:
    try:
        x0, y0, x1, y1 = (float(v) for v in text.split(","))
        return Rect.from_bounds(x0, y0, x1, y1)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected x0,y0,x1,y1 with x0<x1, y0<y1: {exc}") from None


def _int_list(text: str) -> list[int]:
    """'1,2,5-8' -> [1, 2, 5, 6, 7, 8]; empty string -> []."""
    out: list[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _p_max(text: str) -> float | None:
    if text == "auto":
        return None
    v = float(text)
    if math.isnan(v) or v < 0:
        raise argparse.ArgumentTypeError("p-max must be >= 0, 'inf' or 'auto'")
    return v


def _enum(cls):
    def conv(text: str):
        try:
            return cls(text.replace("-", "_"))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"choose from {', '.join(m.value.replace('_', '-') for m in cls)}"
            ) from None

    conv.__name__ = cls.__name__
    return conv


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None, None
    try:
        return loads_scenario(text), text
    except SchemaError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return None, None


def _budget(inst, p_max):
    return inst.with_budget(energy_upper_bound(inst) if p_max is None else p_max)


def cmd_generate(args) -> int:
    cfg = ScenarioConfig(
        region=Rect.from_bounds(0.0, 0.0, args.width, args.height),
        n_sensors=args.n_sensors,
        n_stops=args.n_stops,
        d_min=args.d_min,
        restricted=[] if args.no_restricted else (args.restricted or ScenarioConfig().restricted),
        stop_layout=args.layout,
        seed=args.seed,
    )
    try:
        sc = generate_scenario(cfg)
    except SaturationShortfall as exc:
        print(f"SaturationShortfall: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except (GenerationFailure, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    text = dumps_scenario(sc)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(
        f"wrote {args.out}: {sc.n_sensors} sensors, {len(sc.stops)} stops (incl. station), "
        f"{len(sc.restricted)} restricted areas, sha256 {sha256_text(text)[:12]}"
    )
    return EXIT_OK


def cmd_solve(args) -> int:
    sc, text = _load(args.scenario)
    if sc is None:
        return EXIT_PARSE
    try:
        inst = _budget(build_instance(sc, args.convention), args.p_max)
        cfg = GreedyConfig(args.strategy, args.tie_break, relay_hops=not args.no_relay)
        res = solve(inst, args.strategy, cfg, ExactLimits(max_stops=args.max_exact, time_budget=args.time_budget))
    except (InfeasibleCoverage, Infeasible) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (Stuck, StalledZeroGain) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STUCK
    except (LimitExceeded, TimeBudgetExceeded) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REFUSED

    rec = record_from_result(sc, args.scenario, sha256_text(text), res)
    print(f"tour {res.tour}")
    print(res.report.format())
    print(f"wall_time    {res.wall_time:.6f} s")
    if rec.alpha is not None:
        print(f"alpha        {rec.alpha:.6g} m*s")
    if args.out:
        Path(args.out).write_text(rec.to_json() + "\n", encoding="utf-8")
    if args.plot:
        save_tour_svg(args.plot, sc, res.tour, title=f"{res.strategy.value} seed {sc.seed}")
    return EXIT_OK if res.report.feasible else EXIT_INFEASIBLE


def cmd_validate(args) -> int:
    sc, _ = _load(args.scenario)
    if sc is None:
        return EXIT_PARSE
    try:
        tour = Tour.parse(args.tour)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    bad = [s for s in tour.stops if not 0 <= s < len(sc.stops)]
    if bad:
        print(f"error: stop ids {bad} out of range 0..{len(sc.stops) - 1}", file=sys.stderr)
        return EXIT_PARSE
    inst = _budget(build_instance(sc, args.convention, strict=False), args.p_max)
    report, _ = evaluate_tour(inst, tour)
    print(report.format())
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_bench(args) -> int:
    grid = BenchGrid(
        stops=args.stops,
        sensors=args.sensors,
        seeds=args.seeds,
        strategies=args.strategies,
        p_max=args.p_max,
        convention=args.convention,
    )
    records = run_bench(grid)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            for r in records:
                fh.write(r.to_json() + "\n")
    print(format_table(summarize(records)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="motplan", description="Mobile base station tour planning")
    p.add_argument("-v", "--verbose", action="store_true", help="log generation warnings")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="generate a scenario file")
    g.add_argument("--width", type=float, default=100.0)
    g.add_argument("--height", type=float, default=100.0)
    g.add_argument("--n-sensors", type=int, default=100)
    g.add_argument("--n-stops", type=int, default=30)
    g.add_argument("--d-min", type=float, default=8.0)
    g.add_argument("--restricted", type=_rect, action="append", metavar="X0,Y0,X1,Y1",
                   help="restricted rectangle, repeatable (default: 40,40,60,60)")
    g.add_argument("--no-restricted", action="store_true")
    g.add_argument("--layout", type=_enum(StopLayout), default=StopLayout.UNIFORM_RANDOM)
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    def common(sp):
        sp.add_argument("--p-max", type=_p_max, default=None,
                        help="energy budget; 'auto' (default) uses a budget that never binds")
        sp.add_argument("--convention", type=_enum(SuccessRateConvention), default=SuccessRateConvention.CORRECTED)

    s = sub.add_parser("solve", help="plan a tour for a scenario")
    s.add_argument("scenario")
    s.add_argument("--strategy", type=_enum(Strategy), default=Strategy.GREEDY_MAX_COVERAGE)
    s.add_argument("--tie-break", type=_enum(TieBreak), default=TieBreak.LOWEST_STOP_ID)
    s.add_argument("--no-relay", action="store_true", help="disable relay hops around blocked legs")
    s.add_argument("--max-exact", type=int, default=10, help="largest M the exact solver accepts")
    s.add_argument("--time-budget", type=float, default=math.inf)
    s.add_argument("--out", help="write the run record (JSON) here")
    s.add_argument("--plot", help="write an SVG tour plot here")
    common(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="check a tour against every constraint")
    v.add_argument("scenario")
    v.add_argument("--tour", required=True, help="comma separated stop ids, e.g. 0,3,8,0")
    common(v)
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bench", help="sweep generated scenarios and summarise")
    b.add_argument("--stops", type=_int_list, default=[30], metavar="LIST")
    b.add_argument("--sensors", type=_int_list, default=[100], metavar="LIST")
    b.add_argument("--seeds", type=_int_list, default=list(range(50)), metavar="LIST",
                   help="e.g. 0-49 or 1,5,9; empty string for none")
    b.add_argument("--strategies", type=lambda t: [_enum(Strategy)(x) for x in t.split(",") if x],
                   default=[Strategy.GREEDY_MAX_COVERAGE], metavar="LIST")
    b.add_argument("--out", help="newline-delimited JSON records")
    common(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
