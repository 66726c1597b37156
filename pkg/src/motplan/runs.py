"""Run records and benchmark sweeps.

Records are written as newline-delimited JSON, one object per run, each
carrying ``schema_version`` and the SHA-256 of the exact scenario text it was
solved against.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import json
import math
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .channel import SuccessRateConvention
from .scenario import (
    Scenario,
    ScenarioConfig,
    build_instance,
    dumps_scenario,
    energy_upper_bound,
    generate_scenario,
)
from .solvers import GreedyConfig, SolveResult, Strategy, performance_indicator, solve

RECORD_SCHEMA_VERSION = "1"

# (label, tour length m, computation time s) as published for other methods
PUBLISHED_ROWS = (
    ("Baek et al. 2019", 140.0, 2.45),
    ("Li et al. 2021", 150.0, 1.12),
    ("Baek et al. 2020", 210.0, 0.45),
    ("Zhu et al. 2023", 195.0, 0.18),
    ("greedy (published)", 178.0, 0.12),
)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class RunRecord:
    scenario: str
    scenario_sha256: str
    strategy: str
    seed: int
    n_sensors: int
    n_stops: int
    tour: list[int] = field(default_factory=list)
    cost: float | None = None
    energy: float | None = None
    coverage_fraction: float | None = None
    stops_visited: int | None = None
    wall_time: float | None = None
    alpha: float | None = None
    feasible: bool = False
    error: str | None = None
    schema_version: str = RECORD_SCHEMA_VERSION

    def to_json(self) -> str:
        doc = dataclasses.asdict(self)
        # inf is not valid JSON
        for k in ("cost", "alpha", "energy"):
            if isinstance(doc[k], float) and not math.isfinite(doc[k]):
                doc[k] = None
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> RunRecord:
        return cls(**json.loads(line))


def record_from_result(sc: Scenario, label: str, digest: str, res: SolveResult) -> RunRecord:
    n = sc.n_sensors
    cost = res.report.total_cost
    return RunRecord(
        scenario=label,
        scenario_sha256=digest,
        strategy=res.strategy.value,
        seed=sc.seed,
        n_sensors=n,
        n_stops=sc.n_candidates,
        tour=list(res.tour.stops),
        cost=cost,
        energy=res.report.total_energy,
        coverage_fraction=len(res.report.covered) / n if n else 1.0,
        stops_visited=res.stops_visited,
        wall_time=res.wall_time,
        alpha=performance_indicator(cost, res.wall_time) if math.isfinite(cost) else None,
        feasible=res.report.feasible,
    )


@dataclass
class BenchGrid:
    stops: Sequence[int] = (30,)
    sensors: Sequence[int] = (100,)
    seeds: Sequence[int] = ()
    strategies: Sequence[Strategy] = (Strategy.GREEDY_MAX_COVERAGE,)
    p_max: float | None = None
    convention: SuccessRateConvention = SuccessRateConvention.CORRECTED
    base: ScenarioConfig = field(default_factory=ScenarioConfig)


def run_cell(grid: BenchGrid, m: int, n: int, seed: int, strategy: Strategy) -> RunRecord:
    """One grid cell. Failures become a record with ``error`` set."""
    cfg = dataclasses.replace(grid.base, n_stops=m, n_sensors=n, seed=seed)
    rec = RunRecord(scenario=f"generated:M={m},N={n},seed={seed}", scenario_sha256="", strategy=strategy.value,
                    seed=seed, n_sensors=n, n_stops=m)
    try:
        sc = generate_scenario(cfg)
        rec.scenario_sha256 = sha256_text(dumps_scenario(sc))
        inst = build_instance(sc, grid.convention)
        budget = grid.p_max if grid.p_max is not None else energy_upper_bound(inst)
        res = solve(inst.with_budget(budget), strategy, GreedyConfig(strategy))
    except Exception as exc:  # noqa: BLE001 - a sweep never aborts on one cell
        rec.error = f"{type(exc).__name__}: {exc}"
        return rec
    return record_from_result(sc, rec.scenario, rec.scenario_sha256, res)


def run_bench(grid: BenchGrid) -> list[RunRecord]:
    cells = itertools.product(grid.stops, grid.sensors, grid.seeds, grid.strategies)
    return [run_cell(grid, m, n, s, st) for m, n, s, st in cells]


def summarize(records: Iterable[RunRecord]) -> list[tuple[str, int, int, float, float, float]]:
    """Per strategy: (strategy, ok runs, failed runs, median length, median time, alpha)."""
    by: dict[str, list[RunRecord]] = {}
    for r in records:
        by.setdefault(r.strategy, []).append(r)
    rows = []
    for strat, recs in by.items():
        ok = [r for r in recs if r.error is None and r.cost is not None and math.isfinite(r.cost)]
        if ok:
            length = statistics.median(r.cost for r in ok)
            wall = statistics.median(r.wall_time for r in ok)
            alpha = performance_indicator(length, wall)
        else:
            length = wall = alpha = math.nan
        rows.append((strat, len(ok), len(recs) - len(ok), length, wall, alpha))
    return rows


def format_table(rows, include_published: bool = True) -> str:
    head = f"{'Algorithm':<24}{'runs':>6}{'failed':>8}{'Tour Length (m)':>17}{'Computation Time (s)':>22}{'Performance Indicator':>23}"
    lines = [head, "-" * len(head)]
    for strat, ok, bad, length, wall, alpha in rows:
        lines.append(f"{strat:<24}{ok:>6}{bad:>8}{length:>17.2f}{wall:>22.6f}{alpha:>23.6f}")
    if include_published:
        lines.append("-" * len(head))
        for label, length, wall in PUBLISHED_ROWS:
            lines.append(
                f"{label:<24}{'':>6}{'':>8}{length:>17.2f}{wall:>22.6f}{performance_indicator(length, wall):>23.6f}"
            )
    return "\n".join(lines)
