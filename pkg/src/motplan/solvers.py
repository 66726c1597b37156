"""Tour construction.

Two greedy constructions share one loop skeleton and differ only in how the
next stop is picked:

* min-cost: the cheapest finite leg from the current stop, coverage ignored;
* max-coverage: the reachable stop that covers the most still-silent sensors.

Both keep going while sensors remain uncovered and the cumulative energy is
within budget, so the stop that pushes energy over the budget is still
visited. ``solve_exact`` enumerates every ordered subset of candidate stops
and serves as the optimality oracle for small instances.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .model import DeliveryTrace, FeasibilityCheck, Tour, TourReport, evaluate_tour, feasible_exists
from .scenario import MotInstance

COST_RTOL = 1e-9


class Strategy(enum.Enum):
    GREEDY_MIN_COST = "greedy_min_cost"
    GREEDY_MAX_COVERAGE = "greedy_max_coverage"
    EXACT = "exact"


class TieBreak(enum.Enum):
    LOWEST_STOP_ID = "lowest_stop_id"
    NEAREST_TO_CHARGING_STATION = "nearest_to_charging_station"


class SolverError(Exception):
    pass


class Infeasible(SolverError):
    def __init__(self, certificate: FeasibilityCheck):
        self.certificate = certificate
        super().__init__(f"infeasible: {certificate.reason} ({certificate.detail})")


class Stuck(SolverError):
    """Every leg out of the current stop is blocked."""

    def __init__(self, message: str, partial: list[int]):
        self.partial = partial
        super().__init__(f"{message}; partial tour {partial}")


class StalledZeroGain(SolverError):
    def __init__(self, uncovered: list[int], partial: list[int]):
        self.uncovered = uncovered
        self.partial = partial
        super().__init__(
            f"{len(uncovered)} sensors uncovered but no reachable stop adds coverage; partial tour {partial}"
        )


class LimitExceeded(SolverError):
    pass


class TimeBudgetExceeded(SolverError):
    def __init__(self, best: SolveResult | None):
        self.best = best
        super().__init__("exact search ran out of time" + ("" if best else " before finding a feasible tour"))


@dataclass
class GreedyConfig:
    strategy: Strategy = Strategy.GREEDY_MAX_COVERAGE
    tie_break: TieBreak = TieBreak.LOWEST_STOP_ID
    # ablation only: when False blocked legs become eligible
    skip_forbidden: bool = True
    # allow a zero-gain hop through an unvisited stop when the next target or
    # the way home is blocked from the current stop
    relay_hops: bool = True


@dataclass
class SolveResult:
    tour: Tour
    report: TourReport
    trace: DeliveryTrace
    wall_time: float
    strategy: Strategy
    zeta: list[float]
    relays: tuple[int, ...] = ()
    optimal: bool | None = None

    @property
    def stops_visited(self) -> int:
        return self.tour.n_visited

    @property
    def feasible(self) -> bool:
        return self.report.feasible


def performance_indicator(tour_length: float, wall_time: float) -> float:
    """Tour length times solver wall time (m*s); lower is better."""
    if not (math.isfinite(tour_length) and math.isfinite(wall_time)) or tour_length < 0 or wall_time < 0:
        raise ValueError("tour length and wall time must be finite and non-negative")
    return tour_length * wall_time


# ----------------------------------------------------------------------------
# greedy
# ----------------------------------------------------------------------------


class _Greedy:
    def __init__(self, inst: MotInstance, cfg: GreedyConfig):
        self.inst = inst
        self.cfg = cfg
        m1 = inst.cost.shape[0]
        self.unvisited = np.ones(m1, dtype=bool)
        self.unvisited[0] = False
        self.covered = np.zeros(inst.n_sensors, dtype=bool)
        self.tour = [0]
        self.zeta = [0.0]
        self.spent: list[float] = []
        self.relays: list[int] = []
        self.home_dist = np.sqrt(((inst.stop_xy - inst.stop_xy[0]) ** 2).sum(axis=1))

    @property
    def cur(self) -> int:
        return self.tour[-1]

    def reachable(self, src: int) -> np.ndarray:
        mask = self.unvisited.copy()
        if self.cfg.skip_forbidden:
            mask &= np.isfinite(self.inst.cost[src])
        return mask

    def pick_tie(self, ids: np.ndarray) -> int:
        if len(ids) == 1 or self.cfg.tie_break is TieBreak.LOWEST_STOP_ID:
            return int(ids.min())
        d = self.home_dist[ids]
        return int(ids[d == d.min()].min())

    def visit(self, tau: int, relay: bool = False) -> None:
        fresh = self.inst.coverage[:, tau] & ~self.covered
        self.covered |= fresh
        self.spent.extend(self.inst.energy[fresh, tau].tolist())
        self.zeta.append(math.fsum(self.spent))
        self.unvisited[tau] = False
        self.tour.append(tau)
        if relay:
            self.relays.append(tau)

    def relay_towards(self, target: int) -> int | None:
        """Cheapest unvisited stop with open legs from here and on to ``target``."""
        cost = self.inst.cost
        mask = self.reachable(self.cur)
        mask[target] = False
        ids = np.flatnonzero(mask & np.isfinite(cost[:, target]))
        if len(ids) == 0:
            return None
        via = cost[self.cur, ids] + cost[ids, target]
        return int(ids[via == via.min()].min())

    def pick_min_cost(self) -> int:
        ids = np.flatnonzero(self.reachable(self.cur))
        if len(ids) == 0:
            raise Stuck(f"no open leg out of stop {self.cur}", list(self.tour))
        c = self.inst.cost[self.cur, ids]
        return self.pick_tie(ids[c == c.min()])

    def pick_max_coverage(self) -> tuple[int, bool]:
        open_ids = np.flatnonzero(self.reachable(self.cur))
        if len(open_ids) == 0:
            raise Stuck(f"no open leg out of stop {self.cur}", list(self.tour))
        silent = ~self.covered
        gains = (self.inst.coverage[:, open_ids] & silent[:, None]).sum(axis=0)
        best = gains.max()
        if best > 0:
            return self.pick_tie(open_ids[gains == best]), False

        uncovered = np.flatnonzero(silent).tolist()
        if self.cfg.relay_hops:
            far = np.flatnonzero(self.unvisited)
            far_gain = (self.inst.coverage[:, far] & silent[:, None]).sum(axis=0)
            order = np.lexsort((far, -far_gain))
            for j in order:
                if far_gain[j] == 0:
                    break
                relay = self.relay_towards(int(far[j]))
                if relay is not None:
                    return relay, True
        raise StalledZeroGain(uncovered, list(self.tour))

    def close(self) -> None:
        if not math.isfinite(self.inst.cost[self.cur, 0]) and self.cur != 0:
            relay = self.relay_towards(0) if self.cfg.relay_hops else None
            if relay is None:
                raise Stuck(f"leg from stop {self.cur} back to the station is blocked", list(self.tour))
            self.visit(relay, relay=True)
        self.tour.append(0)


def _run_greedy(inst: MotInstance, cfg: GreedyConfig, strategy: Strategy) -> SolveResult:
    check = feasible_exists(inst)
    if not check:
        raise Infeasible(check)
    t0 = time.perf_counter()
    g = _Greedy(inst, cfg)
    while not g.covered.all() and g.zeta[-1] <= inst.p_max:
        if strategy is Strategy.GREEDY_MIN_COST:
            g.visit(g.pick_min_cost())
        else:
            nxt, relay = g.pick_max_coverage()
            g.visit(nxt, relay)
    g.close()
    wall = time.perf_counter() - t0
    tour = Tour(g.tour)
    report, trace = evaluate_tour(inst, tour)
    return SolveResult(tour, report, trace, wall, strategy, g.zeta, tuple(g.relays))


def solve_greedy_min_cost(inst: MotInstance, cfg: GreedyConfig | None = None) -> SolveResult:
    """Nearest-next-stop construction.

    Always moves along the cheapest open leg, even to a stop that covers no
    new sensor.

    Raises:
        Infeasible: necessary conditions fail (certificate attached).
        Stuck: every remaining leg from the current stop is blocked.
    """
    return _run_greedy(inst, cfg or GreedyConfig(Strategy.GREEDY_MIN_COST), Strategy.GREEDY_MIN_COST)


def solve_greedy_max_coverage(inst: MotInstance, cfg: GreedyConfig | None = None) -> SolveResult:
    """Largest-uncovered-gain construction.

    Stops behind a blocked leg are skipped and zero-gain stops are never chosen
    on their own merit; they are only used as relay hops (``cfg.relay_hops``).

    Raises:
        Infeasible, Stuck: as for :func:`solve_greedy_min_cost`.
        StalledZeroGain: sensors remain but nothing reachable adds coverage.
    """
    return _run_greedy(inst, cfg or GreedyConfig(), Strategy.GREEDY_MAX_COVERAGE)


# ----------------------------------------------------------------------------
# exact
# ----------------------------------------------------------------------------


@dataclass
class ExactLimits:
    max_stops: int = 10
    time_budget: float = math.inf
    prune: bool = True


@dataclass
class _Incumbent:
    cost: float = math.inf
    path: list[int] = field(default_factory=list)


def solve_exact(inst: MotInstance, limits: ExactLimits | None = None) -> SolveResult:
    """Exhaustive search over every ordered subset of candidate stops.

    Depth-first in increasing stop id, so the first tour found among cost-tied
    optima is the lexicographically smallest one. With ``limits.prune`` a
    branch is dropped once its partial cost exceeds the incumbent.

    Raises:
        LimitExceeded: more candidate stops than ``limits.max_stops``.
        Infeasible: no tour satisfies every constraint.
        TimeBudgetExceeded: carries the best tour found so far, if any.
    """
    limits = limits or ExactLimits()
    m = inst.n_candidates
    if m > limits.max_stops:
        raise LimitExceeded(f"exact search limited to {limits.max_stops} candidate stops, instance has {m}")
    check = feasible_exists(inst)
    if not check:
        raise Infeasible(check)

    t0 = time.perf_counter()
    cost = inst.cost.tolist()
    n = inst.n_sensors
    full = (1 << n) - 1
    cover_bits = []
    charges = []
    for tau in range(m + 1):
        ids = np.flatnonzero(inst.coverage[:, tau]).tolist()
        cover_bits.append(sum(1 << s for s in ids))
        charges.append({s: float(inst.energy[s, tau]) for s in ids})

    best = _Incumbent()
    p_max = inst.p_max
    path: list[int] = []
    spent: list[float] = []
    visited = [False] * (m + 1)
    visited[0] = True
    nodes = 0

    def snapshot(optimal: bool) -> SolveResult:
        tour = Tour.closed(best.path)
        report, trace = evaluate_tour(inst, tour)
        return SolveResult(
            tour, report, trace, time.perf_counter() - t0, Strategy.EXACT, trace.cumulative_energy(), optimal=optimal
        )

    def dfs(cur: int, partial: float, covmask: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes & 1023 == 0 and time.perf_counter() - t0 > limits.time_budget:
            raise TimeBudgetExceeded(snapshot(False) if math.isfinite(best.cost) else None)

        if covmask == full and (path or n == 0):
            back = 0.0 if not path else cost[cur][0]
            total = partial + back
            if (
                math.isfinite(total)
                and (not math.isfinite(best.cost) or total < best.cost - COST_RTOL * abs(best.cost))
                and math.fsum(spent) <= p_max
            ):
                best.cost = total
                best.path = list(path)

        for nxt in range(1, m + 1):
            if visited[nxt]:
                continue
            leg = cost[cur][nxt]
            if not math.isfinite(leg):
                continue
            step = partial + leg
            if limits.prune and math.isfinite(best.cost) and step > best.cost + COST_RTOL * abs(best.cost):
                continue
            fresh = cover_bits[nxt] & ~covmask
            mark = len(spent)
            bits = fresh
            while bits:
                low = bits & -bits
                spent.append(charges[nxt][low.bit_length() - 1])
                bits ^= low
            visited[nxt] = True
            path.append(nxt)
            dfs(nxt, step, covmask | fresh)
            del spent[mark:]
            path.pop()
            visited[nxt] = False

    dfs(0, 0.0, 0)
    if not math.isfinite(best.cost):
        raise Infeasible(FeasibilityCheck(False, "exhaustive search found no feasible tour", m))
    return snapshot(True)


def solve(inst: MotInstance, strategy: Strategy, cfg: GreedyConfig | None = None, limits: ExactLimits | None = None) -> SolveResult:
    if strategy is Strategy.EXACT:
        return solve_exact(inst, limits)
    cfg = cfg or GreedyConfig(strategy)
    if strategy is Strategy.GREEDY_MIN_COST:
        return solve_greedy_min_cost(inst, cfg)
    return solve_greedy_max_coverage(inst, cfg)
