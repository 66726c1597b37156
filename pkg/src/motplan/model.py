"""Tours and their evaluation against the MOT constraints.

Constraint keys in a :class:`TourReport`:

    energy_8b      total expected transmit energy within the budget
    coverage_8c    every sensor delivered its data
    restricted_8d  no leg has infinite cost (blocked or self-loop)
    endpoints_8e   tour starts and ends at the charging station
    unique_8f      interior stops are distinct and never the station
    length_8g      1 <= number of interior stops <= M (0 allowed when N == 0)
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .scenario import MotInstance

CONSTRAINTS = ("energy_8b", "coverage_8c", "restricted_8d", "endpoints_8e", "unique_8f", "length_8g")


@dataclass(frozen=True)
class Tour:
    """Stop sequence ``[0, t1, ..., tk, 0]``.

    Not validated on construction, so malformed tours can still be evaluated
    and reported on.
    """

    stops: tuple[int, ...]

    def __init__(self, stops: Iterable[int]):
        object.__setattr__(self, "stops", tuple(int(s) for s in stops))

    @classmethod
    def closed(cls, interior: Sequence[int]) -> Tour:
        return cls([0, *interior, 0])

    @property
    def interior(self) -> tuple[int, ...]:
        return self.stops[1:-1]

    @property
    def n_visited(self) -> int:
        return max(len(self.stops) - 2, 0)

    def legs(self) -> list[tuple[int, int]]:
        if self.stops == (0, 0):
            return []
        return list(zip(self.stops, self.stops[1:]))

    def __str__(self) -> str:
        return ",".join(map(str, self.stops))

    @classmethod
    def parse(cls, text: str) -> Tour:
        parts = [p.strip() for p in text.split(",")]
        if not parts or any(not p for p in parts):
            raise ValueError(f"cannot parse tour {text!r}")
        return cls(int(p) for p in parts)


@dataclass(frozen=True)
class ConstraintResult:
    passed: bool
    detail: str = ""


@dataclass
class TourReport:
    total_cost: float
    total_energy: float
    covered: frozenset[int]
    per_constraint: dict[str, ConstraintResult]

    @property
    def feasible(self) -> bool:
        return all(r.passed for r in self.per_constraint.values())

    def failed(self) -> list[str]:
        return [k for k, r in self.per_constraint.items() if not r.passed]

    def format(self) -> str:
        lines = [
            f"total_cost   {self.total_cost:.6g}",
            f"total_energy {self.total_energy:.6g}",
            f"covered      {len(self.covered)}",
        ]
        for k in CONSTRAINTS:
            r = self.per_constraint[k]
            lines.append(f"{k:<14}{'PASS' if r.passed else 'FAIL'}  {r.detail}".rstrip())
        lines.append(f"feasible     {self.feasible}")
        return "\n".join(lines)


@dataclass
class DeliveryTrace:
    """Per visited stop, the sensors that delivered there and what each cost."""

    steps: list[tuple[int, list[tuple[int, float]]]] = field(default_factory=list)

    def cumulative_energy(self) -> list[float]:
        """Running energy after each stop, starting with 0 at the station.

        Each entry is a correctly rounded sum, so the sequence never decreases
        and its last entry equals the report's total exactly.
        """
        out = [0.0]
        spent: list[float] = []
        for _, deliveries in self.steps:
            spent.extend(e for _, e in deliveries)
            out.append(math.fsum(spent))
        return out

    def sensors(self) -> list[int]:
        return [s for _, d in self.steps for s, _ in d]


def _check_ids(inst: MotInstance, t: Tour) -> None:
    m1 = inst.cost.shape[0]
    for s in t.stops:
        if not 0 <= s < m1:
            raise IndexError(f"stop id {s} out of range 0..{m1 - 1}")


def tour_cost(inst: MotInstance, t: Tour) -> float:
    """Sum of leg costs including the return; ``[0, 0]`` costs 0."""
    _check_ids(inst, t)
    total = 0.0
    for u, v in t.legs():
        total += float(inst.cost[u, v])
    return total


def evaluate_tour(inst: MotInstance, t: Tour) -> tuple[TourReport, DeliveryTrace]:
    """Walk the tour in order and check every constraint.

    A sensor delivers at the first visited stop that covers it and is then
    switched off, so later stops covering it charge nothing.
    """
    _check_ids(inst, t)
    n = inst.n_sensors
    m = inst.n_candidates
    pending = np.ones(n, dtype=bool)
    trace = DeliveryTrace()
    charges: list[float] = []
    for tau in t.stops[1:-1]:
        fresh = np.flatnonzero(inst.coverage[:, tau] & pending)
        pending[fresh] = False
        deliveries = [(int(s), float(inst.energy[s, tau])) for s in fresh]
        charges.extend(e for _, e in deliveries)
        trace.steps.append((tau, deliveries))
    # fsum keeps totals independent of summation order, so budgets derived
    # from the same matrix compare exactly
    energy = math.fsum(charges)

    covered = frozenset(np.flatnonzero(~pending).tolist())
    cost = tour_cost(inst, t)
    checks: dict[str, ConstraintResult] = {}

    checks["energy_8b"] = ConstraintResult(
        energy <= inst.p_max, f"{energy:.6g} of budget {inst.p_max:.6g}"
    )
    missing = np.flatnonzero(pending).tolist()
    checks["coverage_8c"] = ConstraintResult(
        not missing, f"{len(covered)}/{n} covered" + (f"; missing {missing}" if missing else "")
    )
    bad_legs = [(u, v) for u, v in t.legs() if not math.isfinite(inst.cost[u, v])]
    checks["restricted_8d"] = ConstraintResult(
        not bad_legs, f"infinite-cost legs {bad_legs}" if bad_legs else ""
    )
    ok_ends = len(t.stops) >= 2 and t.stops[0] == 0 and t.stops[-1] == 0
    checks["endpoints_8e"] = ConstraintResult(
        ok_ends, "" if ok_ends else f"tour must start and end at 0, got {t.stops[:1]}..{t.stops[-1:]}"
    )
    interior = t.interior
    dup = sorted({s for s in interior if interior.count(s) > 1})
    station_inside = 0 in interior
    ok_unique = not dup and not station_inside
    detail = []
    if dup:
        detail.append(f"repeated stops {dup}")
    if station_inside:
        detail.append("charging station inside tour")
    checks["unique_8f"] = ConstraintResult(ok_unique, "; ".join(detail))
    k = len(interior)
    ok_len = (1 <= k <= m) or (k == 0 and n == 0)
    checks["length_8g"] = ConstraintResult(ok_len, f"{k} interior stops, M = {m}")

    return TourReport(cost, energy, covered, checks), trace


@dataclass(frozen=True)
class FeasibilityCheck:
    ok: bool
    reason: str
    detail: object = None

    def __bool__(self) -> bool:
        return self.ok


def reachable_stops(inst: MotInstance) -> set[int]:
    """Stops that can be reached from the station and can get back to it."""
    finite = np.isfinite(inst.cost)

    def bfs(adj):
        seen = {0}
        q = deque([0])
        while q:
            u = q.popleft()
            for v in np.flatnonzero(adj[u]).tolist():
                if v not in seen:
                    seen.add(v)
                    q.append(v)
        return seen

    return bfs(finite) & bfs(finite.T)


def feasible_exists(inst: MotInstance) -> FeasibilityCheck:
    """Necessary conditions for a feasible tour.

    ``False`` always comes with a certificate. ``True`` is only advisory.
    """
    cov = inst.coverage
    n = inst.n_sensors
    if n == 0:
        return FeasibilityCheck(True, "no sensors; the empty tour is feasible")
    orphans = np.flatnonzero(~cov.any(axis=1)).tolist()
    if orphans:
        return FeasibilityCheck(False, "uncoverable sensor", orphans)

    reach = sorted(reachable_stops(inst) - {0})
    if reach:
        reach_cov = cov[:, reach].any(axis=1)
    else:
        reach_cov = np.zeros(n, dtype=bool)
    stranded = np.flatnonzero(~reach_cov).tolist()
    if stranded:
        return FeasibilityCheck(False, "disconnected stop set", stranded)

    cheapest = np.where(cov[:, reach], inst.energy[:, reach], np.inf).min(axis=1)
    bound = math.fsum(cheapest.tolist())
    if bound > inst.p_max:
        return FeasibilityCheck(False, "energy lower bound", bound)
    return FeasibilityCheck(True, "necessary conditions hold", reach)
