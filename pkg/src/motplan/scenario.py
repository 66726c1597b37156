"""World construction and persistence.

A :class:`Scenario` is the physical layout (sensors, candidate stops, charging
station, restricted rectangles, channel). :func:`build_instance` turns it into
the matrices the planners work on: effective coverage, per-delivery energy,
success probabilities and the travel-cost matrix with blocked legs set to inf.
"""

from __future__ import annotations

import enum
import json
import logging
import math
import os
from dataclasses import dataclass, field, fields
from typing import Any, Sequence

import numpy as np

from .channel import (
    ChannelParams,
    Modulation,
    SuccessRateConvention,
    avg_packet_error_rate,
    avg_snr,
    coverage_radius,
    expected_retransmissions_or_one,
    max_coverage_distance,
    per_coefficients,
    success_probability,
)
from .geometry import (
    Point,
    Rect,
    euclidean_distance,
    point_in_rect,
    poisson_disk_sample,
    segments_intersect_rect,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
MAX_STOP_ATTEMPTS = 10_000


class GenerationFailure(RuntimeError):
    pass


class InfeasibleCoverage(ValueError):
    def __init__(self, sensor_ids: Sequence[int]):
        self.sensor_ids = list(sensor_ids)
        super().__init__(f"no candidate stop can cover sensor(s) {self.sensor_ids}")


class SchemaError(ValueError):
    """Malformed scenario document. ``where`` names the field path or line."""

    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class StopLayout(enum.Enum):
    UNIFORM_RANDOM = "uniform_random"
    GRID = "grid"


@dataclass(frozen=True)
class Sensor:
    id: int
    position: Point


@dataclass(frozen=True)
class Stop:
    id: int
    position: Point
    is_charging_station: bool = False


@dataclass(frozen=True)
class Scenario:
    sensors: tuple[Sensor, ...]
    stops: tuple[Stop, ...]
    restricted: tuple[Rect, ...]
    channel: ChannelParams
    region: Rect
    seed: int
    d_min: float | None = None

    @property
    def n_sensors(self) -> int:
        return len(self.sensors)

    @property
    def n_candidates(self) -> int:
        """Candidate stops excluding the charging station (M)."""
        return len(self.stops) - 1

    def sensor_xy(self) -> np.ndarray:
        return np.array([s.position.as_tuple() for s in self.sensors], dtype=float).reshape(-1, 2)

    def stop_xy(self) -> np.ndarray:
        return np.array([s.position.as_tuple() for s in self.stops], dtype=float).reshape(-1, 2)


def _default_zone() -> list[Rect]:
    return [Rect.from_bounds(40.0, 40.0, 60.0, 60.0)]


@dataclass
class ScenarioConfig:
    """Generation knobs; the defaults reproduce the 100-sensor field setup."""

    region: Rect = field(default_factory=lambda: Rect.from_bounds(0.0, 0.0, 100.0, 100.0))
    n_sensors: int = 100
    n_stops: int = 30
    d_min: float = 8.0
    restricted: list[Rect] = field(default_factory=_default_zone)
    channel: ChannelParams = field(default_factory=ChannelParams)
    stop_layout: StopLayout = StopLayout.UNIFORM_RANDOM
    seed: int = 0


# ----------------------------------------------------------------------------
# generation
# ----------------------------------------------------------------------------


def _in_any(p: Point, rects: Sequence[Rect]) -> bool:
    return any(point_in_rect(p, r) for r in rects)


def _uniform_stops(cfg: ScenarioConfig, rng: np.random.Generator) -> list[Point]:
    reg = cfg.region
    out: list[Point] = []
    attempts = 0
    while len(out) < cfg.n_stops:
        if attempts >= MAX_STOP_ATTEMPTS:
            raise GenerationFailure(
                f"placed {len(out)} of {cfg.n_stops} stops outside restricted areas "
                f"in {MAX_STOP_ATTEMPTS} attempts"
            )
        attempts += 1
        p = Point(
            reg.min_corner.x + rng.random() * reg.width,
            reg.min_corner.y + rng.random() * reg.height,
        )
        if not _in_any(p, cfg.restricted):
            out.append(p)
    return out


def _grid_stops(cfg: ScenarioConfig) -> list[Point]:
    reg = cfg.region
    aspect = reg.width / reg.height
    cols = max(1, math.ceil(math.sqrt(cfg.n_stops * aspect)))
    # grow the lattice until enough cell centres fall outside restricted areas
    for _ in range(MAX_STOP_ATTEMPTS):
        rows = max(1, math.ceil(cfg.n_stops / cols))
        pts = []
        for j in range(rows):
            for i in range(cols):
                p = Point(
                    reg.min_corner.x + (i + 0.5) * reg.width / cols,
                    reg.min_corner.y + (j + 0.5) * reg.height / rows,
                )
                if not _in_any(p, cfg.restricted):
                    pts.append(p)
        if len(pts) >= cfg.n_stops:
            # drop surplus cells spread over the lattice, not from one corner
            k, n = len(pts), cfg.n_stops
            if n == 1:
                return pts[:1]
            # first and last cells always kept; integer rounding keeps it exact
            return [pts[(i * (k - 1) + (n - 1) // 2) // (n - 1)] for i in range(n)]
        cols += 1
    raise GenerationFailure("grid layout cannot avoid the restricted areas")


def _place_station(cfg: ScenarioConfig, sensors: list[Point]) -> Point:
    # the boundary point farthest from any interior point is a corner
    if sensors:
        cx = sum(p.x for p in sensors) / len(sensors)
        cy = sum(p.y for p in sensors) / len(sensors)
    else:
        cx = cfg.region.min_corner.x + cfg.region.width / 2
        cy = cfg.region.min_corner.y + cfg.region.height / 2
    centroid = Point(cx, cy)
    corners = cfg.region.corners()
    order = sorted(range(4), key=lambda i: (-euclidean_distance(corners[i], centroid), i))
    for i in order:
        if not _in_any(corners[i], cfg.restricted):
            return corners[i]
    raise GenerationFailure("every region corner lies inside a restricted area")


def generate_scenario(cfg: ScenarioConfig) -> Scenario:
    """Build a deterministic scenario from ``cfg``.

    Sensors come from Poisson-disk sampling, candidate stops from
    ``cfg.stop_layout`` (never inside a restricted rectangle) and the charging
    station is the region corner farthest from the sensor centroid.

    Raises:
        SaturationShortfall: fewer than ``n_sensors`` points fit at ``d_min``.
        GenerationFailure: stops or station cannot avoid restricted areas.
    """
    if cfg.n_stops < 1:
        raise ValueError("need at least one candidate stop")
    if cfg.n_sensors < 0:
        raise ValueError("n_sensors must be >= 0")
    sensor_pts = (
        poisson_disk_sample(cfg.region, cfg.d_min, cfg.n_sensors, cfg.seed)
        if cfg.n_sensors > 0
        else []
    )
    if cfg.stop_layout is StopLayout.GRID:
        stop_pts = _grid_stops(cfg)
    else:
        stop_pts = _uniform_stops(cfg, np.random.default_rng([cfg.seed, 1]))
    station = _place_station(cfg, sensor_pts)

    radius = coverage_radius(cfg.channel)
    near = [i for i, p in enumerate(sensor_pts) if euclidean_distance(p, station) <= radius]
    if near:
        log.warning(
            "charging station %s is within range of sensors %s; its coverage is ignored",
            station.as_tuple(),
            near,
        )

    return Scenario(
        sensors=tuple(Sensor(i, p) for i, p in enumerate(sensor_pts)),
        stops=(Stop(0, station, True),) + tuple(Stop(i + 1, p) for i, p in enumerate(stop_pts)),
        restricted=tuple(cfg.restricted),
        channel=cfg.channel,
        region=cfg.region,
        seed=cfg.seed,
        d_min=cfg.d_min,
    )


# ----------------------------------------------------------------------------
# optimisation instance
# ----------------------------------------------------------------------------


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MotInstance:
    """Matrices for one tour-planning problem.

    Shapes: ``coverage``, ``energy`` and ``rho`` are (N, M+1); ``cost`` is
    (M+1, M+1) with inf on the diagonal and on blocked legs. Column 0 of
    ``coverage`` is always empty (the charging station collects nothing).
    """

    coverage: np.ndarray
    energy: np.ndarray
    cost: np.ndarray
    p_max: float
    rho: np.ndarray
    rho_min: float
    stop_xy: np.ndarray

    def __post_init__(self):
        for f in ("coverage", "energy", "cost", "rho", "stop_xy"):
            object.__setattr__(self, f, _readonly(getattr(self, f)))
        n, m1 = self.coverage.shape
        if self.energy.shape != (n, m1) or self.rho.shape != (n, m1):
            raise ValueError("coverage, energy and rho must share shape (N, M+1)")
        if self.cost.shape != (m1, m1):
            raise ValueError("cost must be (M+1, M+1)")
        if self.stop_xy.shape != (m1, 2):
            raise ValueError("stop_xy must be (M+1, 2)")

    @property
    def n_sensors(self) -> int:
        return self.coverage.shape[0]

    @property
    def n_candidates(self) -> int:
        return self.coverage.shape[1] - 1

    def with_budget(self, p_max: float) -> MotInstance:
        return MotInstance(self.coverage, self.energy, self.cost, p_max, self.rho, self.rho_min, self.stop_xy)


def cost_matrix(stop_xy: np.ndarray, restricted: Sequence[Rect]) -> np.ndarray:
    xy = np.asarray(stop_xy, dtype=float)
    diff = xy[:, None, :] - xy[None, :, :]
    cost = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)
    starts = np.broadcast_to(xy[:, None, :], diff.shape)
    ends = np.broadcast_to(xy[None, :, :], diff.shape)
    for r in restricted:
        cost[segments_intersect_rect(starts, ends, r)] = np.inf
    np.fill_diagonal(cost, np.inf)
    return cost


def energy_upper_bound(inst: MotInstance) -> float:
    """Largest energy any tour can spend: each sensor charged at its dearest stop.

    Used as a budget that never binds.
    """
    if inst.n_sensors == 0:
        return 0.0
    return math.fsum(inst.energy.max(axis=1).tolist())


def build_instance(
    sc: Scenario,
    conv: SuccessRateConvention = SuccessRateConvention.CORRECTED,
    p_max: float = math.inf,
    strict: bool = True,
) -> MotInstance:
    """Derive the planning matrices from a scenario.

    A sensor counts as covered by a stop only if it is within the free-space
    range and the link success probability reaches ``rho_min``.

    Raises:
        InfeasibleCoverage: some sensor is covered by no stop (``strict`` only).
    """
    ch = sc.channel
    sxy = sc.sensor_xy()
    pxy = sc.stop_xy()
    m1 = len(pxy)

    diff = sxy[:, None, :] - pxy[None, :, :]
    ground = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2).reshape(len(sxy), m1)
    slant = np.sqrt(ground * ground + ch.h_min * ch.h_min)

    in_range = slant <= max_coverage_distance(ch)
    safe = np.where(slant > 0, slant, 1.0)
    snr = np.where(slant > 0, avg_snr(ch, safe), np.inf)
    a_n, b_n = per_coefficients(ch.modulation, ch.packet_bits)
    eta = np.asarray(avg_packet_error_rate(snr, a_n, b_n)).reshape(snr.shape)
    rho = np.asarray(success_probability(eta, ch.q_max, conv)).reshape(snr.shape)
    retx = np.asarray(expected_retransmissions_or_one(rho, eta)).reshape(snr.shape)

    coverage = in_range & (rho >= ch.rho_min)
    # the station never collects, whatever its range says
    coverage[:, 0] = False
    energy = np.where(coverage, ch.tx_power * retx, 0.0)

    if strict and len(sxy):
        orphans = np.flatnonzero(~coverage.any(axis=1))
        if len(orphans):
            raise InfeasibleCoverage(orphans.tolist())

    return MotInstance(
        coverage=coverage,
        energy=energy,
        cost=cost_matrix(pxy, sc.restricted),
        p_max=float(p_max),
        rho=rho,
        rho_min=ch.rho_min,
        stop_xy=pxy,
    )


# ----------------------------------------------------------------------------
# persistence
# ----------------------------------------------------------------------------


def _rect_doc(r: Rect) -> dict:
    return {"min": [r.min_corner.x, r.min_corner.y], "max": [r.max_corner.x, r.max_corner.y]}


def _channel_doc(ch: ChannelParams) -> dict:
    doc: dict[str, Any] = {}
    for f in fields(ch):
        v = getattr(ch, f.name)
        if isinstance(v, Modulation):
            v = {"name": v.name, "c_m": v.c_m, "k_m": v.k_m}
        doc[f.name] = v
    return doc


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": sc.seed,
        "d_min": sc.d_min,
        "region": _rect_doc(sc.region),
        "channel": _channel_doc(sc.channel),
        "restricted": [_rect_doc(r) for r in sc.restricted],
        "sensors": [{"id": s.id, "x": s.position.x, "y": s.position.y} for s in sc.sensors],
        "stops": [
            {"id": s.id, "x": s.position.x, "y": s.position.y, "charging_station": s.is_charging_station}
            for s in sc.stops
        ],
    }


def dumps_scenario(sc: Scenario) -> str:
    # json writes floats with repr(), which round-trips exactly
    return json.dumps(scenario_to_dict(sc), indent=1) + "\n"


def save_scenario(sc: Scenario, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_scenario(sc))


def _get(doc: dict, key: str, where: str, kind=None):
    if not isinstance(doc, dict):
        raise SchemaError("expected an object", where)
    if key not in doc:
        raise SchemaError(f"missing field '{key}'", where)
    v = doc[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(f"expected a number, got {v!r}", f"{where}.{key}")
        return float(v)
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise SchemaError(f"expected an integer, got {v!r}", f"{where}.{key}")
    if kind is bool and not isinstance(v, bool):
        raise SchemaError(f"expected true/false, got {v!r}", f"{where}.{key}")
    if kind is list and not isinstance(v, list):
        raise SchemaError("expected a list", f"{where}.{key}")
    return v


def _xy(v, where: str) -> tuple[float, float]:
    if (
        not isinstance(v, list)
        or len(v) != 2
        or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v)
    ):
        raise SchemaError(f"expected [x, y], got {v!r}", where)
    return float(v[0]), float(v[1])


def _rect_from(doc, where: str) -> Rect:
    lo = _xy(_get(doc, "min", where), f"{where}.min")
    hi = _xy(_get(doc, "max", where), f"{where}.max")
    try:
        return Rect(Point(*lo), Point(*hi))
    except ValueError as exc:
        raise SchemaError(str(exc), where) from None


def _channel_from(doc, where: str) -> ChannelParams:
    mod = _get(doc, "modulation", where)
    mw = f"{where}.modulation"
    try:
        modulation = Modulation(
            str(_get(mod, "name", mw)), _get(mod, "c_m", mw, float), _get(mod, "k_m", mw, float)
        )
        kwargs = {"modulation": modulation}
        for f in fields(ChannelParams):
            if f.name == "modulation":
                continue
            kind = int if f.name in ("packet_bits", "q_max") else float
            kwargs[f.name] = _get(doc, f.name, where, kind)
        return ChannelParams(**kwargs)
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc), where) from None


def scenario_from_dict(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported schema_version {version!r}; this reader knows {SCHEMA_VERSION!r}",
            "schema_version",
        )
    seed = _get(doc, "seed", "$", int)
    d_min = doc.get("d_min")
    if d_min is not None:
        d_min = _get(doc, "d_min", "$", float)
    region = _rect_from(_get(doc, "region", "$"), "region")
    channel = _channel_from(_get(doc, "channel", "$"), "channel")
    restricted = tuple(
        _rect_from(r, f"restricted[{i}]") for i, r in enumerate(_get(doc, "restricted", "$", list))
    )

    def point(entry, where):
        try:
            return Point(_get(entry, "x", where, float), _get(entry, "y", where, float))
        except ValueError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(str(exc), where) from None

    sensors = []
    for i, s in enumerate(_get(doc, "sensors", "$", list)):
        w = f"sensors[{i}]"
        sid = _get(s, "id", w, int)
        if sid != i:
            raise SchemaError(f"sensor ids must be dense 0..N-1, found {sid} at position {i}", f"{w}.id")
        sensors.append(Sensor(sid, point(s, w)))

    stops = []
    for i, s in enumerate(_get(doc, "stops", "$", list)):
        w = f"stops[{i}]"
        sid = _get(s, "id", w, int)
        if sid != i:
            raise SchemaError(f"stop ids must be dense 0..M and unique, found {sid} at position {i}", f"{w}.id")
        station = _get(s, "charging_station", w, bool)
        if station != (i == 0):
            raise SchemaError("exactly stop 0 must be the charging station", f"{w}.charging_station")
        stops.append(Stop(sid, point(s, w), station))
    if not stops:
        raise SchemaError("at least the charging station is required", "stops")

    return Scenario(
        sensors=tuple(sensors),
        stops=tuple(stops),
        restricted=restricted,
        channel=channel,
        region=region,
        seed=seed,
        d_min=d_min,
    )


def loads_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return scenario_from_dict(doc)


def load_scenario(path: str | os.PathLike) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return loads_scenario(fh.read())
