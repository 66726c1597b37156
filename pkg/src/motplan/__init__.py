"""Tour planning for a mobile base station collecting IoT sensor data."""

import logging

from .channel import ChannelParams, Modulation, SuccessRateConvention
from .geometry import Point, Rect, Segment
from .model import Tour, TourReport, evaluate_tour, feasible_exists, tour_cost
from .scenario import (
    MotInstance,
    Scenario,
    ScenarioConfig,
    StopLayout,
    build_instance,
    energy_upper_bound,
    generate_scenario,
    load_scenario,
    save_scenario,
)
from .solvers import (
    ExactLimits,
    GreedyConfig,
    SolveResult,
    Strategy,
    TieBreak,
    performance_indicator,
    solve,
    solve_exact,
    solve_greedy_max_coverage,
    solve_greedy_min_cost,
)

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())
