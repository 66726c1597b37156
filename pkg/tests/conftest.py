import math

import numpy as np
import pytest

from motplan.geometry import Rect
from motplan.scenario import MotInstance, ScenarioConfig, build_instance, cost_matrix, energy_upper_bound, generate_scenario


def make_instance(coverage, xy, energy=None, restricted=(), p_max=math.inf):
    """Hand-built instance: coverage is (N, M+1), xy lists all M+1 stop positions."""
    cov = np.asarray(coverage, dtype=bool).reshape(-1, len(xy))
    cov[:, 0] = False
    if energy is None:
        energy = np.where(cov, 1.0, 0.0)
    energy = np.asarray(energy, dtype=float).reshape(cov.shape)
    xy = np.asarray(xy, dtype=float)
    return MotInstance(
        coverage=cov,
        energy=np.where(cov, energy, 0.0),
        cost=cost_matrix(xy, list(restricted)),
        p_max=p_max,
        rho=np.where(cov, 1.0, 0.0),
        rho_min=0.99,
        stop_xy=xy,
    )


def random_instance(rng, m, n, n_rects=0, extent=100.0, radius=30.0, p_max=None, anchored=False):
    """Random small instance with circular coverage and optional restricted rects.

    With ``anchored`` every sensor is dropped within ``radius`` of some candidate
    stop, so no sensor is uncoverable.
    """
    rects = []
    for _ in range(n_rects):
        x0, y0 = rng.uniform(10, extent - 30, size=2)
        w, h = rng.uniform(5, 25, size=2)
        rects.append(Rect.from_bounds(x0, y0, x0 + w, y0 + h))
    xy = rng.uniform(0, extent, size=(m + 1, 2))
    if anchored:
        base = xy[rng.integers(1, m + 1, size=n)]
        ang = rng.uniform(0, 2 * np.pi, size=n)
        rad = radius * np.sqrt(rng.uniform(0, 0.95, size=n))
        sensors = base + np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
    else:
        sensors = rng.uniform(0, extent, size=(n, 2))
    d = np.sqrt(((sensors[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2))
    cov = d <= radius
    energy = rng.uniform(0.5, 2.0, size=cov.shape)
    inst = make_instance(cov, xy, energy, rects)
    if p_max is None:
        p_max = energy_upper_bound(inst)
    return inst.with_budget(p_max), rects


def field_instance(seed):
    sc = generate_scenario(ScenarioConfig(seed=seed))
    inst = build_instance(sc)
    return sc, inst.with_budget(energy_upper_bound(inst))


@pytest.fixture(scope="session")
def seed42():
    return field_instance(42)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
