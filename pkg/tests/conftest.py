import math

import numpy as np
import pytest

from topoplan.geometry import Polygon, Workspace
from topoplan.problem import GoalRegion, Problem
from topoplan.steering import State

REF_COST = 6.33653


def unit_square(x=0.0, y=0.0):
    return Polygon(((x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)))


def disk_problem(goal_radius=0.25, system="holonomic"):
    """Unit disk (32-gon) at the origin, start (-3, 0), goal disk at (3, 0)."""
    w = Workspace((-4, -3, 4, 3), [Polygon.regular((0, 0), 1.0, 32)], [(0, 0)])
    start = State(-3.0, 0.0) if system == "holonomic" else State(-3.0, 0.0, 0.0)
    return Problem(w, start, GoalRegion((3.0, 0.0), goal_radius), system)


def random_instance(i):
    """Seeded single- (even i) or triple-obstacle (odd i) instance."""
    rng = np.random.default_rng(1000 + i)
    n = 1 if i % 2 == 0 else 3
    obs = []
    while len(obs) < n:
        c = rng.uniform([-2.5, -2], [2.5, 2])
        r = rng.uniform(0.3, 0.9)
        if all(math.hypot(c[0] - o[0], c[1] - o[1]) > r + o[2] + 0.1 for o in obs):
            obs.append((c[0], c[1], r))
    w = Workspace((-4, -3, 4, 3), [Polygon.regular((x, y), r, 8, rng.uniform(0, 1)) for x, y, r in obs])
    return Problem(w, State(-3.5, 0.0), GoalRegion((3.5, 0.0), 0.5))


@pytest.fixture
def square_ws():
    return Workspace((-5, -5, 5, 5), [unit_square()])


@pytest.fixture(scope="session")
def disk():
    return disk_problem()
