"""Raising the winding limit adds classes without adding geometry.

The same sample sequence is replayed with h_limit 1 and 2. Edges and collision
checks belong to the state graph and are identical; only the number of
(vertex, class) nodes grows.
"""
import numpy as np

from topoplan.geometry import Polygon, Workspace
from topoplan.homology import SignaturePolicy
from topoplan.problem import GoalRegion, Problem
from topoplan.rrht import IterationBudget, RRHTStar
from topoplan.steering import State

w = Workspace((-4, -3, 4, 3), [Polygon.regular((0, 0), 1.0, 32)], [(0, 0)])
p = Problem(w, State(-3, 0), GoalRegion((3, 0), 0.25))
rng = np.random.default_rng(0)
samples = [p.sample_state(rng) for _ in range(1200)]

print(f"{'h_limit':>8} {'vertices':>9} {'nodes':>7} {'edges':>7} {'checks':>7} {'goal classes':>13}")
for h_limit in (0.5, 1.0, 2.0):
    planner = RRHTStar(p, SignaturePolicy(h_limit), samples=samples)
    res = planner.run(IterationBudget(len(samples)))
    m = res.metrics
    print(f"{h_limit:8.1f} {m['vertex_count']:9d} {m['node_count']:7d} {m['edges_computed']:7d} "
          f"{m['collision_checks']:7d} {len(res.classes):13d}")
