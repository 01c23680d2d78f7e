import math
from types import SimpleNamespace

import numpy as np
import pytest

from topoplan import rrht
from topoplan.geometry import Polygon, Workspace
from topoplan.graph import FREE, Node, RDiskGraph
from topoplan.homology import SignaturePolicy, is_allowed, quantize_key
from topoplan.oracle import DiskScenario, augmented_dijkstra, disk_shortest
from topoplan.problem import GoalRegion, Problem
from topoplan.rrht import IterationBudget, RRHTStar, choose_parent, extend, propagate_edge, rewire
from topoplan.steering import State

from conftest import disk_problem, unit_square


def open_problem(start=(0.0, 0.0), bounds=(-20, -20, 20, 20), obstacles=()):
    return Problem(Workspace(bounds, list(obstacles)), State(*start), GoalRegion((19, 19), 0.5))


def test_budget_needs_a_bound():
    with pytest.raises(ValueError):
        IterationBudget(None)


def test_extend():
    g = RDiskGraph(open_problem())
    g.add_vertex(State(0, 0))
    x_new, v_near, e = extend(g, State(10, 0), 1.0)
    assert (x_new.x, x_new.y) == (1.0, 0.0) and v_near.id == 0 and e.cost == 1.0


def test_extend_toward_obstacle():
    w_obs = [Polygon(((2, -1), (4, -1), (4, 1), (2, 1)))]
    g = RDiskGraph(open_problem(obstacles=w_obs))
    g.add_vertex(State(0, 0))
    assert extend(g, State(3, 0), 1.0) is not None  # x_rand inside, x_new outside
    assert extend(g, State(3, 0), 2.5) is None  # x_new inside


def test_propagate_edge():
    g = RDiskGraph(open_problem())
    e = SimpleNamespace(degenerate=False, dst=10**6, hsig_increment=np.array([0.3]), cost=1.0)
    v = SimpleNamespace(id=0, nodes={})
    out = propagate_edge(g, e, [Node(v, np.array([0.4]), 2.0)], SignaturePolicy())
    assert out[0].hsig == pytest.approx([0.7]) and out[0].cost == 3.0
    assert propagate_edge(g, e, [Node(v, np.array([0.9]), 2.0)], SignaturePolicy()) == []
    two = propagate_edge(g, e, [Node(v, np.array([0.1]), 2.0), Node(v, np.array([-0.4]), 2.0)], SignaturePolicy())
    assert len(two) == 2


def line_graph():
    g = RDiskGraph(open_problem())
    pts = [(0, 0), (1, 1.5), (2, 0), (3, 0), (4, 0)]
    vs = [g.add_vertex(State(*p)) for p in pts]
    root = g.new_node(vs[0], np.zeros(0), 0.0)
    g.append_node(vs[0], root)
    parent = root
    for a, b in zip(vs[:-1], vs[1:]):
        e = g.edge(a.id, b.id)
        g.link(e)
        g.check_collision(e)
        parent = g.append_node(b, g.new_node(b, parent.hsig + e.hsig_increment, parent.cost + e.cost, parent, e))
    return g, vs


def test_choose_parent_keeps_cheapest():
    g, vs = line_graph()
    x = g.add_vertex(State(1, 0))
    back = [(vs[0], g.edge(0, x.id)), (vs[1], g.edge(1, x.id))]
    for _, e in back:
        g.link(e)
    choose_parent(g, x, back, SignaturePolicy())
    assert len(x.nodes) == 1 and next(iter(x.nodes.values())).cost == pytest.approx(1.0)


def test_rewire_is_multi_hop():
    g, vs = line_graph()
    before = [next(iter(v.nodes.values())).cost for v in vs]
    x = g.add_vertex(State(1, 0))
    back = [(vs[0], g.edge(0, x.id))]
    fwd = [(vs[2], g.edge(x.id, vs[2].id))]
    for _, e in back + fwd:
        g.link(e)
    choose_parent(g, x, back, SignaturePolicy())
    rewire(g, x, fwd, SignaturePolicy())
    after = [next(iter(v.nodes.values())).cost for v in vs]
    assert after[2:] == pytest.approx([2.0, 3.0, 4.0])
    assert all(a < b for a, b in zip(after[2:], before[2:]))
    oracle = augmented_dijkstra(g).node_costs
    assert all(oracle[(n.vertex.id, n.key)] == pytest.approx(n.cost, abs=1e-9) for n in g.nodes())


def test_no_improvement_leaves_graph_unchanged():
    g, vs = line_graph()
    snapshot = [(n.cost, n.parent) for n in g.nodes()]
    x = g.add_vertex(State(1, 3))
    back = [(vs[1], g.edge(1, x.id))]
    fwd = [(vs[2], g.edge(x.id, vs[2].id))]
    for _, e in back + fwd:
        g.link(e)
    choose_parent(g, x, back, SignaturePolicy())
    pops = rewire(g, x, fwd, SignaturePolicy())
    assert pops == len(x.nodes)
    assert [(n.cost, n.parent) for n in g.nodes() if n.vertex is not x] == snapshot


def test_zero_iterations_is_empty():
    res = rrht.plan(disk_problem(), 0)
    assert res.classes == [] and not res.success


def test_thousand_iterations_against_oracles():
    p = disk_problem()
    res = rrht.plan(p, 1000, seed=0)
    assert len(res.classes) >= 2
    graph_opt = augmented_dijkstra(res.graph).goal_costs
    analytic = disk_shortest(DiskScenario((-3, 0), (3, 0), (0, 0), 1.0)).length
    for c in res.classes:
        assert c.cost == pytest.approx(graph_opt[c.key], abs=1e-9)
        assert abs(c.cost / analytic - 1) <= 0.10


def test_fixed_point_and_dominance():
    planner = RRHTStar(disk_problem(), seed=6)
    policy = planner.policy
    for _ in range(150):
        planner.step()
    g = planner.g
    for u, out in enumerate(g.succ):
        for w, e in out.items():
            if e.collision != FREE:
                continue
            for n in g.vertices[u].nodes.values():
                h = n.hsig + e.hsig_increment
                key = quantize_key(h)
                if is_allowed(h, policy, key):
                    assert g.vertices[w].nodes[key].cost <= n.cost + e.cost + 1e-9
    for v in g.vertices:
        assert len({n.key for n in v.nodes.values()}) == len(v.nodes)


def test_incumbents_never_increase():
    planner = RRHTStar(disk_problem(), seed=2)
    planner.run(IterationBudget(600))
    last = {}
    for snap in planner.g.metrics.snapshots:
        for k, c in snap["best"].items():
            assert c <= last.get(k, math.inf)
            last[k] = c


def test_exploration_covers_the_square():
    p = Problem(Workspace((0, 0, 1, 1)), State(0.5, 0.5), GoalRegion((0.9, 0.9), 0.05))
    planner = RRHTStar(p, seed=0, eta=0.05)
    planner.run(IterationBudget(500))
    pos = planner.g.positions
    span = pos.max(axis=0) - pos.min(axis=0)
    assert np.all(span >= 0.8)


def test_budgets():
    p = disk_problem()
    assert rrht.plan(p, IterationBudget(None, time_limit=0.2)).termination == "time_budget"
    res = rrht.plan(p, IterationBudget(5000, class_count=1), seed=1)
    assert res.termination == "class_count_reached" and len(res.classes) >= 1
    samples = [State(-2, 0.5), State(-1, 1.5)]
    planner = RRHTStar(p, samples=samples)
    assert planner.run(IterationBudget(10)).termination == "samples_exhausted"
    assert planner.iteration == 2


def test_deterministic():
    a = rrht.plan(disk_problem(), 200, seed=3)
    b = rrht.plan(disk_problem(), 200, seed=3)
    assert a.to_dict() == b.to_dict()
