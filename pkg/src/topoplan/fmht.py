"""Batch planner: fast marching over an r-disk graph, projected into
homology layers.

All k samples are drawn up front. Nodes (vertex, class) are connected in
cost-to-arrive order through their cheapest open backward neighbour, with
collision checks deferred until a connection is about to be made.
"""
from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import polyline_collision_free
from .graph import CLOSED, OPEN, CachedEdge, Node, RDiskGraph, Vertex, extract_path, fmt_gamma, radius
from .homology import SignaturePolicy, is_allowed, quantize_key
from .problem import PlanResult, Problem
from .steering import State

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TerminationRule:
    """Stop after ``class_count`` goal classes, or once ``target_signature`` is reached.

    With neither set (or ``exhaust``), the planner runs until the open set empties.
    """

    class_count: int | None = None
    target_signature: tuple[float, ...] | None = None
    exhaust: bool = False

    def __post_init__(self):
        if self.class_count is None and self.target_signature is None:
            object.__setattr__(self, "exhaust", True)
        if self.class_count is not None and self.class_count < 1:
            raise ValueError("class_count must be >= 1")


class GoalSet:
    """Goal nodes with pairwise distinct class keys, in discovery order."""

    def __init__(self):
        self.nodes: dict[tuple[int, ...], tuple[Node, np.ndarray]] = {}

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, key):
        return key in self.nodes

    def costs(self) -> dict[tuple[int, ...], float]:
        return {k: n.cost for k, (n, _) in self.nodes.items()}


def propagate_forward(z: Node, edges: Sequence[tuple[Vertex, CachedEdge]], policy: SignaturePolicy) -> list[Node]:
    """Candidate nodes at z's forward neighbours; cost and parent unset."""
    out = []
    for v, e in edges:
        if e.degenerate:
            continue
        h = z.hsig + e.hsig_increment
        key = quantize_key(h, policy.tol)
        if is_allowed(h, policy, key):
            out.append(Node(v, h, np.inf, key=key))
    return out


def optimal_backward_connect(
    g: RDiskGraph, cand: Node, open_neighbors: Sequence[tuple[Node, CachedEdge]], lazy: bool = True
) -> bool:
    """Connect ``cand`` through the cheapest open neighbour.

    Lazy mode checks only the chosen edge and defers the candidate if it is
    blocked; eager mode discards blocked edges before choosing.
    """
    if not lazy:
        open_neighbors = [(y, e) for y, e in open_neighbors if g.check_collision(e)]
    if not open_neighbors:
        return False
    y, e = min(open_neighbors, key=lambda ye: (ye[0].cost + ye[1].cost, ye[0].vertex.id, ye[0].key))
    if not g.check_collision(e):
        return False
    cand.cost = y.cost + e.cost
    cand.parent = y
    cand.edge = e
    return True


def append_goal(goals: GoalSet, z: Node, problem: Problem, policy: SignaturePolicy) -> bool:
    """Add z if its class (closed to the goal representative point) is new and allowed."""
    h = problem.close_signature(z.vertex.state, z.hsig)
    key = quantize_key(h, policy.tol)
    if key in goals or not is_allowed(h, policy, key):
        return False
    goals.nodes[key] = (z, h)
    return True


def _satisfied(goals: GoalSet, rule: TerminationRule, target_key) -> str | None:
    if target_key is not None and target_key in goals:
        return "target_found"
    if rule.class_count is not None and len(goals) >= rule.class_count:
        return "class_count_reached"
    return None


def plan(
    problem: Problem,
    k: int,
    policy: SignaturePolicy | None = None,
    rule: TerminationRule | None = None,
    seed: int = 0,
    *,
    gamma: float | None = None,
    gamma_multiplier: float = 1.1,
    lazy: bool = True,
    samples: Sequence[State] | None = None,
    snapshots: bool = True,
) -> PlanResult:
    policy = policy or SignaturePolicy()
    rule = rule or TerminationRule()
    rng = np.random.default_rng(seed)
    g = RDiskGraph(problem, policy.tol)
    root_v = g.add_vertex(problem.start)
    for s in (problem.sample_free_states(k, rng) if samples is None else samples):
        if g.find(s) is None:
            g.add_vertex(s)
    d = problem.dimension
    gamma = fmt_gamma(problem.free_measure, d, gamma_multiplier) if gamma is None else gamma
    r = radius(max(len(g), 2), gamma, d)
    info = {"radius": r, "gamma": gamma, "samples": len(g) - 1, "lazy": lazy, "seed": seed, "tol": policy.tol}

    target_key = None
    if rule.target_signature is not None:
        target = np.asarray(rule.target_signature, dtype=float)
        target_key = quantize_key(target, policy.tol)
        if not is_allowed(target, policy, target_key):
            return PlanResult("fmht", [], "target_not_allowed", False, g.metrics.counters(),
                              info=info, graph=g)

    root = g.new_node(root_v, np.zeros(problem.workspace.n_obstacles), 0.0)
    g.append_node(root_v, root)
    counter = itertools.count()
    heap: list = []
    goals = GoalSet()
    first_goal = None
    z = root
    iteration = 0
    if problem.in_goal(root_v.state):
        append_goal(goals, root, problem, policy)
        first_goal = 0

    while True:
        reason = _satisfied(goals, rule, target_key)
        if reason:
            break
        iteration += 1
        cands = propagate_forward(z, g.near_forward(z.vertex, r), policy)
        new_open = []
        for n in cands:
            if n.key in n.vertex.nodes:
                continue
            opens = []
            for u, e in g.near_backward(n.vertex, r):
                if e.degenerate:
                    continue
                y = u.nodes.get(quantize_key(n.hsig - e.hsig_increment, policy.tol))
                if y is not None and y.status == OPEN:
                    opens.append((y, e))
            if optimal_backward_connect(g, n, opens, lazy):
                new_open.append(n)
        z.status = CLOSED
        for n in new_open:
            g.append_node(n.vertex, n)
            heapq.heappush(heap, (n.cost, n.vertex.id, n.key, next(counter), n))
        if snapshots:
            g.metrics.snapshot(iteration, goals.costs())
        z = None
        while heap:
            cand = heapq.heappop(heap)[-1]
            if cand.status == OPEN:
                z = cand
                break
        if z is None:
            reason = "open_set_exhausted"
            break
        if problem.in_goal(z.vertex.state) and append_goal(goals, z, problem, policy):
            if first_goal is None:
                first_goal = iteration

    success = bool(goals) if rule.exhaust and reason == "open_set_exhausted" else reason != "open_set_exhausted"
    classes = []
    for key, (node, h) in goals.nodes.items():
        cp = extract_path(problem, node, h, key)
        if not all(polyline_collision_free(n.edge.trace, problem.workspace) for n in node.path()[1:]):
            raise RuntimeError("returned path failed collision re-validation")
        classes.append(cp)
    classes.sort(key=lambda c: (c.cost, c.key))
    log.info("fmht: %d classes, %d iterations, %s", len(classes), iteration, reason)
    return PlanResult(
        "fmht", classes, reason, success, g.metrics.counters(), list(g.metrics.snapshots),
        first_goal, iteration, info, graph=g,
    )
