"""Scenario files, run orchestration, replanning and artifact output.

A scenario is a versioned JSON document. Unknown fields are rejected and the
geometry is validated on load, so a file that loads is a file that plans.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import fmht, rrht, steering
from .geometry import GeometryError, Polygon, Workspace, polyline_collision_free
from .homology import DegenerateSegmentError, SignaturePolicy, polyline_hsig, quantize_key, segment_hsig
from .problem import ClassPath, GoalRegion, PlanResult, Problem
from .steering import State

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

Pair = tuple[float, float]


class ScenarioError(ValueError):
    """Schema or geometric validation failure; the message names the field."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ObstacleSpec(_Strict):
    vertices: list[Pair] = Field(min_length=3)
    representative_point: Optional[Pair] = None


class StartSpec(_Strict):
    x: float
    y: float
    heading: Optional[float] = None


class GoalSpec(_Strict):
    center: Pair
    radius: float = Field(gt=0)
    representative_point: Optional[Pair] = None


class PolicySpec(_Strict):
    h_limit: float = Field(1.0, gt=0)
    blocked: list[list[int]] = []


class PlannerSpec(_Strict):
    algo: Literal["fmht", "rrht"] = "fmht"
    k: int = Field(1000, ge=1)
    iterations: int = Field(1000, ge=0)
    time_limit: Optional[float] = None
    gamma_multiplier: float = Field(1.1, gt=0)
    eta: Optional[float] = Field(None, gt=0)
    lazy: bool = True
    seed: int = 0
    tol: float = Field(1e-6, gt=0)
    trace_resolution: float = Field(0.05, gt=0)
    rho: float = Field(1.0, gt=0)


class TerminationSpec(_Strict):
    class_count: Optional[int] = Field(None, ge=1)
    target_signature: Optional[list[float]] = None


class Scenario(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    system: Literal["holonomic", "dubins"] = "holonomic"
    bounds: tuple[float, float, float, float]
    obstacles: list[ObstacleSpec] = []
    start: StartSpec
    goal: GoalSpec
    policy: PolicySpec = PolicySpec()
    planner: PlannerSpec = PlannerSpec()
    termination: TerminationSpec = TerminationSpec()

    def with_planner(self, **changes) -> "Scenario":
        return self.model_copy(update={"planner": self.planner.model_copy(update=changes)})


def _format_errors(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def parse_scenario(data: dict | str) -> Scenario:
    try:
        if isinstance(data, str):
            s = Scenario.model_validate_json(data)
        else:
            s = Scenario.model_validate(data)
    except ValidationError as err:
        raise ScenarioError(_format_errors(err)) from None
    build_problem(s)
    return s


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def dump_scenario(s: Scenario) -> str:
    return s.model_dump_json(indent=2) + "\n"


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(dump_scenario(s))


def build_workspace(s: Scenario) -> Workspace:
    polys = []
    for i, o in enumerate(s.obstacles):
        try:
            polys.append(Polygon.from_points(o.vertices))
        except GeometryError as err:
            raise ScenarioError(f"obstacles.{i}: {err}") from None
    try:
        return Workspace(s.bounds, polys, [o.representative_point for o in s.obstacles])
    except GeometryError as err:
        raise ScenarioError(f"obstacles: {err}") from None


def build_problem(s: Scenario) -> Problem:
    w = build_workspace(s)
    start = State(s.start.x, s.start.y, s.start.heading)
    if (s.start.heading is None) != (s.system == steering.HOLONOMIC):
        raise ScenarioError("start.heading: required for dubins, forbidden for holonomic")
    try:
        goal = GoalRegion(s.goal.center, s.goal.radius, s.goal.representative_point)
    except GeometryError as err:
        raise ScenarioError(f"goal: {err}") from None
    try:
        return Problem(w, start, goal, s.system, s.planner.rho, s.planner.trace_resolution)
    except GeometryError as err:
        field = "start" if "start" in str(err) else "goal"
        raise ScenarioError(f"{field}: {err}") from None


def build_policy(s: Scenario) -> SignaturePolicy:
    return SignaturePolicy(s.policy.h_limit, frozenset(tuple(k) for k in s.policy.blocked), s.planner.tol)


# -- running -------------------------------------------------------------------


def plan(s: Scenario) -> PlanResult:
    """Run the configured planner; deterministic unless a time limit is set."""
    problem, policy, cfg = build_problem(s), build_policy(s), s.planner
    t = s.termination
    if cfg.algo == "fmht":
        target = tuple(t.target_signature) if t.target_signature is not None else None
        rule = fmht.TerminationRule(t.class_count, target)
        return fmht.plan(problem, cfg.k, policy, rule, cfg.seed, gamma_multiplier=cfg.gamma_multiplier,
                         lazy=cfg.lazy)
    budget = rrht.IterationBudget(cfg.iterations, cfg.time_limit, t.class_count)
    return rrht.plan(problem, budget, policy, cfg.seed, eta=cfg.eta, gamma_multiplier=cfg.gamma_multiplier)


def result_document(result: PlanResult, s: Scenario) -> dict:
    doc = result.to_dict()
    doc["scenario"] = s.model_dump(mode="json")
    return doc


def result_json(result: PlanResult, s: Scenario) -> str:
    return json.dumps(result_document(result, s), indent=2, sort_keys=True) + "\n"


def load_result(path: str | Path) -> tuple[PlanResult, Scenario]:
    doc = json.loads(Path(path).read_text())
    if "scenario" not in doc:
        raise ScenarioError("result file has no embedded scenario")
    s = parse_scenario(doc.pop("scenario"))
    return PlanResult.from_dict(doc), s


def run(s: Scenario, out_dir: str | Path | None = None) -> PlanResult:
    """Plan and, if ``out_dir`` is given, write result.json, metrics.csv and plan.svg."""
    result = plan(s)
    log.info("%s: %s, %d classes", s.planner.algo, result.termination, len(result.classes))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "result.json").write_text(result_json(result, s))
        write_metrics_csv(result, out / "metrics.csv")
        render_svg(result, s, out / "plan.svg")
    return result


def validate_path(c: ClassPath, problem: Problem, tol: float = 1e-6) -> list[str]:
    """Problems with an emitted path: collisions, signature drift, cost vs trace length."""
    issues = []
    if not polyline_collision_free(c.trace, problem.workspace):
        issues.append("trace collides")
    h = polyline_hsig(c.trace, problem.workspace)
    if np.max(np.abs(h - c.signature), initial=0.0) > tol:
        issues.append("signature mismatch")
    length = float(np.hypot(*np.diff(c.trace, axis=0).T).sum())
    if abs(length - c.cost) > 1e-3 * max(c.cost, 1e-12):
        issues.append("cost does not match trace length")
    return issues


# -- replanning ----------------------------------------------------------------


def replan(prior: PlanResult, new_obstacle: Polygon, problem: Problem,
           representative_point: Pair | None = None) -> PlanResult:
    """Switch to the cheapest stored class that avoids a newly observed obstacle.

    No sampling or steering: each stored trace is tested against the new
    obstacle only, and every signature gains one coordinate for it.
    """
    if not prior.classes:
        raise ValueError("prior result has no classes to fall back on")
    w = problem.workspace.with_obstacle(new_obstacle, representative_point)
    zeta = w.zetas[-1:]
    goal_pt = problem.goal.representative_point
    t0 = time.perf_counter()
    steer_before = sum(steering.calls.values())
    checks = invalidated = 0
    tol = float(prior.info.get("tol", 1e-6))
    classes = []
    for c in prior.classes:
        try:
            extra = polyline_hsig(c.trace, zeta)
            closing = segment_hsig(c.trace[-1], goal_pt, zeta)
        except DegenerateSegmentError:
            raise ValueError("a stored path passes through the new obstacle's representative point; "
                             "pass a different representative point") from None
        feasible = c.feasible
        if feasible:
            for a, b in zip(c.trace[:-1], c.trace[1:]):
                checks += 1
                if new_obstacle.intersects_segment(a, b):
                    feasible = False
                    invalidated += 1
                    break
        cls_sig = np.concatenate([c.class_signature, extra + closing])
        classes.append(ClassPath(quantize_key(cls_sig, tol), cls_sig, np.concatenate([c.signature, extra]),
                                 c.cost, c.states, c.trace, feasible))
    classes.sort(key=lambda c: (not c.feasible, c.cost, c.key))
    ok = any(c.feasible for c in classes)
    metrics = {
        "steering_calls": sum(steering.calls.values()) - steer_before,
        "collision_checks": checks,
        "paths_invalidated": invalidated,
    }
    info = {**prior.info, "replan_seconds": time.perf_counter() - t0}
    return PlanResult(prior.algorithm, classes, "replanned" if ok else "all_classes_blocked", ok, metrics,
                      [], prior.first_goal_iteration, prior.iterations, info)


# -- artifacts -----------------------------------------------------------------


def write_metrics_csv(result: PlanResult, path: str | Path | None = None) -> str:
    """One row per snapshot; class columns follow the order of ``result.classes``."""
    keys = [tuple(c.key) for c in result.classes]
    for snap in result.snapshots:
        for k in snap["best"]:
            if tuple(k) not in keys:
                keys.append(tuple(k))
    counters = ["node_count", "vertex_count", "edges_computed", "collision_checks"]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["iteration", *counters, *(f"best_cost_class_{i}" for i in range(len(keys)))])
    for snap in result.snapshots:
        best = {tuple(k): v for k, v in snap["best"].items()}
        row = [snap["iteration"], *(snap[c] for c in counters)]
        row += [repr(float(best[k])) if k in best else "" for k in keys]
        wr.writerow(row)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"]


def render_svg(result: PlanResult, s: Scenario | Problem, path: str | Path | None = None,
               width: int = 800) -> str:
    """Flattened 2D picture: obstacles, graph edges, class-coloured tree, best paths."""
    problem = s if isinstance(s, Problem) else build_problem(s)
    w = problem.workspace
    xmin, ymin, xmax, ymax = w.bounds
    scale = width / (xmax - xmin)
    height = int(round((ymax - ymin) * scale))

    def pt(x, y):
        return f"{(x - xmin) * scale:.2f},{(ymax - y) * scale:.2f}"

    def poly(points, **attrs):
        a = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items())
        return f'<polyline points="{" ".join(pt(x, y) for x, y in points)}" {a}/>'

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white" stroke="black"/>',
           '<g id="obstacles">']
    for o, z in zip(w.obstacles, w.representative_points):
        out.append(f'<polygon points="{" ".join(pt(x, y) for x, y in o.xy)}" fill="#888" stroke="black"/>')
        out.append(f'<circle cx="{pt(*z).split(",")[0]}" cy="{pt(*z).split(",")[1]}" r="2" fill="black"/>')
    out.append("</g>")

    g = result.graph
    if g is not None:
        out.append('<g id="graph" stroke="#ddd" stroke-width="0.5" fill="none">')
        for src, d in enumerate(g.succ):
            for dst, e in d.items():
                if src < dst or src not in g.succ[dst]:
                    out.append(poly(e.trace))
        out.append("</g>")
        layers: dict[tuple, int] = {}
        out.append('<g id="trees" stroke-width="0.8" fill="none">')
        for n in g.nodes():
            if n.parent is not None:
                colour = _PALETTE[layers.setdefault(n.key, len(layers)) % len(_PALETTE)]
                out.append(poly(n.edge.trace, stroke=colour, stroke_opacity="0.5"))
        out.append("</g>")

    gx, gy = problem.goal.center
    cx, cy = pt(gx, gy).split(",")
    out.append(f'<circle cx="{cx}" cy="{cy}" r="{problem.goal.radius * scale:.2f}" fill="none" stroke="green"/>')
    sx, sy = pt(problem.start.x, problem.start.y).split(",")
    out.append(f'<circle cx="{sx}" cy="{sy}" r="4" fill="blue"/>')

    out.append('<g id="paths" fill="none">')
    best = result.best
    for i, c in enumerate(result.classes):
        colour = _PALETTE[i % len(_PALETTE)]
        width_px = 3.5 if c is best else 1.8
        dash = "" if c.feasible else ' stroke-dasharray="6,4"'
        out.append(poly(c.trace, stroke=colour, stroke_width=width_px)[:-2] + dash + "/>")
    out.append("</g>")

    out.append('<g id="legend" font-family="monospace" font-size="12">')
    for i, c in enumerate(result.classes):
        label = ", ".join(f"{v:+.3f}" for v in c.class_signature)
        note = "" if c.feasible else " (blocked)"
        out.append(f'<text x="8" y="{16 + 14 * i}" fill="{_PALETTE[i % len(_PALETTE)]}">'
                   f'H=({label}) cost={c.cost:.4f}{note}</text>')
    out.append("</g></svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def obstacle_from_file(path: str | Path) -> tuple[Polygon, Pair | None]:
    """Read ``{"vertices": [[x, y], ...], "representative_point": [x, y]?}``."""
    try:
        spec = ObstacleSpec.model_validate_json(Path(path).read_text())
    except ValidationError as err:
        raise ScenarioError(_format_errors(err)) from None
    return Polygon.from_points(spec.vertices), spec.representative_point
