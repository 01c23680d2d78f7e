"""Planning problem definition and planner output."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import steering
from .geometry import GeometryError, Point2, Workspace, as_point, point_in_obstacle, sample_free
from .homology import segment_hsig
from .steering import State


@dataclass(frozen=True)
class GoalRegion:
    """Disk goal; the representative point defaults to the center."""

    center: Point2
    radius: float
    representative_point: Point2 | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius > 0:
            raise GeometryError("goal radius must be positive")
        rep = self.center if self.representative_point is None else as_point(self.representative_point)
        if math.hypot(rep.x - self.center.x, rep.y - self.center.y) > self.radius:
            raise GeometryError("goal representative point must lie in the goal region")
        object.__setattr__(self, "representative_point", rep)

    def contains(self, p: Sequence[float]) -> bool:
        return math.hypot(p[0] - self.center.x, p[1] - self.center.y) <= self.radius


@dataclass(frozen=True, eq=False)
class Problem:
    workspace: Workspace
    start: State
    goal: GoalRegion
    system: str = steering.HOLONOMIC
    rho: float = 1.0
    trace_resolution: float = 0.05

    def __post_init__(self):
        if self.system not in steering.SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}")
        if (self.start.heading is None) != (self.system == steering.HOLONOMIC):
            raise ValueError("start heading must be given iff the system is dubins")
        if not self.workspace.in_bounds(self.start.position) or point_in_obstacle(self.start.position, self.workspace):
            raise GeometryError("start is not in free space")
        if point_in_obstacle(self.goal.representative_point, self.workspace):
            raise GeometryError("goal representative point is inside an obstacle")

    @property
    def dimension(self) -> int:
        return 2 if self.system == steering.HOLONOMIC else 3

    @property
    def free_measure(self) -> float:
        m = self.workspace.free_area
        return m if self.system == steering.HOLONOMIC else m * 2 * math.pi

    def connect(self, a: State, b: State) -> steering.SteerResult:
        return steering.connect(a, b, self.system, self.rho)

    def steer(self, a: State, b: State, eta: float) -> steering.SteerResult:
        return steering.steer(a, b, eta, self.system, self.rho)

    def in_goal(self, s: State) -> bool:
        return self.goal.contains(s.position)

    def close_signature(self, s: State, hsig: np.ndarray) -> np.ndarray:
        """Signature extended by the straight segment to the goal representative point."""
        return hsig + segment_hsig(s.position, self.goal.representative_point, self.workspace)

    def sample_free_states(self, k: int, rng: np.random.Generator) -> list[State]:
        pts = sample_free(k, self.workspace, rng)
        if self.system == steering.HOLONOMIC:
            return [State(p.x, p.y) for p in pts]
        headings = rng.uniform(-math.pi, math.pi, len(pts))
        return [State(p.x, p.y, h) for p, h in zip(pts, headings)]

    def sample_state(self, rng: np.random.Generator) -> State:
        xmin, ymin, xmax, ymax = self.workspace.bounds
        x, y = rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)
        if self.system == steering.HOLONOMIC:
            return State(x, y)
        return State(x, y, rng.uniform(-math.pi, math.pi))


@dataclass
class ClassPath:
    """Best path found in one homology class."""

    key: tuple[int, ...]
    class_signature: np.ndarray  # signature after closing to the goal representative point
    signature: np.ndarray  # signature of the path itself
    cost: float
    states: list[State]
    trace: np.ndarray
    feasible: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {
            "key": list(self.key),
            "class_signature": [float(v) for v in self.class_signature],
            "signature": [float(v) for v in self.signature],
            "cost": float(self.cost),
            "feasible": self.feasible,
            "states": [s.as_list() for s in self.states],
            "trace": [[float(x), float(y)] for x, y in self.trace],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ClassPath":
        return cls(
            key=tuple(d["key"]),
            class_signature=np.array(d["class_signature"], dtype=float),
            signature=np.array(d["signature"], dtype=float),
            cost=float(d["cost"]),
            states=[State.of(s) for s in d["states"]],
            trace=np.array(d["trace"], dtype=float).reshape(-1, 2),
            feasible=bool(d.get("feasible", True)),
        )


@dataclass
class PlanResult:
    algorithm: str
    classes: list[ClassPath]
    termination: str
    success: bool
    metrics: dict[str, int]
    snapshots: list[dict[str, Any]] = field(default_factory=list)
    first_goal_iteration: int | None = None
    iterations: int = 0
    info: dict[str, Any] = field(default_factory=dict)
    graph: Any = field(default=None, repr=False, compare=False)

    @property
    def best(self) -> ClassPath | None:
        live = [c for c in self.classes if c.feasible]
        return min(live, key=lambda c: c.cost) if live else None

    def class_costs(self) -> dict[tuple[int, ...], float]:
        return {c.key: c.cost for c in self.classes if c.feasible}

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "termination": self.termination,
            "success": self.success,
            "iterations": self.iterations,
            "first_goal_iteration": self.first_goal_iteration,
            "metrics": dict(self.metrics),
            "info": self.info,
            "classes": [c.to_dict() for c in self.classes],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PlanResult":
        return cls(
            algorithm=d["algorithm"],
            classes=[ClassPath.from_dict(c) for c in d["classes"]],
            termination=d["termination"],
            success=bool(d["success"]),
            metrics=dict(d["metrics"]),
            first_goal_iteration=d.get("first_goal_iteration"),
            iterations=int(d.get("iterations", 0)),
            info=dict(d.get("info", {})),
        )
