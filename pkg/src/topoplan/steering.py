"""Two-point steering for holonomic points and the forward-only Dubins car.

Costs are path lengths. Dubins paths use speed 1 and minimum turning radius
``rho`` (1 by default).
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Point2

TWO_PI = 2 * math.pi
_SNAP = 1e-10

HOLONOMIC = "holonomic"
DUBINS = "dubins"
SYSTEMS = (HOLONOMIC, DUBINS)

# process-wide count of steering solves, read by the replanning checks
calls: Counter = Counter()


def wrap_angle(a: float) -> float:
    """Map to [-pi, pi)."""
    return (a + math.pi) % TWO_PI - math.pi


def mod2pi(a: float) -> float:
    r = a % TWO_PI
    return 0.0 if r > TWO_PI - _SNAP else r


@dataclass(frozen=True)
class State:
    x: float
    y: float
    heading: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if self.heading is not None:
            object.__setattr__(self, "heading", wrap_angle(float(self.heading)))

    @classmethod
    def of(cls, v: Sequence[float]) -> "State":
        return cls(v[0], v[1], v[2] if len(v) > 2 else None)

    @property
    def position(self) -> Point2:
        return Point2(self.x, self.y)

    def as_list(self) -> list[float]:
        return [self.x, self.y] if self.heading is None else [self.x, self.y, self.heading]


class StraightPath:
    __slots__ = ("x0", "y0", "dx", "dy", "length")

    def __init__(self, a: State, b: State):
        self.x0, self.y0 = a.x, a.y
        self.length = math.hypot(b.x - a.x, b.y - a.y)
        self.dx = (b.x - a.x) / self.length if self.length > 0 else 0.0
        self.dy = (b.y - a.y) / self.length if self.length > 0 else 0.0

    def positions(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.column_stack([self.x0 + s * self.dx, self.y0 + s * self.dy])

    def state_at(self, s: float) -> State:
        return State(self.x0 + s * self.dx, self.y0 + s * self.dy)


class DubinsPath:
    """Three-segment Dubins word; ``params`` are normalised by rho."""

    __slots__ = ("start", "word", "params", "rho", "length")

    def __init__(self, start: State, word: str, params: tuple[float, float, float], rho: float):
        self.start = start
        self.word = word
        self.params = params
        self.rho = rho
        self.length = rho * sum(params)

    def _segment_starts(self):
        x, y, th = self.start.x, self.start.y, self.start.heading
        out = []
        for kind, p in zip(self.word, self.params):
            out.append((x, y, th))
            x, y, th = _advance(x, y, th, kind, p * self.rho, self.rho)
        return out

    def poses(self, s: np.ndarray) -> np.ndarray:
        """(m, 3) array of poses at arc lengths ``s`` (clipped to the path)."""
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.length)
        out = np.empty((len(s), 3))
        offset = 0.0
        starts = self._segment_starts()
        for idx, (kind, p) in enumerate(zip(self.word, self.params)):
            seg = p * self.rho
            last = idx == 2
            mask = (s >= offset) & ((s <= offset + seg) if last else (s < offset + seg))
            x, y, th = starts[idx]
            out[mask] = np.column_stack(_advance_arr(x, y, th, kind, s[mask] - offset, self.rho))
            offset += seg
        return out

    def positions(self, s: np.ndarray) -> np.ndarray:
        return self.poses(s)[:, :2]

    def state_at(self, s: float) -> State:
        x, y, th = self.poses(np.array([s]))[0]
        return State(x, y, th)

    def truncated(self, s: float) -> "DubinsPath":
        rest, params = s / self.rho, []
        for p in self.params:
            params.append(min(p, max(rest, 0.0)))
            rest -= p
        return DubinsPath(self.start, self.word, tuple(params), self.rho)


def _advance(x, y, th, kind, ds, rho):
    if kind == "S":
        return x + ds * math.cos(th), y + ds * math.sin(th), th
    phi = ds / rho
    if kind == "L":
        return (x + rho * (math.sin(th + phi) - math.sin(th)),
                y - rho * (math.cos(th + phi) - math.cos(th)), th + phi)
    return (x - rho * (math.sin(th - phi) - math.sin(th)),
            y + rho * (math.cos(th - phi) - math.cos(th)), th - phi)


def _advance_arr(x, y, th, kind, ds, rho):
    if kind == "S":
        return x + ds * np.cos(th), y + ds * np.sin(th), np.full_like(ds, th)
    phi = ds / rho
    if kind == "L":
        return (x + rho * (np.sin(th + phi) - np.sin(th)),
                y - rho * (np.cos(th + phi) - np.cos(th)), th + phi)
    return (x - rho * (np.sin(th - phi) - np.sin(th)),
            y + rho * (np.cos(th - phi) - np.cos(th)), th - phi)


def _center(q: State, side: str, rho: float) -> tuple[float, float]:
    s, c = math.sin(q.heading), math.cos(q.heading)
    if side == "L":
        return q.x - rho * s, q.y + rho * c
    return q.x + rho * s, q.y - rho * c


def dubins_words(a: State, b: State, rho: float = 1.0) -> dict[str, tuple[float, float, float]]:
    """Normalised (t, p, q) for every feasible word, from tangent-circle geometry."""
    th0, th1 = a.heading, b.heading
    out: dict[str, tuple[float, float, float]] = {}
    for word in ("LSL", "RSR"):
        c0, c1 = _center(a, word[0], rho), _center(b, word[2], rho)
        vx, vy = c1[0] - c0[0], c1[1] - c0[1]
        dist = math.hypot(vx, vy)
        turn = mod2pi(th1 - th0) if word == "LSL" else mod2pi(th0 - th1)
        if dist <= 1e-12:
            out[word] = (turn, 0.0, 0.0)
            continue
        phi = math.atan2(vy, vx)
        if word == "LSL":
            out[word] = (mod2pi(phi - th0), dist / rho, mod2pi(th1 - phi))
        else:
            out[word] = (mod2pi(th0 - phi), dist / rho, mod2pi(phi - th1))
    for word in ("LSR", "RSL"):
        c0, c1 = _center(a, word[0], rho), _center(b, word[2], rho)
        vx, vy = c1[0] - c0[0], c1[1] - c0[1]
        dist2 = vx * vx + vy * vy
        if dist2 < 4 * rho * rho:
            continue
        p = math.sqrt(max(dist2 - 4 * rho * rho, 0.0))
        base = math.atan2(vy, vx)
        if word == "LSR":
            psi = base + math.atan2(2 * rho, p)
            out[word] = (mod2pi(psi - th0), p / rho, mod2pi(psi - th1))
        else:
            psi = base - math.atan2(2 * rho, p)
            out[word] = (mod2pi(th0 - psi), p / rho, mod2pi(th1 - psi))
    for word in ("RLR", "LRL"):
        c0, c1 = _center(a, word[0], rho), _center(b, word[2], rho)
        vx, vy = c1[0] - c0[0], c1[1] - c0[1]
        dist = math.hypot(vx, vy)
        if dist > 4 * rho or dist <= 1e-12:
            continue
        h = math.sqrt(max(4 * rho * rho - dist * dist / 4, 0.0))
        mx, my = 0.5 * (c0[0] + c1[0]), 0.5 * (c0[1] + c1[1])
        ux, uy = -vy / dist, vx / dist
        best = None
        for sgn in (1.0, -1.0):
            c2 = (mx + sgn * h * ux, my + sgn * h * uy)
            a01 = math.atan2(c2[1] - c0[1], c2[0] - c0[0])
            a21 = math.atan2(c1[1] - c2[1], c1[0] - c2[0])
            if word == "RLR":
                psi1, psi2 = a01 - math.pi / 2, a21 + math.pi / 2
                cand = (mod2pi(th0 - psi1), mod2pi(psi2 - psi1), mod2pi(psi2 - th1))
            else:
                psi1, psi2 = a01 + math.pi / 2, a21 - math.pi / 2
                cand = (mod2pi(psi1 - th0), mod2pi(psi1 - psi2), mod2pi(th1 - psi2))
            if best is None or sum(cand) < sum(best):
                best = cand
        out[word] = best
    return out


def dubins_shortest(a: State, b: State, rho: float = 1.0) -> DubinsPath:
    words = dubins_words(a, b, rho)
    word = min(words, key=lambda w: (sum(words[w]), w))
    return DubinsPath(a, word, words[word], rho)


@dataclass(frozen=True, eq=False)
class SteerResult:
    start: State
    end_state: State
    cost: float
    path: StraightPath | DubinsPath

    def trace(self, resolution: float = 0.05) -> np.ndarray:
        return trace(self, resolution)

    def arc_grid(self, resolution: float) -> np.ndarray:
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        if isinstance(self.path, StraightPath) or self.cost <= 0:
            return np.array([0.0, self.cost])
        n = max(1, math.ceil(self.cost / resolution - 1e-12))
        return np.linspace(0.0, self.cost, n + 1)

    def positions(self, s: np.ndarray) -> np.ndarray:
        pts = self.path.positions(s)
        # endpoints are exact
        if len(s) and s[0] == 0.0:
            pts[0] = (self.start.x, self.start.y)
        if len(s) and s[-1] == self.cost:
            pts[-1] = (self.end_state.x, self.end_state.y)
        return pts


def connect(a: State, b: State, system: str = HOLONOMIC, rho: float = 1.0) -> SteerResult:
    """Obstacle-free optimal connection from a to b."""
    calls["connect"] += 1
    if system == HOLONOMIC:
        path = StraightPath(a, b)
        return SteerResult(a, State(b.x, b.y), path.length, path)
    if system == DUBINS:
        path = dubins_shortest(a, b, rho)
        return SteerResult(a, b, path.length, path)
    raise ValueError(f"unknown system {system!r}")


def steer(a: State, target: State, eta: float, system: str = HOLONOMIC, rho: float = 1.0) -> SteerResult:
    """Follow connect(a, target) for at most eta of arc length."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    full = connect(a, target, system, rho)
    if full.cost <= eta:
        return full
    if system == HOLONOMIC:
        end = full.path.state_at(eta)
        return SteerResult(a, end, eta, StraightPath(a, end))
    cut = full.path.truncated(eta)
    return SteerResult(a, cut.state_at(cut.length), cut.length, cut)


def trace(result: SteerResult, resolution: float = 0.05) -> np.ndarray:
    """Polyline through the path with arc-length spacing <= resolution."""
    if isinstance(result.path, StraightPath):
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        n = max(1, math.ceil(result.cost / resolution - 1e-12)) if result.cost > 0 else 1
        s = np.linspace(0.0, result.cost, n + 1)
        return result.positions(s)
    return result.positions(result.arc_grid(resolution))


def lower_bound(a: State, b: State) -> float:
    """Euclidean distance, a lower bound on every system's cost."""
    return math.hypot(b.x - a.x, b.y - a.y)
