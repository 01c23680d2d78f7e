"""H-signatures of planar trajectories.

A signature holds one winding fraction per obstacle representative point.
For a straight segment the fraction is the signed angle it subtends at the
point, divided by 2*pi; a polyline sums its segments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-6
_DEGENERATE = 1e-12


class DegenerateSegmentError(ValueError):
    """A segment passes through a representative point."""


def _zetas(w) -> np.ndarray:
    z = w.zetas if hasattr(w, "zetas") else w
    return np.asarray(z, dtype=float).reshape(-1, 2)


def _angle_changes(pts: np.ndarray, zetas: np.ndarray) -> np.ndarray:
    """Signed angle swept at each zeta by each segment; shape (segments, N)."""
    a = pts[:-1, None, :] - zetas[None, :, :]
    b = pts[1:, None, :] - zetas[None, :, :]
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    dot = a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]
    # a zeta on the closed segment has cross == 0 and dot <= 0
    suspect = (np.abs(cross) <= 1e-9 * (1.0 + np.abs(dot))) & (dot <= 1e-9)
    if suspect.any():
        # measure from the lexicographically smaller endpoint so the verdict
        # does not depend on the direction of travel
        p, q = pts[:-1], pts[1:]
        flip = (q[:, 0] < p[:, 0]) | ((q[:, 0] == p[:, 0]) & (q[:, 1] < p[:, 1]))
        p, q = np.where(flip[:, None], q, p), np.where(flip[:, None], p, q)
        a0 = p[:, None, :] - zetas[None, :, :]
        d = (q - p)[:, None, :]
        dd = (d ** 2).sum(-1)
        t = np.clip(-(a0 * d).sum(-1) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
        gap = np.hypot(a0[..., 0] + t * d[..., 0], a0[..., 1] + t * d[..., 1])
        if np.any(gap <= _DEGENERATE):
            seg, ob = np.argwhere(gap <= _DEGENERATE)[0]
            raise DegenerateSegmentError(
                f"segment {seg} passes through the representative point of obstacle {ob}"
            )
    return np.arctan2(cross, dot)


def segment_hsig(z1: Sequence[float], z2: Sequence[float], w) -> np.ndarray:
    zetas = w.representative_points if hasattr(w, "representative_points") else _zetas(w).tolist()
    return np.array(_segment_fractions(float(z1[0]), float(z1[1]), float(z2[0]), float(z2[1]), zetas))


def _segment_fractions(x1, y1, x2, y2, zetas) -> list[float]:
    out = []
    for zx, zy in zetas:
        ax, ay, bx, by = x1 - zx, y1 - zy, x2 - zx, y2 - zy
        cross = ax * by - ay * bx
        dot = ax * bx + ay * by
        if abs(cross) <= 1e-9 * (1.0 + abs(dot)) and dot <= 1e-9:
            _angle_changes(np.array([[x1, y1], [x2, y2]]), np.array([[zx, zy]]))
        out.append(math.atan2(cross, dot) / (2 * math.pi))
    return out


def polyline_hsig(trace: Sequence[Sequence[float]], w) -> np.ndarray:
    pts = np.asarray(trace, dtype=float)[:, :2]
    zetas = _zetas(w)
    if len(pts) < 2:
        return np.zeros(len(zetas))
    return _angle_changes(pts, zetas).sum(axis=0) / (2 * math.pi)


def reverse(h: np.ndarray) -> np.ndarray:
    return -np.asarray(h, dtype=float)


def hsig_equal(a: np.ndarray, b: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"signature length mismatch: {a.shape} vs {b.shape}")
    return a.size == 0 or float(np.max(np.abs(a - b))) <= tol


def quantize_key(h: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[int, ...]:
    return tuple([round(v / tol) for v in np.asarray(h, dtype=float).tolist()])


@dataclass(frozen=True)
class SignaturePolicy:
    """Allowed set: every |h_i| <= h_limit and the key is not blocked."""

    h_limit: float = 1.0
    blocked: frozenset = field(default_factory=frozenset)
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not self.h_limit > 0:
            raise ValueError("h_limit must be positive")
        object.__setattr__(self, "blocked", frozenset(tuple(int(v) for v in k) for k in self.blocked))

    @classmethod
    def with_blocked(cls, signatures: Iterable[Sequence[float]], h_limit: float = 1.0,
                     tol: float = DEFAULT_TOL) -> "SignaturePolicy":
        return cls(h_limit, frozenset(quantize_key(s, tol) for s in signatures), tol)

    def key(self, h: np.ndarray) -> tuple[int, ...]:
        return quantize_key(h, self.tol)

    @property
    def key_limit(self) -> int:
        """Largest allowed |key| component."""
        return math.floor(self.h_limit / self.tol + 1e-9)


def is_allowed(h: np.ndarray, policy: SignaturePolicy, key: tuple[int, ...] | None = None) -> bool:
    """Membership in the allowed set, decided on the class key.

    Testing the limit on the key rather than on raw floats keeps the verdict
    identical for every path of a class: closed loops sit exactly on integer
    values, where float noise would otherwise flip the answer.
    """
    if key is None:
        key = policy.key(h)
    if key and max(map(abs, key)) > policy.key_limit:
        return False
    return not policy.blocked or key not in policy.blocked


def refine_trace(
    point_at: Callable[[np.ndarray], np.ndarray],
    s: np.ndarray,
    w,
    max_angle: float = math.pi / 2,
    max_depth: int = 30,
) -> tuple[np.ndarray, np.ndarray]:
    """Split chords of a curved path until none sweeps more than max_angle at any zeta.

    ``point_at`` maps arc-length parameters to (m, 2) positions and ``s`` is an
    increasing parameter grid. Returns the refined parameters and points.
    """
    zetas = _zetas(w)
    s = np.asarray(s, dtype=float)
    pts = point_at(s)
    if len(zetas) == 0:
        return s, pts
    for _ in range(max_depth):
        bad = np.any(np.abs(_angle_changes(pts, zetas)) >= max_angle, axis=1)
        if not bad.any():
            break
        mids = 0.5 * (s[:-1][bad] + s[1:][bad])
        s = np.sort(np.concatenate([s, mids]))
        pts = point_at(s)
    return s, pts
