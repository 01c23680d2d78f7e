"""Sampling-based planning of shortest paths in every homology class.

Two planners share one r-disk graph per run and project their search trees
into the space of H-signatures: ``fmht`` (batch, lazy collision checks) and
``rrht`` (incremental, anytime). ``oracle`` holds brute-force references.
"""
from .geometry import GeometryError, Polygon, Workspace
from .homology import SignaturePolicy, polyline_hsig, segment_hsig
from .problem import ClassPath, GoalRegion, PlanResult, Problem
from .steering import State

__all__ = [
    "ClassPath",
    "GeometryError",
    "GoalRegion",
    "PlanResult",
    "Polygon",
    "Problem",
    "SignaturePolicy",
    "State",
    "Workspace",
    "polyline_hsig",
    "segment_hsig",
]
__version__ = "0.1.0"
