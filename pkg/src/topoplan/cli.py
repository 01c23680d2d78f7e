"""Command line entry point.

Exit status: 0 on success, 2 when the planner reports infeasibility, 1 on
errors. Set TOPOPLAN_LOG (DEBUG, INFO, WARNING...) for log output on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import scenario as sc
from .oracle import augmented_dijkstra

log = logging.getLogger("topoplan")


def _cmd_plan(args) -> int:
    s = sc.load_scenario(args.scenario)
    changes = {}
    if args.algo:
        changes["algo"] = args.algo
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.iters is not None:
        changes["iterations"] = args.iters
    if args.k is not None:
        changes["k"] = args.k
    s = s.with_planner(**changes)
    result = sc.run(s, args.out)
    print(f"{s.planner.algo}: {result.termination}, {len(result.classes)} classes")
    for c in result.classes:
        print(f"  key={list(c.key)} cost={c.cost:.6f}")
    print(f"wrote {Path(args.out) / 'result.json'}")
    return 0 if result.success else 2


def _cmd_replan(args) -> int:
    prior, s = sc.load_result(args.result)
    poly, rep = sc.obstacle_from_file(args.obstacle)
    result = sc.replan(prior, poly, sc.build_problem(s), rep)
    for c in result.classes:
        status = "ok" if c.feasible else "blocked"
        print(f"  key={list(c.key)} cost={c.cost:.6f} {status}")
    m = result.metrics
    print(f"steering calls {m['steering_calls']}, collision checks {m['collision_checks']}, "
          f"{1e3 * result.info['replan_seconds']:.3f} ms")
    out = Path(args.out) if args.out else Path(args.result).with_name("replan.json")
    doc = result.to_dict()
    doc["obstacle"] = {"vertices": poly.xy.tolist(), "representative_point": rep}
    out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if not result.success:
        print("every stored class is blocked; re-run full planning")
        return 2
    print(f"switched to key={list(result.best.key)} cost={result.best.cost:.6f}")
    return 0


def _cmd_gap(args) -> int:
    s = sc.load_scenario(args.scenario)
    if args.algo:
        s = s.with_planner(algo=args.algo)
    if args.seed is not None:
        s = s.with_planner(seed=args.seed)
    result = sc.plan(s)
    radius = result.info.get("radius")
    oracle = augmented_dijkstra(result.graph, sc.build_policy(s), radius)
    print(f"{'class':>24} {'planner':>12} {'oracle':>12} {'ratio':>8}")
    for c in result.classes:
        ref = oracle.goal_costs.get(c.key)
        ratio = f"{c.cost / ref:8.5f}" if ref else "     n/a"
        ref_s = f"{ref:12.6f}" if ref is not None else f"{'n/a':>12}"
        print(f"{str(list(c.key)):>24} {c.cost:12.6f} {ref_s} {ratio}")
    return 0 if result.success else 2


def _cmd_render(args) -> int:
    result, s = sc.load_result(args.result)
    out = Path(args.out) if args.out else Path(args.result).with_suffix(".svg")
    sc.render_svg(result, s, out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topoplan", description="Homology-aware sampling-based planning.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("plan", help="run a planner on a scenario file")
    a.add_argument("scenario")
    a.add_argument("--algo", choices=["fmht", "rrht"])
    a.add_argument("--seed", type=int)
    a.add_argument("--iters", type=int, help="iteration budget (rrht)")
    a.add_argument("--k", type=int, help="sample count (fmht)")
    a.add_argument("--out", default="out")
    a.set_defaults(func=_cmd_plan)

    a = sub.add_parser("replan", help="fall back to a stored class after a new obstacle appears")
    a.add_argument("result")
    a.add_argument("--obstacle", required=True)
    a.add_argument("--out")
    a.set_defaults(func=_cmd_replan)

    a = sub.add_parser("gap", help="compare planner costs with the exact graph optimum")
    a.add_argument("scenario")
    a.add_argument("--algo", choices=["fmht", "rrht"])
    a.add_argument("--seed", type=int)
    a.set_defaults(func=_cmd_gap)

    a = sub.add_parser("render", help="draw a result file as SVG")
    a.add_argument("result")
    a.add_argument("--out")
    a.set_defaults(func=_cmd_render)
    return p


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("TOPOPLAN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (sc.ScenarioError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
