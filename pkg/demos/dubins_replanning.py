"""Dubins car: plan two classes, then react to an obstacle that appears later.

The stored alternative is reused as is. Replanning only tests the stored
traces against the new obstacle, so no steering or sampling happens.
"""
from pathlib import Path

from topoplan import scenario as sc
from topoplan.geometry import Polygon

HERE = Path(__file__).resolve().parent
SC = HERE.parent / "scenarios"

s = sc.load_scenario(SC / "dubins_square.json")
res = sc.plan(s)
problem = sc.build_problem(s)
print(f"planned {len(res.classes)} classes in {res.iterations} iterations ({res.termination})")
for c in res.classes:
    print(f"  key {list(c.key)} cost {c.cost:.3f}")
if len(res.classes) < 2:
    raise SystemExit("need two classes to demonstrate a switch; raise the iteration budget")

# drop a square across the current best path, halfway along it; its centre sits
# slightly off the path so the new winding coordinate is well defined
mid = res.best.trace[len(res.best.trace) // 2] + (0.07, 0.05)
box = Polygon(tuple((mid[0] + dx, mid[1] + dy) for dx, dy in ((-.2, -.2), (.2, -.2), (.2, .2), (-.2, .2))))
new = sc.replan(res, box, problem)
m = new.metrics
print(f"\nnew obstacle at ({mid[0]:.2f}, {mid[1]:.2f}): {m['paths_invalidated']} path(s) invalidated, "
      f"{m['collision_checks']} segment checks, {m['steering_calls']} steering calls, "
      f"{1e3 * new.info['replan_seconds']:.2f} ms")
if new.success:
    print(f"switched to key {list(new.best.key)} cost {new.best.cost:.3f}")
else:
    print("every stored class is blocked")
