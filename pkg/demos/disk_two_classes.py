"""Both planners on the unit-disk scenario, compared with the exact answers.

Around a single round obstacle there are two useful classes: over the top and
under the bottom. The tangent-line construction gives the continuous optimum,
and the augmented Dijkstra search gives the best each planner could have done
on its own sample graph.
"""
from pathlib import Path

from topoplan import scenario as sc
from topoplan.oracle import DiskScenario, augmented_dijkstra, disk_shortest

HERE = Path(__file__).resolve().parent
s = sc.load_scenario(HERE.parent / "scenarios" / "disk.json")
s = s.model_copy(update={"termination": sc.TerminationSpec()})  # spend the whole budget
exact = disk_shortest(DiskScenario((-3, 0), (3, 0), (0, 0), 1.0)).length
print(f"tangent-geometry optimum (to the goal centre): {exact:.5f}")

for algo in ("fmht", "rrht"):
    run = s.with_planner(algo=algo, k=1500, iterations=1500)
    res = sc.plan(run)
    graph_best = augmented_dijkstra(res.graph, sc.build_policy(run), res.info.get("radius")).goal_costs
    print(f"\n{algo}: {res.termination}, first goal after {res.first_goal_iteration} iterations")
    for c in res.classes:
        side = "upper" if c.key[0] > 0 else "lower"
        print(f"  {side:5} H={c.class_signature[0]:+.3f} cost {c.cost:.4f}  graph optimum {graph_best[c.key]:.4f}")
    out = HERE / f"disk_{algo}.svg"
    sc.render_svg(res, run, out)
    print(f"  drawing: {out.name}")
