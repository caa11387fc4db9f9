# One cluttered episode with the two-phase planner, phase by phase.

from itertools import groupby

from shepherd_de import bundled_scenario
from shepherd_de.harness import run_scenario_episode

scenario = bundled_scenario("tab2_6small_n20")
print(len(scenario.obstacles), "obstacles:",
      [(o.center.tolist(), o.radius) for o in scenario.obstacles])

result = run_scenario_episode(scenario, "unswdst1", seed=0, trace=True)
print("success", result.success, "steps", result.steps, "planner evaluations", result.planner_evals)

# %% The two optimisations: the shepherd's approach (sheep treated as big
# discs) and the flock's route (obstacles inflated by the flock radius).
approach, drive = result.plans
print("approach length", round(approach.length, 1), "violation", approach.violation)
print("drive    length", round(drive.length, 1), "violation", drive.violation)
print("sub-goals", drive.path.waypoints.round(1).tolist(), "then the goal")

# %% Behaviour over time as runs of the same mode.
runs = [(mode, len(list(g))) for mode, g in groupby(r.mode for r in result.trace[:-1])]
print(" -> ".join(f"{m} x{n}" for m, n in runs[:12]), "..." if len(runs) > 12 else "")

# %% Same flock, purely reactive, for comparison.
reactive = run_scenario_episode(scenario, "unswdst", seed=0)
print("reactive only: steps", reactive.steps)
