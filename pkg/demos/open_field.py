# Reactive herding on an empty field: the plain furthest-sheep rule versus
# the filtered rule that leaves strays already ahead of the flock alone.

import numpy as np

from shepherd_de import bundled_scenario, run_batch

# Ten sheep in a 500 x 500 paddock, goal in the corner at the origin.
scenario = bundled_scenario("tab1_n10").with_overrides(n_runs=5)
print(scenario.name, "field", scenario.field_size, "sheep", scenario.flock_size)

# %% Same five seeds for both rules; the initial flock depends on the seed only.
for algorithm in ("strombom", "unswdst"):
    m = run_batch(scenario, algorithm)
    print(f"{algorithm:9s} steps {m.steps}  mean {m.mean:.1f}")

# %% The filtered rule spends fewer steps collecting: count the collecting
# steps in one traced run of each.
for algorithm in ("strombom", "unswdst"):
    trace = run_batch(scenario.with_overrides(n_runs=1), algorithm, trace=True).traces[0]
    modes = np.array([r.mode for r in trace])
    print(f"{algorithm:9s} collecting {np.sum(modes == 'collecting'):4d} of {len(modes) - 1} steps")
