# Planning one spline path around obstacles with differential evolution.

import numpy as np

from shepherd_de import DEConfig, Obstacle, optimize

obstacles = [Obstacle((70, 60), 20), Obstacle((120, 130), 25), Obstacle((40, 150), 15)]
start, target = (10, 10), (190, 190)
print("straight line", np.hypot(180, 180).round(2))

# %% Point mode: only the sampled path points have to stay outside the discs.
res = optimize(start, target, obstacles, DEConfig(), np.random.default_rng(0), record=True)
print("point mode  length", round(res.length, 2), "violation", res.violation)
print("waypoints\n", res.path.waypoints.round(1))

# %% How the best individual improved over the generations; the random
# initial population already holds a feasible path here, so only L drops.
for g in (0, 5, 20, 50, 149):
    h = res.history[g]
    print(f"gen {g:3d}  best L {h.best_length:7.2f}  psi {h.best_violation:.3f}  "
          f"mean F {h.f.mean():.2f}  mean Cr {h.cr.mean():.2f}")

# %% Disc mode: a flock of radius 8 must clear every obstacle by that much,
# so the route is a little longer.
res8 = optimize(start, target, obstacles, DEConfig(), np.random.default_rng(0), flock_radius=8.0)
print("disc mode   length", round(res8.length, 2), "violation", res8.violation)
