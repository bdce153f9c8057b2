"""Which constant multiplies sqrt(t - gamma_t)?

Regress |W_1| on sqrt(1 - gamma_1) through the origin.  For Brownian motion
the end of the meander after gamma_1 is Rayleigh distributed, whose mean is
sqrt(pi/2) times the scale; pi/2 is the other candidate.
"""
import numpy as np

from filtered_azema import oracle as orc
from filtered_azema.paths import Seed, TimeGrid

grid = TimeGrid.from_dt(1.0, 1e-4)
x, u = [], []
for b in orc.wiener_stream(grid, root=11, n_paths=20_000):
    x.append(np.abs(b.W[:, -1]))
    u.append(1.0 - b.gamma[:, -1])
r = orc.calibrate_from_samples(np.concatenate(x), np.concatenate(u), 1.0, grid.dt, Seed(11))

print(f"slope {r.estimate:.4f} +- {r.stderr:.4f}")
for name, value in orc.CANDIDATES.items():
    print(f"  {name:<11} {value:.4f}  z = {r.params['z_vs_' + name]:+7.2f}")
print("selected:", r.params["selected"])
