"""Skew Brownian motion and reading sgn(W) off the local time of Y.

For the second kind, Y = sgn(W_g) X with X skew BM.  Near a zero the right
and symmetric local times of Y satisfy dl = (1 + alpha sgn W) dL, so the
ratio over a short window before each zero recovers the sign.  Accuracy
improves as the grid is refined.
"""
import numpy as np

from filtered_azema import oracle as orc
from filtered_azema.paths import TimeGrid, skew_bm_batch, terminal_values
from filtered_azema.solvers import ScenarioStream

# skew BM puts mass (1 + alpha) / 2 on the positive side
x = terminal_values(skew_bm_batch, TimeGrid.from_dt(1.0, 1e-2), 3, 20_000, alpha=0.6)
print(f"P(X_1 > 0) = {np.mean(x > 0):.3f}  (expected 0.800)")

for dt, n in ((1e-3, 400), (1e-4, 100)):
    s = ScenarioStream("second", TimeGrid.from_dt(1.0, dt), 0.8, root=5, n_paths=n)
    r = orc.test_sign_recovery(s, delta=0.01)
    print(f"dt={dt:g}: sign recovery accuracy {r.estimate:.3f} +- {r.stderr:.3f} "
          f"over {r.params['excursions']} excursions")
