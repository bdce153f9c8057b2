"""The second-kind filter and the signs that Y reveals along the way.

``nu_hat = sgn(W_g) c sqrt(g)`` uses only the sign at the last zero of Y.
Y, however, exposes ``sgn(W)`` at every earlier zero too, and those signs are
correlated with W_t.  This script measures the residual correlation and
compares it with a closed-form prediction built from the Gaussian law of W at
the two read times.
"""
from filtered_azema import oracle as orc
from filtered_azema.paths import TimeGrid
from filtered_azema.solvers import ScenarioStream

grid = TimeGrid.from_dt(1.0, 1e-3)
stream = ScenarioStream("second", grid, alpha=0.5, root=7, n_paths=20_000)

fam = orc.TestFunctionalFamily.from_names(["one", "s", "s*sqrt(g)", "s(t/4)", "s(t/2)"])
proj, early = orc.run_checks(stream,
                             orc.ProjectionCheck(orc.FilterName.SECOND_KIND, 1.0, fam),
                             orc.EarlierSignCheck(1.0))

print("orthogonality of W_1 - nu_hat_1 against:")
for r in proj:
    print(f"  {r.params['phi']:<10} mean {r.estimate:+.4f}  z {r.statistic:+6.1f}")

print("earlier signs, measured vs predicted residual correlation:")
for r in early:
    print(f"  {r.name:<34} measured {r.estimate:+.4f}  predicted {r.params['predicted']:+.4f}"
          f"  z(measured - predicted) {r.statistic:+.2f}")
