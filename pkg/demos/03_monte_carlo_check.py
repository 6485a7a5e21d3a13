"""Checking the closed forms against simulated node placements.

Each trial draws an independent Poisson placement from a counter-based
generator keyed by (seed, trial index). The results therefore do not depend
on how trials are split across worker processes.

Run: python demos/03_monte_carlo_check.py
"""
import numpy as np

from lens_geocast import (
    HighwayModel,
    Lens,
    NodeField,
    SectorZone,
    SimEstimate,
    compare_to_analytic,
    lens_area_exact,
    p_void,
    region_area,
    region_counts,
)

model = HighwayModel.chord_consistent(R=250.0, W=150.0, n=2)
field = NodeField.poisson(1.36 / lens_area_exact(model.R, model.L))  # about 1.36 nodes per lens
regions = [Lens(0), SectorZone(0, 1), SectorZone(0, 2), SectorZone(0, 3)]

counts = region_counts(field, model, regions, trials=20_000, seed=2024)
for j, region in enumerate(regions):
    est = SimEstimate.from_counts(int(np.count_nonzero(counts[:, j] == 0)), len(counts))
    exact = p_void(field, region_area(region, model))
    cmp = compare_to_analytic(est, exact)
    print(f"{region!r:>16}  sim {est.p_hat:.5f} [{est.ci95_low:.5f}, {est.ci95_high:.5f}]"
          f"  formula {exact:.5f}  {cmp.method} z={cmp.z_score:+.2f} "
          f"{'ok' if cmp.passed else 'MISMATCH'}")

# Same seed, two workers: identical counts.
again = region_counts(field, model, regions, trials=20_000, seed=2024, workers=2)
print("identical with 2 workers:", np.array_equal(counts, again))
