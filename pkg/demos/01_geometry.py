"""Cell geometry: the lens two neighbouring cells share, and the forwarding zones.

A highway of width W is cut into cells of length L. Every cell has a virtual
source at its centre with radio range R. The two disks around neighbouring
centres overlap in a lens, and relays found there reach both centres.

Run: python demos/01_geometry.py
"""
import numpy as np

from lens_geocast import (
    HighwayModel,
    Lens,
    SectorZone,
    lens_area_exact,
    lens_area_paper,
    region_contains,
    zone_area,
)

# With L = sqrt(4R^2 - W^2) the lens chord spans the road exactly.
model = HighwayModel.chord_consistent(R=250.0, W=150.0, n=3)
print(f"R = {model.R:g} m, W = {model.W:g} m  ->  L = {model.L:.4f} m")

# Two independent ways to get the lens area: the road-width formula and the
# usual two-circle segment formula. In this mode they agree.
print(f"lens (road-width form)   {lens_area_paper(model.R, model.W, model.L):.4f} m^2")
print(f"lens (two-circle form)   {lens_area_exact(model.R, model.L):.4f} m^2")

# Zones get narrower as k grows, so their areas shrink.
for k in (1, 2, 3):
    print(f"zone {k}: {zone_area(model, k):10.2f} m^2")

# A quick sanity check by throwing darts into the first two cells.
rng = np.random.default_rng(0)
pts = rng.random((400_000, 2)) * (2 * model.L, model.W)
box = 2 * model.L * model.W
for region in (Lens(0), SectorZone(0, 1), SectorZone(0, 3)):
    frac = region_contains(region, pts, model).mean()
    print(f"{region!r:>16}: darts say {frac * box:10.1f} m^2")

# Without the chord constraint the same formula is just a formula.
# Here W, L and R are picked freely and the result goes negative.
odd = HighwayModel(W=150, L=500, R=80)
print(f"road-width form at W=150, L=500, R=80: {lens_area_paper(odd.R, odd.W, odd.L):.1f}")
