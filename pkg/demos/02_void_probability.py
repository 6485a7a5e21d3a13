"""How likely is the lens to be empty, and how much range is enough?

Nodes are a Poisson field of density lambda, so a region of area A is empty
with probability exp(-lambda * A). The lens between cells is where the next
relay must come from, and an empty lens breaks the chain.

Run: python demos/02_void_probability.py
"""
from lens_geocast import HighwayModel, NodeField, p_void, p_void_zone, poisson_cdf
from lens_geocast.analytics import UnreachableTarget, min_radius_for_void
from lens_geocast.geometry import lens_area

W, L = 150.0, 300.0
print("void probability of the lens, W = 150 m, L = 300 m")
print("lambda      " + "".join(f"R={R:<7g}" for R in (200, 250, 300, 350)))
for lam in (1e-4, 2e-4, 4e-4):
    field = NodeField.poisson(lam)
    row = [p_void(field, lens_area(HighwayModel(W=W, L=L, R=R))) for R in (200, 250, 300, 350)]
    print(f"{lam:<10g}  " + "".join(f"{p:<9.4f}" for p in row))

# The narrow zones are smaller, so they are emptier.
field = NodeField.poisson(2e-4)
m = HighwayModel(W=W, L=L, R=250)
print("\nzone void probabilities at R = 250 m:",
      ", ".join(f"zone {k}: {p_void_zone(field, m, k):.3g}" for k in (1, 2, 3)))

# Count distribution: probability of at most m nodes in a lens whose mean is 18.2.
print("\nP(at most m nodes), mean 18.2:",
      ", ".join(f"m={k}: {poisson_cdf(18.2, k):.4f}" for k in (10, 15, 20, 30)))

# Inverse problem: smallest R for which the lens is empty at most 1% of the time.
R = min_radius_for_void(field, W, L, "lens", 0.01)
print(f"\nR needed for a 1% void chance with W and L fixed: {R:.2f} m")

# In the chord-consistent layout the lens shrinks as R grows, so no R may do.
try:
    min_radius_for_void(NodeField.poisson(1e-5), W, None, "lens", 0.01,
                        mode="chord_consistent", r_max=5e3)
except UnreachableTarget as exc:
    print("chord-consistent layout:", exc)
