"""
Points, sums and distances on the Poincaré ball
===============================================

The ball of curvature -c is the open disc of radius 1/sqrt(c).  Möbius
addition replaces vector addition there, and exp0/log0 move between the ball
and the flat tangent space at the origin.
"""

import numpy as np

from ehdcnn import geometry as geo

c = 1.0
u = np.array([0.3, 0.4])
v = np.array([-0.5, 0.2])

# Möbius addition stays inside the ball and is not commutative
print("u + v  =", geo.mobius_add(u, v, c))
print("v + u  =", geo.mobius_add(v, u, c))
print("-u + (u + v) =", geo.mobius_add(-u, geo.mobius_add(u, v, c), c), "(left cancellation gives v)")

# exp0 squeezes any tangent vector into the ball; log0 undoes it
t = np.array([3.0, 4.0])
p = geo.exp0(t, c)
print("exp0([3, 4]) =", p, "norm", np.linalg.norm(p))
print("log0(exp0([3, 4])) =", geo.log0(p, c))

# distances blow up near the boundary
for r in (0.5, 0.9, 0.99, 0.999):
    print(f"d(0, {r}) = {geo.geodesic_distance(np.zeros(1), np.array([r]), c)[()]:.3f}")

# as c shrinks the ball grows and the operations become ordinary vector algebra
for c_small in (1.0, 1e-2, 1e-4, 1e-8):
    print(f"c={c_small:g}: u + v = {geo.mobius_add(u, v, c_small)}")
