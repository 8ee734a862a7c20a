"""
Far-field patterns of the catalog obstacles
===========================================

Solve the sound-soft scattering problem for a plane wave travelling along
the x1 axis and compare the circle against its series solution.
"""
import numpy as np

from scatterbayes import (FarFieldMap, PeriodicGrid, RadialCurve, obstacle_catalog,
                          radial_to_boundary, solve_far_field)
from scatterbayes.oracles import mie_far_field
from scatterbayes.svgplot import Figure

fmap = FarFieldMap(k=1.0, m=128)

# A unit circle first: the Nystrom solution should agree with the series
# to machine precision by 32 nodes.
for n in (16, 32, 64):
    circle = radial_to_boundary(RadialCurve(PeriodicGrid(n), np.ones(n)))
    u = solve_far_field(circle, fmap).values[:, 0]
    err = np.max(np.abs(u - mie_far_field(1.0, 1.0, fmap.obs_angles)))
    print(f"circle, N={n:3d}: max error against series {err:.2e}")

# Now the four catalog shapes. The drop has a corner, so its default mesh is graded.
fig = Figure("Far-field intensity |u|^2, k = 1", "observation angle (rad)", "|u|^2")
for name in ("peanut", "kite", "drop", "cloverleaf"):
    curve = obstacle_catalog(name, PeriodicGrid(256))
    u = solve_far_field(curve, fmap).values[:, 0]
    print(f"{name:10s}: max |u|^2 = {np.max(np.abs(u) ** 2):.4f}")
    fig.line(fmap.obs_angles, np.abs(u) ** 2, label=name)

with open("far_fields.svg", "w") as fh:
    fh.write(fig.to_svg())
print("wrote far_fields.svg")
