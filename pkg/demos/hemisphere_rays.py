"""Half great circles, the stereographic chart and the Santalo check.

Every boundary ray of the upper hemisphere is a half great circle.  Under
stereographic projection from the south pole it becomes a straight line,
which is what lets the hemisphere transform be inverted with plane tools.
"""
import numpy as np

from hemiray import geometry as geo, hemi_xray as hx, phantoms

ray = geo.BoundaryRay.from_angles(alpha=0.7, beta=1.1)
t = np.linspace(0.1, np.pi - 0.1, 6)
pts = geo.geodesic_point(ray, t)
print("points on the ray (unit norm, x3 > 0):")
print(np.round(pts, 4))

z = geo.stereo_project(pts)
d = z - z[0]
print("collinearity of the projected points:", np.max(np.abs(d[:, 0] * d[-1, 1] - d[:, 1] * d[-1, 0])))

# the transform of a constant field: pi without attenuation
alpha, beta = hx.ray_grid(90, 45)
ones = hx.t_lambda_forward(lambda p: np.ones(p.shape[:-1]), 0.0, alpha, beta)
print("T_0 of f = 1, min and max over rays:", ones.values.min(), ones.values.max())

# Santalo: averaging over rays recovers the integral over the hemisphere
f = hx.SphereField.from_function(phantoms.from_specs(phantoms.DEFAULT_PHANTOM), 128, 128)
lhs = f.integrate()
rhs = hx.santalo_rhs(f, *hx.ray_grid(180, 90))
print(f"integral {lhs:.6f}  ray average {rhs:.6f}  rel gap {abs(rhs - lhs) / lhs:.2e}")
