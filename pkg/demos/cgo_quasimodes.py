"""Quasimodes on the sphere and the CGO candidates built from them.

The residual of v_s does not depend on Re s, so the ambient residual of
u_s stays bounded as the frequency grows.  The conductivity equation is
related to a Schrodinger equation with q = Lap sqrt(gamma) / sqrt(gamma).
"""
import numpy as np

from hemiray import cgo

b = lambda phi: np.sin(phi) ** 2
window = cgo.theta_window(0.5)
for tau in (4.0, 16.0):
    q = cgo.Quasimode(tau + 1j, b)
    print(f"tau {tau}: residual on the cap window {cgo.quasimode_residual(q, window):.6f}")

q = cgo.Quasimode(8 + 1j, b)
ratio = cgo.quasimode_l2(q) ** 2 / cgo.profile_norm(b) ** 2
print(f"||v||^2/||b||^2 = {ratio:.6f}; exact {cgo.exact_l2_factor(q.s):.6f}; "
      f"printed {cgo.printed_l2_factor(q.s):.6f}")

ball = cgo.BallDomain((0.0, 0.0, 2.0), 0.5)
for tau in (4, 8, 16):
    rep = cgo.cgo_residual(cgo.CgoCandidate(cgo.Quasimode(tau + 1j, b)), ball)
    print(f"tau {tau}: weighted residual {rep.value:.5f} ({rep.nodes_per_wavelength:.1f} nodes/wavelength)")

gamma = cgo.GridField3D.from_function(lambda x, y, z: np.exp(2 * x), (-0.5,) * 3, (0.5,) * 3, 41)
print("q for gamma = exp(2 x1), max |q - 1|:",
      np.max(np.abs(cgo.conductivity_to_potential(gamma).values - 1)))
