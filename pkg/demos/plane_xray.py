"""Weighted X-ray transform in the plane: forward, adjoint and the constant.

A Gaussian has Gaussian line integrals; the adjoint is checked by the
inner product identity, and the normal operator constant is fitted
against the spectral operator |D|^{-1}.
"""
import numpy as np

from hemiray import cli, euclid_xray as ex, recon

g = ex.PlaneField.from_function(lambda x, y: np.exp(-(x * x + y * y)), 128, 6.0, 4.5)
F = ex.x_ray_forward(g, n_phi=16)
print("max |X g - sqrt(pi) exp(-p^2)|:", np.max(np.abs(F.values - np.sqrt(np.pi) * np.exp(-F.p ** 2))))

rng = np.random.default_rng(0)
like = ex.PlaneField(np.zeros((128, 128)), 2.0, 1.5)
phi, p = ex.angle_grid(120), ex.offset_grid(128, 2.0)
for w in (ex.WeightSpec.unit(), ex.WeightSpec.attenuated(0.1)):
    g, H = cli.random_plane_pair(like, rng, phi, p)
    print(f"duality defect ({w.kind}): {cli.duality_defect(g, H, w):.2e}")

cal = recon.calibrate_cd(n=128, n_phi=180)
print(f"fitted constant {cal.c_hat:.4f} (4 pi = {4 * np.pi:.4f}), misfit {cal.residual:.1e}")
print(f"printed constant for comparison {cal.printed_cd:.4f}")
