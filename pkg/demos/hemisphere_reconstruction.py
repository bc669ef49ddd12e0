"""Reconstruct a cap phantom from attenuated hemisphere ray data.

The data are read along lines of the stereographic plane, inverted there
and pulled back to the sphere.  The ratio of a weak norm of f to the data
norm is the empirical stability constant.
"""
import numpy as np

from hemiray import hemi_xray as hx, phantoms, recon

alpha0 = 0.5
f = phantoms.from_specs(phantoms.DEFAULT_PHANTOM, alpha0)
rays = hx.ray_grid(180, 90)
truth = hx.SphereField.from_function(f, alpha0=alpha0)

for lam in (0.0, 0.05):
    F = hx.t_lambda_forward(f, lam, *rays)
    rec, rep = recon.hemi_reconstruct(F, lam, alpha0, n=128, n_phi=180)
    ratio = recon.surrogate_norm(f, alpha0, 128) / float(hx.mu_norm(F))
    print(f"lambda {lam}: error {recon.sphere_error(rec, truth):.2e}, "
          f"{rep.iterations} iterations, stability ratio {ratio:.4f}")

print("largest admissible lambda on the grid:", recon.admissible_lambda([0.0, 0.05, 0.1], alpha0))
