"""Fourier multipliers |D|^s and <D>^s on a periodic grid, and line transforms."""
import numpy as np

from hemiray import spectral
from hemiray.euclid_xray import PlaneField

g = PlaneField.from_function(lambda x, y: np.cos(3 * x) * np.sin(4 * y), 64, np.pi)
out = spectral.fractional_multiplier(g, 1.0)
print("|D| cos(3x) sin(4y) = 5 cos(3x) sin(4y):", np.allclose(out.values, 5 * g.values))

for s in (-0.5, 0.0, 0.5):
    print(f"H^{s} norm: {spectral.sobolev_norm(g, s):.4f}")

ell = np.linspace(-1.5, 1.5, 3001)
box = (np.abs(ell) <= 1) * 1.0
lam = np.array([0.5, 2.0])
print("Fourier transform of the unit box:", spectral.line_fourier(box, ell, lam).real,
      "expected", 2 * np.sin(lam) / lam)
