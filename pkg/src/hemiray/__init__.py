"""Attenuated hemisphere ray transforms, weighted plane X-ray inversion,
log-convexity bounds and CGO quasimode numerics."""
from . import cgo, euclid_xray, geometry, hemi_xray, logcvx, recon, spectral
from .errors import (CalibrationError, DegenerateInputError, DivergenceError,
                     HemirayError, InfeasibleSceneError, ResolutionError,
                     ValidationError)

__version__ = "0.1.0"

__all__ = [
    "cgo", "euclid_xray", "geometry", "hemi_xray", "logcvx", "recon", "spectral",
    "CalibrationError", "DegenerateInputError", "DivergenceError", "HemirayError",
    "InfeasibleSceneError", "ResolutionError", "ValidationError",
]
