"""Sharp-interface limit: boundary curves, quadratic forms, standing waves,
generalized signed distance and recovery sequences."""
from .curve import BoundaryCurve
from .forms import QuadraticFormField, a_Q, anchoring_matrix
from .limit import (GapRow, Recovery, SharpEnergy, VolumeBracketError, boundary_integral,
                    diffuse_functional, gamma_gap, gap_criterion, grid_for_eps, recovery_phi,
                    sandwich_ratio, sharp_energy, sharp_target, tanh_profile, write_gap_csv)
from .sdf import CharacteristicCrossingError, GeneralizedSDF, SDFResult, generalized_sdf
from .wave import IntegratorError, Phi_of, StandingWave, c0, solve_chi

__all__ = [
    "BoundaryCurve", "QuadraticFormField", "a_Q", "anchoring_matrix", "GapRow", "Recovery",
    "SharpEnergy", "VolumeBracketError", "boundary_integral", "diffuse_functional", "gamma_gap",
    "gap_criterion", "grid_for_eps", "recovery_phi", "sandwich_ratio", "sharp_energy",
    "sharp_target", "tanh_profile", "write_gap_csv", "CharacteristicCrossingError",
    "GeneralizedSDF", "SDFResult", "generalized_sdf", "IntegratorError", "Phi_of", "StandingWave",
    "c0", "solve_chi",
]
