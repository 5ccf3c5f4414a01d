"""Landau-de Gennes tensor model coupled to a phase field for nematic droplets."""
from .analysis import (Defect, EmptyInterfaceError, InterfaceStats, Thresholds, classify_state,
                       detect_defects, extract_interface, summarize, write_summary)
from .dynamics import (MinimizeReport, SolverConfig, SolverState, StagnationError, gradient_check,
                       init_state, minimize, step, var_derivative_P, var_derivative_phi)
from .energy import (EnergyBreakdown, double_well, energy_anch_2d, energy_ldg_2d, energy_mix,
                     energy_total, energy_void_2d)
from .fields import (FieldFormatError, Grid2D, PTensorField, ScalarField, gradient, integrate,
                     laplacian, load_csv, save_csv)
from .tensor import (MaterialConstants, ModelParams, PTensor, QTensor, bulk_density,
                     bulk_gradient, bulk_min_bound, s_plus)

__version__ = "0.1.0"

__all__ = [
    "Defect", "EmptyInterfaceError", "InterfaceStats", "Thresholds", "classify_state",
    "detect_defects", "extract_interface", "summarize", "write_summary", "MinimizeReport",
    "SolverConfig", "SolverState", "StagnationError", "gradient_check", "init_state", "minimize",
    "step", "var_derivative_P", "var_derivative_phi", "EnergyBreakdown", "double_well",
    "energy_anch_2d", "energy_ldg_2d", "energy_mix", "energy_total", "energy_void_2d",
    "FieldFormatError", "Grid2D", "PTensorField", "ScalarField", "gradient", "integrate",
    "laplacian", "load_csv", "save_csv", "MaterialConstants", "ModelParams", "PTensor", "QTensor",
    "bulk_density", "bulk_gradient", "bulk_min_bound", "s_plus",
]
