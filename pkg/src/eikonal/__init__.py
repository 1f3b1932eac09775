"""
Almost-classical eikonal solutions on lattice domains
"""
from .hamiltonian import HypothesisReport, check_hypotheses, hamiltonian_residual
from .cells import Cell, CellDecomposition, check_decomposition, decompose
from .sawtooth import CellSawtooth, cell_sawtooth, slope_root
from .pipeline import CellPlan, EikonalReport, almost_classical, base_field, plan_cells

__all__ = [
    "HypothesisReport",
    "check_hypotheses",
    "hamiltonian_residual",
    "Cell",
    "CellDecomposition",
    "check_decomposition",
    "decompose",
    "CellSawtooth",
    "cell_sawtooth",
    "slope_root",
    "CellPlan",
    "EikonalReport",
    "almost_classical",
    "base_field",
    "plan_cells",
]
