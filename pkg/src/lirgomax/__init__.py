"""PageRank linear response (LIRGOMAX) and reduced Google matrix (REGOMAX) for large directed networks."""
from .gmatrix import ConvergenceError, GoogleOperator, cheirank, pagerank, rank_order
from .graph import DirectedGraph, LabelMap, load_edge_list, load_labels, transpose
from .regomax import ReducedMatrices, component_weights, compute_reduced, qr_nondiagonal, reduced_pagerank
from .response import (PathwaySubset, PumpSpec, project, pump_general_v0, pump_pair_v0,
                       select_pathway_subset, sensitivity_v0, sensitivity_values,
                       solve_linear_response, solve_perturbed_pump)

__all__ = [
    "ConvergenceError", "DirectedGraph", "GoogleOperator", "LabelMap", "PathwaySubset",
    "PumpSpec", "ReducedMatrices", "cheirank", "component_weights", "compute_reduced",
    "load_edge_list", "load_labels", "pagerank", "project", "pump_general_v0", "pump_pair_v0",
    "qr_nondiagonal", "rank_order", "reduced_pagerank", "select_pathway_subset",
    "sensitivity_v0", "sensitivity_values", "solve_linear_response", "solve_perturbed_pump",
    "transpose",
]
__version__ = "0.1.0"
