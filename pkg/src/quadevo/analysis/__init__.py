"""Front, convergence, significance and cross-surface analyses of run logs."""

from .pareto import FrontSnapshot, hypervolume_2d, hypervolume_convergence, mean_confidence_band, pareto_front
from .shapes import kde_scott, mean_spline
from .stats import StatResult, holm_bonferroni, mann_whitney_u, parameter_significance
from .surfaces import distance_from_means, distance_matrix

__all__ = [
    "FrontSnapshot",
    "StatResult",
    "distance_from_means",
    "distance_matrix",
    "holm_bonferroni",
    "hypervolume_2d",
    "hypervolume_convergence",
    "kde_scott",
    "mann_whitney_u",
    "mean_confidence_band",
    "mean_spline",
    "pareto_front",
    "parameter_significance",
]
