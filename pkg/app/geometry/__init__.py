from .lp import (
    as_matrix,
    in_downward_closure,
    max_first_coordinate,
    max_min_slack,
    mixture_weights,
    separating_weight,
    solve_lp,
)
from .pareto import distance_to_dwc_2d, pareto_frontier_2d

__all__ = [
    "solve_lp",
    "as_matrix",
    "in_downward_closure",
    "separating_weight",
    "mixture_weights",
    "max_first_coordinate",
    "max_min_slack",
    "pareto_frontier_2d",
    "distance_to_dwc_2d",
]
