from .synthesis import pareto_2d, quantitative, run_basic, run_query, synthesize
from .value_iteration import evaluate_strategy, weighted_robust_vi

__all__ = [
    "weighted_robust_vi",
    "evaluate_strategy",
    "synthesize",
    "quantitative",
    "pareto_2d",
    "run_basic",
    "run_query",
]
