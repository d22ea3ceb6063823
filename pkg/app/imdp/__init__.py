from .compiled import CompiledImdp, compile_model, group_argmax
from .model import reachable_states, strong_end_components, terminal_states, validate
from .robust import (
    midpoint_distribution,
    robust_extremum,
    robust_extremum_rows,
    vertex_enumerate,
)

__all__ = [
    "CompiledImdp",
    "compile_model",
    "group_argmax",
    "validate",
    "reachable_states",
    "strong_end_components",
    "terminal_states",
    "robust_extremum",
    "robust_extremum_rows",
    "vertex_enumerate",
    "midpoint_distribution",
]
