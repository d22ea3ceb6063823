from .transform import (
    check_assumptions,
    effective_query,
    prepare_query,
    prune_reward_divergent,
    to_basic_form,
)

__all__ = [
    "to_basic_form",
    "check_assumptions",
    "prune_reward_divergent",
    "effective_query",
    "prepare_query",
]
