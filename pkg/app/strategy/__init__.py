from .frequencies import (
    build_unrolled,
    expected_rewards,
    fold_layers,
    layered_strategy,
    naive_remix,
    randomise,
    state_action_frequencies,
)
from .oracle import brute_force_achievable, brute_force_weighted_value
from .policies import NatureResolver, adversarial_policy
from .simulation import simulate

__all__ = [
    "state_action_frequencies",
    "randomise",
    "naive_remix",
    "expected_rewards",
    "build_unrolled",
    "layered_strategy",
    "fold_layers",
    "simulate",
    "brute_force_achievable",
    "brute_force_weighted_value",
    "NatureResolver",
    "adversarial_policy",
]
