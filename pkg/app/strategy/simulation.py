from typing import List, Optional, Sequence

import numpy as np

from app.config import SIMULATION_HORIZON, SIMULATION_RUNS, SIMULATION_SEED
from app.imdp.compiled import CompiledImdp, compile_model
from app.imdp.model import terminal_states
from app.models.imdp_models import Imdp
from app.models.result_models import SimulationReport
from app.models.strategy_models import NaturePolicy
from app.utils.logging import get_logger

from .frequencies import AnyStrategy, mixture_components
from .policies import component_resolvers, row_policy

logger = get_logger("strategy", "simulation")

CONFIDENCE_Z = 1.96


def _sample_rows(
    compiled: CompiledImdp, rho: np.ndarray, states: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Draw one row per entry of `states` from the row probabilities `rho`."""
    cumulative = np.cumsum(rho)
    starts = compiled.row_ptr[states]
    offset = np.where(starts > 0, cumulative[starts - 1], 0.0)
    draws = offset + rng.random(len(states)) * (cumulative[compiled.row_ptr[states + 1] - 1] - offset)
    rows = np.searchsorted(cumulative, draws, side="right")
    return np.clip(rows, starts, compiled.row_ptr[states + 1] - 1)


def _sample_successors(
    compiled: CompiledImdp, witnesses: np.ndarray, rows: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    cumulative = np.cumsum(witnesses[rows], axis=1)
    draws = rng.random(len(rows)) * cumulative[:, -1]
    positions = (cumulative <= draws[:, None]).sum(axis=1)
    last = compiled.mask[rows].sum(axis=1) - 1
    return compiled.targets[rows, np.minimum(positions, last)]


def simulate(
    model: Imdp,
    strategy: AnyStrategy,
    structures: Sequence[str],
    bounds: Optional[Sequence[Optional[int]]] = None,
    nature: Optional[NaturePolicy] = None,
    runs: int = SIMULATION_RUNS,
    horizon: int = SIMULATION_HORIZON,
    seed: int = SIMULATION_SEED,
    labels: Optional[List[str]] = None,
) -> SimulationReport:
    """
    Monte-Carlo estimate of the accumulated rewards of a strategy under a fixed nature.

    All runs advance together. A mixture component is drawn once per run; counting and randomised
    strategies choose by step bucket. A run stops at the horizon or when it sits in a terminal
    state past the last bounded step.

    Args:
        model (Imdp): Model to simulate.
        strategy (AnyStrategy): Counting, randomised or mixture strategy.
        structures (Sequence[str]): Reward structures to accumulate.
        bounds (Optional[Sequence[Optional[int]]]): Step bound per structure; unbounded by default.
        nature (Optional[NaturePolicy]): Fixed nature; adversarial witnesses by default.
        runs (int): Number of paths.
        horizon (int): Maximum path length.
        seed (int): Master seed; strategy and nature draws use independent child streams.
        labels (Optional[List[str]]): Report labels; the structure names by default.

    Returns:
        SimulationReport: Sample means with 95% normal-approximation half-widths.
    """
    nature = nature or NaturePolicy()
    bounds = list(bounds) if bounds is not None else [None] * len(structures)
    compiled = compile_model(model)
    components, probabilities = mixture_components(strategy)
    k_max = max([k for k in bounds if k is not None] + [c.k_max for c in components] + [0])
    resolvers = component_resolvers(compiled, components, nature, k_max)
    policies = [[row_policy(compiled, c, b) for b in range(k_max + 1)] for c in components]

    terminal = np.zeros(compiled.n_states, dtype=bool)
    for state in terminal_states(model):
        terminal[model.index_of(state)] = True
    rewards = np.vstack([compiled.reward_vector(name) for name in structures])
    limits = np.array([np.inf if k is None else k for k in bounds])

    strategy_seed, nature_seed = np.random.SeedSequence(seed).spawn(2)
    strategy_rng = np.random.default_rng(strategy_seed)
    nature_rng = np.random.default_rng(nature_seed)

    component = strategy_rng.choice(len(components), size=runs, p=np.asarray(probabilities))
    state = np.full(runs, compiled.initial, dtype=np.int64)
    totals = np.zeros((len(structures), runs))
    alive = np.ones(runs, dtype=bool)

    for step in range(horizon):
        bucket = min(step, k_max)
        if bucket == k_max:
            alive &= ~terminal[state]
        if not alive.any():
            break
        for c in range(len(components)):
            active = np.flatnonzero(alive & (component == c))
            if active.size == 0:
                continue
            rows = _sample_rows(compiled, policies[c][bucket], state[active], strategy_rng)
            counted = (step < limits)[:, None]
            totals[:, active] += np.where(counted, rewards[:, rows], 0.0)
            state[active] = _sample_successors(
                compiled, resolvers[c].witnesses(bucket), rows, nature_rng
            )
    else:
        if alive.any():
            logger.warning(
                "Simulation horizon reached before absorption", horizon=horizon, unfinished=int(alive.sum())
            )

    means = totals.mean(axis=1)
    spread = totals.std(axis=1, ddof=1) if runs > 1 else np.zeros(len(structures))
    half_widths = CONFIDENCE_Z * spread / np.sqrt(runs)
    logger.info("Simulation finished", runs=runs, means=means.tolist())
    return SimulationReport(
        labels=labels or list(structures),
        means=means.tolist(),
        half_widths=half_widths.tolist(),
        runs=runs,
        horizon=horizon,
        seed=seed,
    )
