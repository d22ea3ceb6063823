from environs import Env

env = Env()
env.read_env()

LOG_LEVEL = env.log_level("LOG_LEVEL", "INFO")
LOG_FLOAT_DIGITS: int = env.int("LOG_FLOAT_DIGITS", 6)

# Value iteration
EPSILON: float = env.float("EPSILON", 1e-6)
VI_MAX_ITERATIONS: int = env.int("VI_MAX_ITERATIONS", 10**6)
VI_RELATIVE_RESIDUAL: bool = env.bool("VI_RELATIVE_RESIDUAL", False)
LEXICOGRAPHIC_TOLERANCE: float = env.float("LEXICOGRAPHIC_TOLERANCE", 1e-4)

# Query drivers
SYNTH_MAX_ITERATIONS: int = env.int("SYNTH_MAX_ITERATIONS", 500)
COMPARISON_TOLERANCE: float = env.float("COMPARISON_TOLERANCE", 1e-9)

# Linear programming and geometry
LP_TOLERANCE: float = env.float("LP_TOLERANCE", 1e-9)
SEPARATION_FLOOR: float = env.float("SEPARATION_FLOOR", 1e-6)

# Inner optimization
VERTEX_ENUMERATION_LIMIT: int = env.int("VERTEX_ENUMERATION_LIMIT", 8)

# Strategy runtime
FREQUENCY_TOLERANCE: float = env.float("FREQUENCY_TOLERANCE", 1e-12)
FREQUENCY_MAX_STEPS: int = env.int("FREQUENCY_MAX_STEPS", 10**5)
UNROLL_STATE_LIMIT: int = env.int("UNROLL_STATE_LIMIT", 10**6)
BRUTE_FORCE_STRATEGY_LIMIT: int = env.int("BRUTE_FORCE_STRATEGY_LIMIT", 2**14)

SIMULATION_SEED: int = env.int("SIMULATION_SEED", 0)
SIMULATION_RUNS: int = env.int("SIMULATION_RUNS", 10000)
SIMULATION_HORIZON: int = env.int("SIMULATION_HORIZON", 1000)

# Generators
GRID_MIN_PROBABILITY: float = env.float("GRID_MIN_PROBABILITY", 1e-3)
