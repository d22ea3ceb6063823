from typing import Dict, List, Tuple

from app.config import GRID_MIN_PROBABILITY
from app.errors import GeneratorConfigError
from app.models.generator_models import AntgConfig, Cell, GridConfig
from app.models.imdp_models import Imdp, IntervalRow
from app.utils.logging import get_logger

logger = get_logger("formats", "generators")

ANTG_MIN_SIZE = 10
ANTG_MOVES = {"NE": (1, 1), "SE": (1, -1), "NW": (-1, 1), "SW": (-1, -1)}
ANTG_EXIT_ACTION = "exit"
ANTG_SINK = "sink"
STAY_ACTION = "stay"

GRID_MOVES = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}
GRID_LATERAL = {"N": ("W", "E"), "E": ("N", "S"), "S": ("E", "W"), "W": ("S", "N")}
GRID_HALT = "halt"
GRID_BOUNDARY = "boundary"
GRID_GOAL = "goal"


def cell_id(x: int, y: int) -> str:
    return f"c{x}_{y}"


def attraction(config: AntgConfig, x: int, y: int) -> Tuple[float, float]:
    """Interval weight of a cell: larger towards the centre of the museum."""
    centre = (config.n - 1) / 2
    distance = max(abs(x - centre), abs(y - centre))
    if distance <= config.n / 10:
        return 3.0, 4.0
    if distance <= config.n / 5:
        return 2.0, 2.0
    return 1.0, 1.0


def _check_antg(config: AntgConfig) -> None:
    n = config.n
    if n < ANTG_MIN_SIZE:
        raise GeneratorConfigError(f"museum size must be at least {ANTG_MIN_SIZE}, got {n}")

    def inside(cell: Cell) -> bool:
        return 0 <= cell[0] < n and 0 <= cell[1] < n

    for name, cell in (("entrance", config.entrance), ("exit", config.exit_cell)):
        if not inside(cell):
            raise GeneratorConfigError(f"{name} {cell} lies outside the {n}x{n} grid")
    for closed in config.closed_cells:
        if not inside((closed.x, closed.y)):
            raise GeneratorConfigError(f"closed cell ({closed.x}, {closed.y}) lies outside the grid")
        if closed.penalty < 0:
            raise GeneratorConfigError(f"closed cell ({closed.x}, {closed.y}) has a negative penalty")


def gen_antg(config: AntgConfig) -> Imdp:
    """
    Museum visitor model on an n x n grid.

    Each diagonal choice towards (x', y') ends in (x, y') or (x', y), with probabilities
    proportional to the cells' interval weights. If only one of the two cells is inside the
    grid the move goes there for sure; if neither is, the choice is unavailable. The exit cell
    leads to an absorbing sink. Structure `steps` pays 1 for every action before the sink,
    `penalty` pays a closed cell's penalty for every action leaving it.

    Raises:
        GeneratorConfigError: If the layout is out of range.
    """
    _check_antg(config)
    n = config.n
    penalties = {(c.x, c.y): c.penalty for c in config.closed_cells}
    exit_cell = config.exit_cell

    states = [cell_id(x, y) for x in range(n) for y in range(n)] + [ANTG_SINK]
    enabled: Dict[str, List[str]] = {}
    transitions: Dict[Tuple[str, str], IntervalRow] = {}
    steps: Dict[Tuple[str, str], float] = {}
    penalty: Dict[Tuple[str, str], float] = {}

    def inside(x: int, y: int) -> bool:
        return 0 <= x < n and 0 <= y < n

    for x in range(n):
        for y in range(n):
            sid = cell_id(x, y)
            if (x, y) == exit_cell:
                rows = {ANTG_EXIT_ACTION: {ANTG_SINK: (1.0, 1.0)}}
            else:
                rows = {}
                for action, (dx, dy) in ANTG_MOVES.items():
                    vertical, horizontal = (x, y + dy), (x + dx, y)
                    if inside(*vertical) and inside(*horizontal):
                        l1, u1 = attraction(config, *vertical)
                        l2, u2 = attraction(config, *horizontal)
                        rows[action] = {
                            cell_id(*vertical): (l1 / (l1 + u2), u1 / (u1 + l2)),
                            cell_id(*horizontal): (l2 / (l2 + u1), u2 / (u2 + l1)),
                        }
                    elif inside(*vertical) or inside(*horizontal):
                        target = vertical if inside(*vertical) else horizontal
                        rows[action] = {cell_id(*target): (1.0, 1.0)}
            enabled[sid] = list(rows)
            for action, bounds in rows.items():
                transitions[(sid, action)] = IntervalRow.from_bounds(bounds)
                steps[(sid, action)] = 1.0
                if (x, y) in penalties and penalties[(x, y)] > 0:
                    penalty[(sid, action)] = penalties[(x, y)]

    enabled[ANTG_SINK] = [STAY_ACTION]
    transitions[(ANTG_SINK, STAY_ACTION)] = IntervalRow.from_bounds({ANTG_SINK: (1.0, 1.0)})

    model = Imdp(
        states=states,
        initial=cell_id(*config.entrance),
        actions=list(ANTG_MOVES) + [ANTG_EXIT_ACTION, STAY_ACTION],
        enabled=enabled,
        transitions=transitions,
        rewards={"steps": steps, "penalty": penalty},
    )
    logger.info("Generated museum model", n=n, states=len(states), rows=model.n_rows)
    return model


def grid_id(x: int, y: int) -> str:
    return f"g{x}_{y}"


def _check_grid(config: GridConfig) -> None:
    if config.rows < 1 or config.cols < 1:
        raise GeneratorConfigError("grid needs at least one row and one column")
    if not 0 < config.forward_prob <= 1:
        raise GeneratorConfigError("forward_prob must lie in (0, 1]")
    if config.interval_noise < 0:
        raise GeneratorConfigError("interval_noise must be non-negative")
    obstacles = set(config.obstacles)
    for name, cell in (("target", config.target), ("start", config.start)):
        if not (0 <= cell[0] < config.cols and 0 <= cell[1] < config.rows):
            raise GeneratorConfigError(f"{name} {cell} lies outside the grid")
        if cell in obstacles:
            raise GeneratorConfigError(f"{name} {cell} lies inside an obstacle")


def _interval(nominal: float, noise: float) -> Tuple[float, float]:
    # lower bounds stay positive and never exceed the nominal value
    return max(nominal - noise, min(nominal, GRID_MIN_PROBABILITY)), min(1.0, nominal + noise)


def gen_grid(config: GridConfig) -> Imdp:
    """
    Robot grid world with interval-valued move outcomes.

    A move succeeds with `forward_prob` and slips to either lateral neighbour with the remaining
    mass split evenly; every probability is widened by `interval_noise` and clipped to
    [GRID_MIN_PROBABILITY, 1]. Leaving the grid ends in the absorbing `boundary` state, entering
    an obstacle ends there (obstacles only loop on themselves). The robot stops at the target:
    its only action `halt` enters the absorbing `goal` state. Structure `r_p` pays 1 on that
    goal-entry transition, `r_d` pays 1 for every action that is not a self-loop.

    Raises:
        GeneratorConfigError: If the geometry is invalid.
    """
    _check_grid(config)
    obstacles = set(config.obstacles)
    cells = [(x, y) for x in range(config.cols) for y in range(config.rows)]
    states = [grid_id(x, y) for x, y in cells] + [GRID_BOUNDARY, GRID_GOAL]
    enabled: Dict[str, List[str]] = {}
    transitions: Dict[Tuple[str, str], IntervalRow] = {}
    r_p: Dict[Tuple[str, str], float] = {}
    r_d: Dict[Tuple[str, str], float] = {}

    def landing(x: int, y: int, direction: str) -> str:
        dx, dy = GRID_MOVES[direction]
        nx, ny = x + dx, y + dy
        if 0 <= nx < config.cols and 0 <= ny < config.rows:
            return grid_id(nx, ny)
        return GRID_BOUNDARY

    def halt(sid: str) -> None:
        enabled[sid] = [GRID_HALT]
        transitions[(sid, GRID_HALT)] = IntervalRow.from_bounds({sid: (1.0, 1.0)})

    lateral = (1.0 - config.forward_prob) / 2
    for x, y in cells:
        sid = grid_id(x, y)
        if (x, y) in obstacles:
            halt(sid)
            continue
        if (x, y) == tuple(config.target):
            enabled[sid] = [GRID_HALT]
            transitions[(sid, GRID_HALT)] = IntervalRow.from_bounds({GRID_GOAL: (1.0, 1.0)})
            r_p[(sid, GRID_HALT)] = 1.0
            r_d[(sid, GRID_HALT)] = 1.0
            continue
        actions = []
        for direction in GRID_MOVES:
            nominal: Dict[str, float] = {}
            nominal[landing(x, y, direction)] = config.forward_prob
            for side in GRID_LATERAL[direction]:
                if lateral > 0:
                    target = landing(x, y, side)
                    nominal[target] = nominal.get(target, 0.0) + lateral
            transitions[(sid, direction)] = IntervalRow.from_bounds(
                {t: _interval(p, config.interval_noise) for t, p in nominal.items()}
            )
            r_d[(sid, direction)] = 1.0
            actions.append(direction)
        enabled[sid] = actions
    halt(GRID_BOUNDARY)
    halt(GRID_GOAL)

    model = Imdp(
        states=states,
        initial=grid_id(*config.start),
        actions=list(GRID_MOVES) + [GRID_HALT],
        enabled=enabled,
        transitions=transitions,
        rewards={"r_p": r_p, "r_d": r_d},
    )
    logger.info("Generated grid model", rows=config.rows, cols=config.cols, states=len(states))
    return model
