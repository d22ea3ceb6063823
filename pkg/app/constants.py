from enum import Enum


class Direction(str, Enum):
    MIN = "min"
    MAX = "max"


class Relation(str, Enum):
    GE = ">="
    LE = "<="
    EQ = "="


class ObjectiveKind(str, Enum):
    REACH = "reach"
    REWARD = "reward"


class QueryMode(str, Enum):
    SYNTH = "synth"
    QNT = "qnt"
    PARETO = "pareto"


class Outcome(str, Enum):
    ACHIEVABLE = "achievable"
    UNACHIEVABLE = "unachievable"
    UNDECIDED = "undecided"


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class NatureMode(str, Enum):
    ADVERSARIAL = "adversarial"
    FIXED_VERTEX = "fixed-vertex"
    MIDPOINT = "midpoint"


class StrategyKind(str, Enum):
    COUNTING = "counting"
    MIXTURE = "mixture"
    RANDOMISED = "randomised"


class ExitCode(int, Enum):
    SUCCESS = 0
    UNACHIEVABLE = 1
    INPUT_ERROR = 2
    UNDECIDED = 3


FORMAT_VERSION = 1
NEGATION_PREFIX = "neg:"
REACH_PREFIX = "reach:"
