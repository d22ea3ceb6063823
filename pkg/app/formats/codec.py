from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import orjson

from app.constants import FORMAT_VERSION, StrategyKind
from app.errors import ModelFormatError, QueryFormatError
from app.models.imdp_models import Imdp, IntervalEntry, IntervalRow
from app.models.query_models import Query
from app.models.strategy_models import (
    CountingStrategy,
    MixtureStrategy,
    RandomisedCountingStrategy,
)
from app.utils.logging import get_logger
from app.utils.numbers import parse_probability

logger = get_logger("formats", "codec")

AnyStrategy = Union[CountingStrategy, MixtureStrategy, RandomisedCountingStrategy]
REWARD_KEY_SEPARATOR = ","
CSV_HEADER = "obj1,obj2"


def read_document(path: Union[str, Path]) -> Any:
    """Read and decode a JSON file; decoding errors propagate as orjson.JSONDecodeError."""
    with open(path, "rb") as file:
        return orjson.loads(file.read())


def write_document(path: Union[str, Path], document: Any) -> None:
    with open(path, "wb") as file:
        file.write(orjson.dumps(document, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY))


def _check_version(document: Any, error: type) -> None:
    if not isinstance(document, dict):
        raise error("document must be a JSON object", "$")
    version = document.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise error(f"unsupported format_version {version!r}", "$.format_version")


def _require(document: Dict[str, Any], key: str, kind: type, path: str) -> Any:
    if key not in document:
        raise ModelFormatError(f"missing field {key!r}", path)
    value = document[key]
    if not isinstance(value, kind):
        raise ModelFormatError(f"field {key!r} has the wrong type", f"{path}.{key}")
    return value


def parse_model(document: Any) -> Imdp:
    """
    Build an Imdp from a model document.

    Numbers may be decimals or "p/q" strings; both become floats. Structural problems (missing
    fields, repeated transitions, malformed reward keys) raise ModelFormatError with a JSON path.
    Semantic problems are left to `validate`.
    """
    _check_version(document, ModelFormatError)
    states = _require(document, "states", list, "$")
    initial = _require(document, "initial", str, "$")
    enabled = _require(document, "actions", dict, "$")

    actions: List[str] = []
    for state_actions in enabled.values():
        for action in state_actions:
            if action not in actions:
                actions.append(action)

    entries: Dict[Tuple[str, str], List[IntervalEntry]] = defaultdict(list)
    seen = set()
    for position, transition in enumerate(_require(document, "transitions", list, "$")):
        path = f"$.transitions[{position}]"
        if not isinstance(transition, dict):
            raise ModelFormatError("transition must be an object", path)
        try:
            source, action, target = transition["from"], transition["action"], transition["to"]
            lower, upper = transition["interval"]
            lower, upper = parse_probability(lower), parse_probability(upper)
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise ModelFormatError(f"malformed transition: {e}", path) from e
        if (source, action, target) in seen:
            raise ModelFormatError(f"repeated transition {source} -{action}-> {target}", path)
        seen.add((source, action, target))
        entries[(source, action)].append(IntervalEntry(target=target, lower=lower, upper=upper))

    rewards: Dict[str, Dict[Tuple[str, str], float]] = {}
    for name, values in document.get("rewards", {}).items():
        structure = {}
        for key, value in values.items():
            path = f"$.rewards.{name}.{key}"
            state, separator, action = key.rpartition(REWARD_KEY_SEPARATOR)
            if not separator:
                raise ModelFormatError("reward key must read 'state,action'", path)
            try:
                structure[(state.strip(), action.strip())] = parse_probability(value)
            except (ValueError, ZeroDivisionError) as e:
                raise ModelFormatError(f"malformed reward: {e}", path) from e
        rewards[name] = structure

    return Imdp(
        states=states,
        initial=initial,
        actions=actions,
        enabled={s: list(a) for s, a in enabled.items()},
        transitions={key: IntervalRow(entries=row) for key, row in entries.items()},
        rewards=rewards,
    )


def dump_model(model: Imdp) -> Dict[str, Any]:
    transitions = [
        {"from": state, "action": action, "to": e.target, "interval": [e.lower, e.upper]}
        for state, action, row in model.rows()
        for e in row.entries
    ]
    return {
        "format_version": FORMAT_VERSION,
        "states": list(model.states),
        "initial": model.initial,
        "actions": {s: list(model.enabled.get(s, [])) for s in model.states},
        "transitions": transitions,
        "rewards": {
            name: {f"{s}{REWARD_KEY_SEPARATOR}{a}": v for (s, a), v in values.items()}
            for name, values in model.rewards.items()
        },
    }


def load_model(path: Union[str, Path]) -> Imdp:
    document = read_document(path)
    try:
        return parse_model(document)
    except ModelFormatError as e:
        e.path = f"{path}:{e.path}" if e.path else str(path)
        raise


def parse_query(document: Any) -> Query:
    """Validate a query document; schema errors surface as pydantic ValidationError."""
    _check_version(document, QueryFormatError)
    return Query.model_validate({k: v for k, v in document.items() if k != "format_version"})


def load_query(path: Union[str, Path]) -> Query:
    return parse_query(read_document(path))


def dump_strategy(strategy: AnyStrategy) -> Dict[str, Any]:
    if isinstance(strategy, MixtureStrategy):
        kind = StrategyKind.MIXTURE
    elif isinstance(strategy, RandomisedCountingStrategy):
        kind = StrategyKind.RANDOMISED
    else:
        kind = StrategyKind.COUNTING
    return {"format_version": FORMAT_VERSION, "kind": kind.value, **strategy.model_dump(mode="json")}


def parse_strategy(document: Any) -> AnyStrategy:
    _check_version(document, ModelFormatError)
    body = {k: v for k, v in document.items() if k not in ("format_version", "kind")}
    try:
        kind = StrategyKind(document.get("kind", StrategyKind.COUNTING.value))
    except ValueError as e:
        raise ModelFormatError(f"unknown strategy kind {document.get('kind')!r}", "$.kind") from e
    if kind is StrategyKind.MIXTURE:
        return MixtureStrategy.model_validate(body)
    if kind is StrategyKind.RANDOMISED:
        return RandomisedCountingStrategy.model_validate(body)
    return CountingStrategy.model_validate(body)


def load_strategy(path: Union[str, Path]) -> AnyStrategy:
    return parse_strategy(read_document(path))


def pareto_csv(vertices: Sequence[Sequence[float]]) -> str:
    """Two-column CSV of frontier vertices, ascending in the first objective.

    Floats are written with their shortest round-trip representation.
    """
    lines = [CSV_HEADER]
    for first, second in sorted((float(a), float(b)) for a, b in vertices):
        lines.append(f"{first!r},{second!r}")
    return "\n".join(lines) + "\n"


def parse_pareto_csv(text: str) -> List[List[float]]:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ModelFormatError(f"CSV must start with the header {CSV_HEADER!r}")
    return [[float(v) for v in line.split(",")] for line in lines[1:]]
