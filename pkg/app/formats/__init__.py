from .codec import (
    dump_model,
    dump_strategy,
    load_model,
    load_query,
    load_strategy,
    parse_model,
    parse_pareto_csv,
    parse_query,
    parse_strategy,
    pareto_csv,
    read_document,
    write_document,
)
from .generators import gen_antg, gen_grid

__all__ = [
    "read_document",
    "write_document",
    "parse_model",
    "dump_model",
    "load_model",
    "parse_query",
    "load_query",
    "dump_strategy",
    "parse_strategy",
    "load_strategy",
    "pareto_csv",
    "parse_pareto_csv",
    "gen_antg",
    "gen_grid",
]
