from typing import List, Optional, Tuple

from pydantic import Field

from app.utils.message_utils import load_yaml_resource

from .base import BaseModel

Cell = Tuple[int, int]


class ClosedCell(BaseModel):
    x: int = Field(..., description="Column.")
    y: int = Field(..., description="Row.")
    penalty: float = Field(..., description="Penalty paid for each visit.")


class AntgConfig(BaseModel):
    """Museum layout: an n x n grid of exhibitions, some of them closed."""

    n: int = Field(14, description="Grid size.")
    entrance: Cell = Field((0, 0), description="Start cell.")
    exit: Optional[Cell] = Field(None, description="Exit cell; (n-1, n-1) when omitted.")
    closed_cells: List[ClosedCell] = Field(default_factory=list, description="Closed exhibitions.")

    @property
    def exit_cell(self) -> Cell:
        return self.exit if self.exit is not None else (self.n - 1, self.n - 1)

    @classmethod
    def from_layout(cls, layout: dict) -> "AntgConfig":
        """Build from a layout document whose closed cells may be grouped into column ranges."""
        cells = [ClosedCell(**cell) for cell in layout.get("closed_cells", [])]
        for column in layout.get("closed_columns", []):
            first, last = column["rows"]
            cells.extend(
                ClosedCell(x=column["column"], y=y, penalty=column["penalty"])
                for y in range(first, last + 1)
            )
        return cls(
            n=layout["n"],
            entrance=tuple(layout.get("entrance", (0, 0))),
            exit=tuple(layout["exit"]) if layout.get("exit") is not None else None,
            closed_cells=cells,
        )

    @classmethod
    def default(cls) -> "AntgConfig":
        return cls.from_layout(load_yaml_resource("antg_n14.yaml"))


class GridConfig(BaseModel):
    """Robot workspace partitioned into cells, with one target region."""

    rows: int = Field(..., description="Number of rows.")
    cols: int = Field(..., description="Number of columns.")
    obstacles: List[Cell] = Field(default_factory=list, description="Blocked cells (x, y).")
    target: Cell = Field(..., description="Cell where the robot stops and enters the goal.")
    start: Cell = Field((0, 0), description="Initial cell.")
    forward_prob: float = Field(0.8, description="Nominal probability of moving as intended.")
    interval_noise: float = Field(0.0, description="Half-width of every probability interval.")
