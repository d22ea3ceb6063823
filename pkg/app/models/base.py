from typing import Any

import orjson
import pydantic


class BaseModel(pydantic.BaseModel):
    """Base model with orjson-backed JSON output."""

    model_config = pydantic.ConfigDict(arbitrary_types_allowed=True)

    def to_json(self, **kwargs: Any) -> bytes:
        return orjson.dumps(
            self.model_dump(mode="json", **kwargs),
            option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY,
        )
