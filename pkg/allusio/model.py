"""Base model for result objects that are serialized by the output formats."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from mashumaro import DataClassDictMixin
from mashumaro.config import BaseConfig


@dataclass(frozen=True)
class ResultDataClass(DataClassDictMixin):
    """Base model for objects written to json, tsv or yaml output.

    This is meant to be subclassed by the scoring and search models.
    """

    @property
    def raw_data(self) -> dict[str, Any]:
        """Return the object as plain data, dropping unset fields."""
        return self.to_dict(omit_none=True)

    class Config(BaseConfig):
        code_generation_options = [
            "TO_DICT_ADD_OMIT_NONE_FLAG",
        ]
