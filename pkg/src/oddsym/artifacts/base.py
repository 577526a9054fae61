import json
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any

import numpy as np
import polars as pl

# 1 + 16 decimals in scientific notation: 17 significant digits
CSV_FLOAT_PRECISION = 16


def _to_plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


class ArtifactStore(ABC):
    """Abstract base class for the output location of an experiment run"""

    def __init__(self, root: str) -> None:
        self.root = root.rstrip("/")
        self.written: list[str] = []

    @abstractmethod
    def contains(self, path: str) -> bool:
        """Whether an artifact is stored at path"""

    @abstractmethod
    def prepare(self) -> None:
        """Make the run location ready to receive artifacts"""

    @abstractmethod
    def delete(self, path: str) -> None:
        """Delete one stored artifact"""

    @abstractmethod
    def open(self, path: str, mode: str) -> Any:
        """File object for an artifact; text modes read and write UTF-8"""

    def path(self, name: str) -> str:
        return f"{self.root}/{name}"

    def write_text(self, name: str, text: str) -> str:
        path = self.path(name)
        with self.open(path, "w") as file:
            file.write(text)
        self.written.append(path)
        return path

    def write_json(self, name: str, record: dict[str, Any]) -> str:
        return self.write_text(name, json.dumps(record, indent=2, sort_keys=True, default=_to_plain) + "\n")

    def write_table(self, name: str, frame: pl.DataFrame) -> str:
        text = frame.write_csv(
            None, float_scientific=True, float_precision=CSV_FLOAT_PRECISION, line_terminator="\n"
        )
        return self.write_text(name, text)

    def discard(self) -> None:
        """Remove every file written through this store"""
        for path in reversed(self.written):
            if self.contains(path):
                self.delete(path)
        self.written.clear()
