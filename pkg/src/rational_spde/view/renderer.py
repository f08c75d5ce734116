"""Provide the rendering of experiment results as CSV or JSON text.

Every CSV document starts with a comment line `# config: <json>` recording
the full configuration that produced it, followed by a header row.

Examples:

    >>> from rational_spde.view.renderer import OutputFormat, Renderer, Table

    >>> table = Table(("m", "l2"), ((1, 0.5), (2, 0.25)))
    >>> print(Renderer({"nu": 0.5}).render(table).content, end="")
    # config: {"nu": 0.5}
    m,l2
    1,0.5
    2,0.25

    >>> print(Renderer({}, OutputFormat.JSON).render({"loglik": -1.5}).content, end="")
    {
      "config": {},
      "result": {
        "loglik": -1.5
      }
    }

The module contains the following classes:
- `OutputFormat`: The text formats results are rendered in.
- `Table`: Rows of results under named columns.
- `Document`: Rendered text, written to a file or standard output.
- `Renderer`: Renders tables and summaries with their configuration.
"""

import csv
import io
import json
import logging
import pathlib
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import numpy as np

from rational_spde.errors import ShapeError

logger = logging.getLogger(__name__)

CONFIG_PREFIX: str = "# config: "


class OutputFormat(Enum):
    """The text formats results are rendered in."""

    CSV = "csv"
    JSON = "json"


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (pathlib.Path, Enum)):
        return str(value.value if isinstance(value, Enum) else value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"cannot render {type(value).__name__}")


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, str):
        return value
    return json.dumps(value, default=_plain)


@dataclass(frozen=True)
class Table:
    """Rows of results under named columns.

    Methods:
        records(self) -> list[dict]:
            The rows as column-keyed mappings.
    """

    columns: tuple[str, ...]
    rows: tuple[tuple, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(row) for row in self.rows))
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ShapeError(f"row {row} does not match columns {self.columns}")

    @property
    def records(self) -> list[dict]:
        """The rows as column-keyed mappings."""
        return [dict(zip(self.columns, row)) for row in self.rows]


@dataclass(frozen=True)
class Document:
    """Rendered text.

    Methods:
        write(self, path: pathlib.Path | None) -> None:
            Writes the text to a file, or to standard output without a path.
    """

    content: str

    def write(self, path: pathlib.Path | None = None) -> None:
        """Writes the text to `path`, or to standard output when None."""
        if path is None:
            sys.stdout.write(self.content)
            sys.stdout.flush()
            return
        path.write_text(self.content, encoding="utf-8")
        logger.info("wrote %s", path)


@dataclass(frozen=True)
class Renderer:
    """Renders results together with the configuration that produced them.

    Methods:
        render(self, payload: Table | Mapping) -> Document:
            Renders a table of rows or a summary mapping.
    """

    config: Mapping[str, Any]
    fmt: OutputFormat = OutputFormat.CSV

    def render(self, payload: "Table | Mapping[str, Any]") -> Document:
        """Renders a table of rows or a summary mapping.

        A mapping rendered as CSV becomes a single row whose columns are its
        keys.

        Args:
            payload (Table | Mapping[str, Any]): The results.

        Returns:
            Document: The text.
        """
        if self.fmt is OutputFormat.JSON:
            result = payload.records if isinstance(payload, Table) else dict(payload)
            document = {"config": dict(self.config), "result": result}
            return Document(json.dumps(document, indent=2, default=_plain) + "\n")
        if not isinstance(payload, Table):
            payload = Table(tuple(payload), (tuple(payload.values()),))
        return Document(self._csv(payload))

    def _csv(self, table: Table) -> str:
        buffer = io.StringIO()
        buffer.write(CONFIG_PREFIX + json.dumps(dict(self.config), default=_plain) + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_cell(value) for value in row])
        return buffer.getvalue()
