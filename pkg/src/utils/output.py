"""
Table writers (CSV and JSON lines) and the plain-text design dump.
"""

import csv
import json
import logging
import sys
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, TextIO

import numpy as np

from .design_sim import PoolingDesign, incidence_from_pairs
from .errors import ParameterError
from .models import DesignKind

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DESIGN_HEADER = "# noisygt-design v1"
FORMATS = ("csv", "jsonl")


# ── Tables ─────────────────────────────────────────────────────────────────────


def _plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    return value


class TableWriter:
    """
    Row-at-a-time writer for CSV or JSON lines.

    CSV output starts with ``#`` comment lines recording the tool version,
    schema version, command, flags and seed, followed by one header line.
    Rows are flushed as they are written.
    """

    def __init__(
        self,
        stream: TextIO,
        fields: list[str],
        fmt: str = "csv",
        meta: Optional[dict[str, Any]] = None,
    ):
        if fmt not in FORMATS:
            raise ParameterError(f"Unknown output format: {fmt}")
        self.stream = stream
        self.fields = fields
        self.fmt = fmt
        self.rows_written = 0

        if fmt == "csv":
            for key, value in (meta or {}).items():
                stream.write(f"# {key}: {value}\n")
            self._csv = csv.DictWriter(
                stream, fieldnames=fields, extrasaction="ignore", lineterminator="\n"
            )
            self._csv.writeheader()
        stream.flush()

    def write_row(self, row: dict[str, Any]) -> None:
        clean = {key: _plain(row.get(key)) for key in self.fields}
        if self.fmt == "csv":
            self._csv.writerow({k: "" if v is None else v for k, v in clean.items()})
        else:
            self.stream.write(json.dumps(clean) + "\n")
        self.stream.flush()
        self.rows_written += 1

    def write_rows(self, rows: Iterable[dict[str, Any]]) -> None:
        for row in rows:
            self.write_row(row)


@contextmanager
def open_output(path: Optional[Path]) -> Iterator[TextIO]:
    """Text stream for ``path``, or stdout (left open) when no path is given."""
    if path is None or str(path) == "-":
        yield sys.stdout
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as stream:
        yield stream
    logger.info(f"Output written to {path}")


def run_header(tool_version: str, command: str, flags: dict[str, Any]) -> dict[str, Any]:
    """Comment-header fields written above CSV tables."""
    shown = " ".join(
        f"--{key.replace('_', '-')}={_flag_text(value)}"
        for key, value in sorted(flags.items())
        if value is not None
    )
    header = {
        "noisygt": tool_version,
        "schema": SCHEMA_VERSION,
        "command": command,
        "flags": shown,
    }
    if "seed" in flags:
        header["seed"] = flags["seed"]
    return header


def _flag_text(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(str(_plain(v)) for v in value)
    return str(_plain(value))


# ── Design dump ────────────────────────────────────────────────────────────────


def write_design(design: PoolingDesign, path: Path) -> None:
    """
    Write a design as text: a versioned header, one ``key=value`` line, then
    one line per item listing its sorted test indices.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        handle.write(DESIGN_HEADER + "\n")
        handle.write(
            f"n={design.n} m={design.m} delta={design.delta} "
            f"kind={design.kind.value} seed={design.seed}\n"
        )
        for tests in design.item_tests:
            handle.write(" ".join(str(int(t)) for t in tests) + "\n")
    logger.info(f"Design written to {path}")


def read_design(path: Path) -> PoolingDesign:
    """Load a design written by ``write_design``."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != DESIGN_HEADER:
        raise ParameterError(f"{path} is not a noisygt design file")

    fields = dict(part.split("=", 1) for part in lines[1].split())
    n, m = int(fields["n"]), int(fields["m"])
    kind = DesignKind(fields["kind"])
    delta = int(fields["delta"]) if kind is DesignKind.CONSTANT_COLUMN else float(fields["delta"])

    item_lines = lines[2 : 2 + n]
    if len(item_lines) != n:
        raise ParameterError(f"{path} lists {len(item_lines)} items, header says {n}")
    tests = [np.array(line.split(), dtype=np.int64) for line in item_lines]
    rows = np.repeat(np.arange(n), [t.size for t in tests])
    cols = np.concatenate(tests) if tests else np.array([], dtype=np.int64)
    return PoolingDesign(
        n=n,
        m=m,
        delta=delta,
        kind=kind,
        seed=int(fields["seed"]),
        incidence=incidence_from_pairs(n, m, rows, cols),
    )
