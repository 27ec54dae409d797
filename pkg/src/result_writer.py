"""
Result Writer Module - CSV and Console Output for Experiment Results.

Handles:
1. CSV rendering with '#' provenance lines before the header
2. Thread-safe CSV file writing
3. Rich console tables of result rows
"""

import csv
import io
import logging
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from rich import box
from rich.console import Console
from rich.table import Table

logger = logging.getLogger(__name__)
console = Console(stderr=True)

# Thread lock for file operations
_file_lock = threading.Lock()


# ============================================================================
# CONFIGURATION
# ============================================================================

SIGNIFICANT_DIGITS: int = 12

# RFC 4180 line terminator
LINE_TERMINATOR: str = "\r\n"

PROVENANCE_PREFIX: str = "# "


# ============================================================================
# DATA CLASSES
# ============================================================================

@dataclass
class ExperimentResult:
    """Rows of one experiment with their fixed column order and provenance."""
    preset: str
    columns: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    provenance: List[str] = field(default_factory=list)

    def column(self, name: str) -> List[Any]:
        """All values of one column, in row order."""
        return [row[name] for row in self.rows]


def format_value(value: Any) -> str:
    """Render one cell: floats as positional decimals with 12 significant digits, everything else via str()."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return np.format_float_positional(value, precision=SIGNIFICANT_DIGITS, unique=False, fractional=False, trim="-")
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def render_csv(result: ExperimentResult) -> str:
    """
    Render a result as a CSV document.

    Returns:
        Provenance lines, one header row and one line per row
    """
    buffer = io.StringIO(newline="")
    for line in result.provenance:
        buffer.write(f"{PROVENANCE_PREFIX}{line}{LINE_TERMINATOR}")
    writer = csv.writer(buffer, lineterminator=LINE_TERMINATOR)
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([format_value(row[name]) for name in result.columns])
    return buffer.getvalue()


def parse_csv(document: str) -> Tuple[List[str], List[Dict[str, str]]]:
    """
    Split a rendered CSV document back into provenance lines and rows.

    Returns:
        Tuple of (provenance lines, rows as column -> text)
    """
    provenance: List[str] = []
    body: List[str] = []
    for line in document.splitlines():
        if line.startswith("#"):
            provenance.append(line[len(PROVENANCE_PREFIX):] if line.startswith(PROVENANCE_PREFIX) else line[1:])
        elif line:
            body.append(line)
    reader = csv.DictReader(body)
    return provenance, list(reader)


# ============================================================================
# RESULT WRITER CLASS
# ============================================================================

class ResultWriter:
    """
    Writes experiment results as CSV files and shows them as Rich tables.
    """

    def __init__(self, csv_path: Optional[str] = None):
        """
        Initialize the writer.

        Args:
            csv_path: Path to the CSV output file; None writes nothing to disk
        """
        self.csv_path = Path(csv_path) if csv_path else None
        self._write_count = 0

    def write(self, result: ExperimentResult) -> str:
        """
        Render a result and write it to csv_path (replacing the file).

        Returns:
            The CSV document
        """
        document = render_csv(result)
        if self.csv_path is None:
            return document

        with _file_lock:
            self.csv_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.csv_path, "w", newline="", encoding="utf-8") as f:
                f.write(document)
        self._write_count += 1
        logger.info(f"Wrote {len(result.rows)} rows to {self.csv_path}")
        return document

    @property
    def write_count(self) -> int:
        """Number of files written."""
        return self._write_count


def print_result_table(
    result: ExperimentResult,
    title: Optional[str] = None,
    limit: Optional[int] = None,
    target: Optional[Console] = None,
) -> None:
    """Show result rows in a Rich table (the CSV stream never goes through here)."""
    out = target or console
    table = Table(
        title=title or f"{result.preset} results",
        box=box.ROUNDED,
        show_header=True,
        header_style="bold cyan",
    )
    for name in result.columns:
        justify = "left" if name == "strategy" else "right"
        table.add_column(name, justify=justify)

    rows: Sequence[Dict[str, Any]] = result.rows if limit is None else result.rows[:limit]
    for row in rows:
        table.add_row(*(_short(row[name]) for name in result.columns))

    out.print(table)
    if limit is not None and len(result.rows) > limit:
        out.print(f"[dim]... {len(result.rows) - limit} more rows[/dim]")


def _short(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return format_value(value)
