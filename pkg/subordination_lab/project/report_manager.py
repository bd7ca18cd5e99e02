"""
Report writing: CSV series and JSON summaries.

Every file carries the resolved config and the code version. Nothing
run-specific (timestamps, paths, thread counts) is written, so equal
configs give byte-identical files.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from subordination_lab import __version__
from subordination_lab.constants import CSV_FLOAT_FORMAT, REPORT_SCHEMA_VERSION

logger = logging.getLogger(__name__)


def format_cell(value: Any) -> str:
    """Render one CSV cell; floats keep full precision."""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), CSV_FLOAT_FORMAT)
    return str(value)


def to_jsonable(value: Any) -> Any:
    """numpy scalars and arrays to plain JSON values; NaN and inf become null."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class ReportManager:
    """Writes the output files of one command run"""

    def __init__(self, out_dir, command: str, config: Dict[str, Any], version: str = __version__):
        self.out_dir = Path(out_dir)
        self.command = command
        self.config = config
        self.version = version
        self.written: List[str] = []

    def _ensure_out_dir(self):
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def filename(self, name: str, suffix: str) -> str:
        """Output file name for a stem, without directory."""
        return f"{self.command}_{name}{suffix}"

    def header_lines(self) -> List[str]:
        return [
            f"# command: {self.command}",
            f"# version: {self.version}",
            f"# schema: {REPORT_SCHEMA_VERSION}",
            f"# config: {json.dumps(to_jsonable(self.config), sort_keys=True)}",
        ]

    def write_csv(self, name: str, rows: Sequence[Dict[str, Any]],
                  columns: Optional[Sequence[str]] = None) -> str:
        """
        Write rows as CSV below the comment header

        Args:
            name: File stem, prefixed with the command
            rows: One dict per row
            columns: Column order, the keys of the first row by default

        Returns:
            The file name (without directory)
        """
        self._ensure_out_dir()
        columns = list(columns) if columns is not None else (list(rows[0].keys()) if rows else [])
        filename = self.filename(name, '.csv')

        with open(self.out_dir / filename, 'w', encoding='utf-8', newline='') as f:
            for line in self.header_lines():
                f.write(line + '\n')
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_cell(row.get(column)) for column in columns])

        self.written.append(filename)
        logger.info(f"Wrote {filename} ({len(rows)} rows)")
        return filename

    def write_json(self, name: str, payload: Dict[str, Any]) -> str:
        """Write a JSON document with the config and version alongside the payload."""
        self._ensure_out_dir()
        filename = self.filename(name, '.json')
        document = {
            'command': self.command,
            'version': self.version,
            'schema': REPORT_SCHEMA_VERSION,
            'config': self.config,
        }
        document.update(payload)

        with open(self.out_dir / filename, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(to_jsonable(document), f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write('\n')

        self.written.append(filename)
        logger.info(f"Wrote {filename}")
        return filename


def read_csv_rows(filepath) -> List[Dict[str, str]]:
    """Read a report CSV back, skipping the comment header."""
    with open(filepath, 'r', encoding='utf-8', newline='') as f:
        lines = [line for line in f if not line.startswith('#')]
    return list(csv.DictReader(lines))


def read_json(filepath) -> Dict[str, Any]:
    with open(filepath, 'r', encoding='utf-8') as f:
        return json.load(f)
