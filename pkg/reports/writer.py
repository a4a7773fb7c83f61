"""
writer.py - Write result tables as CSV or JSON

Every subcommand hands over one or more Table objects. CSV output starts
each table with a single '#' comment line (subcommand, parameters and
conventions), then the header row, then the data. Floats are written with
repr(), the shortest text that reads back to the same number, so equal
inputs always give byte-identical files.
"""

import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json')


@dataclass
class Table:
    name: str
    columns: List[str]
    rows: List[List[Any]]
    meta: Dict[str, Any] = field(default_factory=dict)


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (tuple, list)):
        return ' '.join(_cell(v) for v in value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and value != value:
        return None
    if isinstance(value, float) and value in (float('inf'), float('-inf')):
        return str(value)
    if isinstance(value, (tuple, list)):
        return [_json_value(v) for v in value]
    return value


def _meta_line(table: Table) -> str:
    parts = [table.name] + [f"{k}={_cell(v)}" for k, v in table.meta.items()]
    return '# ' + '; '.join(parts)


def render(tables: Sequence[Table], fmt: str = 'csv') -> str:
    """Render tables to text in the requested format."""
    if fmt not in FORMATS:
        raise ValueError(f"Unknown output format '{fmt}' (use csv or json)")
    if fmt == 'json':
        payload = [
            {
                'name': t.name,
                'meta': {k: _json_value(v) for k, v in t.meta.items()},
                'columns': t.columns,
                'rows': [[_json_value(v) for v in row] for row in t.rows],
            }
            for t in tables
        ]
        return json.dumps(payload if len(payload) > 1 else payload[0], indent=2) + '\n'

    buffer = io.StringIO()
    for i, table in enumerate(tables):
        if i:
            buffer.write('\n')
        buffer.write(_meta_line(table) + '\n')
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def render_document(document: Dict[str, Any]) -> str:
    """A plain JSON document (layouts, kernels) with stable key order."""
    return json.dumps(document, indent=2) + '\n'


def emit(text: str, out: Optional[str] = None) -> None:
    """Write to a file, or to stdout when out is None or '-'."""
    if out in (None, '-'):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    logger.info(f"Wrote {out}")
