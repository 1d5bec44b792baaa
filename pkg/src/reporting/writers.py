"""
Data Writers
CSV files with an embedded manifest line and their JSON twins.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Sequence

import pandas as pd


FLOAT_FORMAT = '%.17g'
MANIFEST_PREFIX = '# manifest: '


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_csv(path: Path, rows: Sequence[Dict[str, Any]], columns: List[str], header: Dict[str, Any]):
    """
    Write rows as CSV with CRLF line ends and 17 significant digits.

    The first line is `# manifest: {json}` carrying the deterministic run header;
    missing values are written as empty fields.
    """
    frame = pd.DataFrame(list(rows), columns=columns)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(MANIFEST_PREFIX + json.dumps(header, sort_keys=True) + '\r\n')
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, na_rep='', lineterminator='\r\n')


def write_json(path: Path, rows: Sequence[Dict[str, Any]], columns: List[str], header: Dict[str, Any]):
    """JSON twin of a CSV: same rows and ordering, manifest under `manifest`."""
    payload = {
        'manifest': header,
        'columns': columns,
        'rows': [{c: _json_value(row.get(c)) for c in columns} for row in rows],
    }
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, sort_keys=False)
        f.write('\n')


def write_table(out_dir: Path, stem: str, rows: Sequence[Dict[str, Any]], columns: List[str],
                header: Dict[str, Any]) -> List[Path]:
    """Write `<stem>.csv` and `<stem>.json` into out_dir; returns both paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out_dir / f'{stem}.csv', out_dir / f'{stem}.json'
    write_csv(csv_path, rows, columns, header)
    write_json(json_path, rows, columns, header)
    return [csv_path, json_path]


def read_csv(path: Path) -> pd.DataFrame:
    """Read a CSV written by write_csv, skipping the manifest line."""
    return pd.read_csv(path, skiprows=1)


def read_manifest_header(path: Path) -> Dict[str, Any]:
    """Manifest header embedded in the first line of a CSV written by write_csv."""
    with open(path, 'r', encoding='utf-8', newline='') as f:
        first = f.readline().rstrip('\r\n')
    if not first.startswith(MANIFEST_PREFIX):
        raise ValueError(f"{path} has no manifest line")
    return json.loads(first[len(MANIFEST_PREFIX):])
