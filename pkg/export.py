"""
JSON and CSV output.

Floats are written in shortest round-trip form, so identical inputs give
byte-identical files.
"""

import json
import os
import sys
from enum import Enum
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from config import get_logger

logger = get_logger("export")


class ComplexEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, (complex, np.complexfloating)):
            return [float(obj.real), float(obj.imag)]
        if isinstance(obj, np.ndarray):
            if np.iscomplexobj(obj):
                return [[float(z.real), float(z.imag)] for z in obj.ravel()]
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, (tuple, set)):
            return list(obj)
        return super(ComplexEncoder, self).default(obj)


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, cls=ComplexEncoder)


def _ensure_folder(path: str) -> None:
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)


def write_json(path: Optional[str], data: Any) -> None:
    """Write to path, or stdout when path is None."""
    text = to_json(data) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    _ensure_folder(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.debug(f"Wrote JSON {path}")


def _repr_float(x: float) -> str:
    return repr(float(x))


def table_frame(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=list(columns))


def write_table(path: Optional[str], rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> None:
    """CSV with a fixed header; an empty table still gets the header line."""
    df = table_frame(rows, columns)
    if path is None:
        sys.stdout.write(df.to_csv(index=False, float_format=_repr_float, lineterminator="\n"))
        return
    _ensure_folder(path)
    df.to_csv(path, index=False, float_format=_repr_float, lineterminator="\n")
    logger.debug(f"Wrote {len(df)} rows to {path}")


def strand_path_for(out: str) -> str:
    """foo/braid.json -> foo/braid_strands.csv"""
    stem, _ = os.path.splitext(out)
    return f"{stem}_strands.csv"
