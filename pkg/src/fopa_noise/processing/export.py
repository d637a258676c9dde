"""
CSV and JSON emission of sweep results, and re-import of written files.
"""

import json
import logging
import math
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from fopa_noise import assumptions
from fopa_noise.errors import MatrixFileError
from fopa_noise.processing.sweep import ResultRow

logger = logging.getLogger(__name__)

_OPTIONAL_COLUMNS = ("gain_db", "nf_linear", "nf_db")


def convert_to_native_types(obj):
    """
    Recursively convert NumPy types to native Python types for JSON serialization.

    Args:
        obj: Object to convert (can be nested dict/list)

    Returns:
        Object with NumPy scalars and arrays replaced by Python equivalents;
        NaN becomes None
    """
    if isinstance(obj, dict):
        return {key: convert_to_native_types(val) for key, val in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [convert_to_native_types(item) for item in obj]
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, (np.floating, float)):
        value = float(obj)
        return None if math.isnan(value) else value
    elif isinstance(obj, np.ndarray):
        return convert_to_native_types(obj.tolist())
    else:
        return obj


def rows_to_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    df = pd.DataFrame([r.as_dict() for r in rows], columns=assumptions.RESULT_COLUMNS)
    for col in _OPTIONAL_COLUMNS:
        df[col] = pd.to_numeric(df[col], errors="coerce")
    df["mode"] = df["mode"].astype(int)
    return df


def write_csv(rows: Sequence[ResultRow], path: Union[str, Path]) -> Path:
    """Fixed column order, 12 significant digits, empty cells for undefined values."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows_to_frame(rows).to_csv(
        path, index=False, float_format=assumptions.CSV_FLOAT_FORMAT, na_rep="", lineterminator="\n"
    )
    logger.info("Wrote %d rows to %s", len(rows), path)
    return path


def write_json(rows: Sequence[ResultRow], path: Union[str, Path]) -> Path:
    """Array of ResultRow objects with the CSV field names."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data_clean = convert_to_native_types([r.as_dict() for r in rows])
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data_clean, f, indent=2, ensure_ascii=False)
    logger.info("Wrote %d rows to %s", len(rows), path)
    return path


def write_results(rows: Sequence[ResultRow], path: Union[str, Path], fmt: str = "csv") -> Path:
    if fmt == "csv":
        return write_csv(rows, path)
    if fmt == "json":
        return write_json(rows, path)
    raise ValueError(f"Unknown output format {fmt!r}")


def _optional(value) -> Union[float, None]:
    if value is None:
        return None
    value = float(value)
    return None if math.isnan(value) else value


def _from_record(record: dict) -> ResultRow:
    flags = record.get("flags")
    if flags is None or (isinstance(flags, float) and math.isnan(flags)):
        flags = ""
    return ResultRow(
        xi=float(record["xi"]),
        theta=float(record["theta"]),
        mode=int(record["mode"]),
        gain_linear=float(record["gain_linear"]),
        gain_db=_optional(record["gain_db"]),
        nf_linear=_optional(record["nf_linear"]),
        nf_db=_optional(record["nf_db"]),
        mean_out=float(record["mean_out"]),
        var_out=float(record["var_out"]),
        method=str(record["method"]),
        flags=str(flags),
    )


def read_results(path: Union[str, Path]) -> List[ResultRow]:
    """Read a CSV or JSON result file written by write_csv / write_json."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".json":
            with open(path, encoding="utf-8") as f:
                records = json.load(f)
        else:
            df = pd.read_csv(path, dtype={"flags": str, "method": str})
            missing = [c for c in assumptions.RESULT_COLUMNS if c not in df.columns]
            if missing:
                raise MatrixFileError(f"{path}: missing columns {missing}")
            records = df.to_dict(orient="records")
        return [_from_record(r) for r in records]
    except (OSError, ValueError, KeyError) as exc:
        if isinstance(exc, MatrixFileError):
            raise
        raise MatrixFileError(f"Cannot read results from {path}: {exc}") from exc


def summarize(rows: Iterable[ResultRow]) -> pd.DataFrame:
    """Min/max gain and NF (dB) per mode; undefined values are skipped."""
    df = rows_to_frame(list(rows))
    if df.empty:
        return pd.DataFrame(columns=["mode", "gain_db_min", "gain_db_max", "nf_db_min", "nf_db_max", "points"])
    summary = df.groupby("mode").agg(
        gain_db_min=("gain_db", "min"),
        gain_db_max=("gain_db", "max"),
        nf_db_min=("nf_db", "min"),
        nf_db_max=("nf_db", "max"),
        points=("xi", "size"),
    )
    return summary.reset_index()
