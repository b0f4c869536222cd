"""
CSV and JSON ingestion/emission.
Data files are observations x features, UTF-8, '.' decimal separator,
optional header row. Output CSVs use '\\n' line endings and minimal quoting.
"""

import json
import logging
import os

import numpy as np
import pandas as pd

from .exceptions import DimensionMismatch, MalformedInput

logger = logging.getLogger(__name__)


def _read_raw(path, header):
    try:
        return pd.read_csv(
            path,
            header=0 if header else None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            encoding='utf-8',
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise MalformedInput(f"Could not parse {path}: {e}", path=str(path))


def read_data_csv(path, header=True):
    """Load a numeric matrix; returns (values, feature names)."""
    frame = _read_raw(path, header)
    if frame.empty:
        raise MalformedInput(f"{path} contains no data rows", path=str(path))

    names = [str(c) for c in frame.columns] if header else [f"x{j + 1}" for j in range(frame.shape[1])]
    values = np.empty(frame.shape, dtype=float)
    for j, column in enumerate(frame.columns):
        parsed = pd.to_numeric(frame[column].str.strip(), errors='coerce')
        bad = parsed.isna().to_numpy() | ~np.isfinite(parsed.to_numpy(dtype=float))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            # rows are reported 1-based, counting data rows only
            raise MalformedInput(
                f"Non-numeric value {frame.iloc[i, j]!r} at row {i + 1}, column {names[j]}",
                row=i + 1, column=names[j], path=str(path))
        values[:, j] = parsed.to_numpy(dtype=float)

    logger.info("Loaded %d observations x %d features from %s", values.shape[0], values.shape[1], path)
    return values, names


def read_labels_csv(path, header=True):
    """Load labels from the last column of a CSV (so partition files can be read back)."""
    frame = _read_raw(path, header)
    if frame.empty:
        raise MalformedInput(f"{path} contains no labels", path=str(path))
    return frame.iloc[:, -1].str.strip().to_numpy()


def read_bandwidths(source, p):
    """'auto' gives None (rule of thumb); otherwise a CSV holding p positive numbers."""
    if source is None or source == 'auto':
        return None
    values, _ = read_data_csv(source, header=False)
    values = values.ravel()
    if values.shape[0] != p:
        raise DimensionMismatch(f"Bandwidth file has {values.shape[0]} values, expected {p}")
    if np.any(values <= 0):
        raise MalformedInput("Bandwidths must be strictly positive", path=str(source))
    return values


def write_csv(frame, path):
    frame.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')
    logger.info("Wrote %s", path)


def _to_builtin(value):
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_builtin(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def to_json(payload):
    return json.dumps(_to_builtin(payload), indent=2, sort_keys=True)


def write_json(payload, path):
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(to_json(payload) + '\n')
    logger.info("Wrote %s", path)


def read_json(path):
    with open(path, encoding='utf-8') as handle:
        return json.load(handle)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
