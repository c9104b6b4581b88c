"""Utility functions for the qubit Zeno dynamics engine."""

import json
import logging
import math
import os
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pytz

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def get_log_level(default: str = "WARNING") -> str:
    """
    Read the log level from ``ZENO_LOG_LEVEL``.

    Returns:
        str: An upper-case level name; unknown values fall back to ``default``
    """
    level = os.getenv("ZENO_LOG_LEVEL", default).strip().upper()
    if level not in LOG_LEVELS:
        logger.warning("ignoring unknown ZENO_LOG_LEVEL=%r", level)
        return default
    return level


def get_default_jobs() -> int:
    """
    Read the worker count from ``ZENO_JOBS``.

    Returns:
        int: At least 1
    """
    raw = os.getenv("ZENO_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring non-integer ZENO_JOBS=%r", raw)
        return 1


def format_float(value: float) -> str:
    """Shortest text that parses back to the same float."""
    return repr(float(value))


def to_jsonable(value: Any) -> Any:
    """
    Convert numpy scalars/arrays, enums and dataclass dicts to JSON types.

    NaN and infinities become None.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value) if math.isfinite(value) else None
    return value


def sanitize_filename(filename: str) -> str:
    """
    Sanitize a filename by removing invalid characters.

    Args:
        filename: Original filename

    Returns:
        str: Sanitized filename
    """
    valid_chars = "-_.() abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
    sanitized = ''.join(c for c in filename if c in valid_chars)
    return sanitized.replace(' ', '_')


def utc_timestamp() -> str:
    return datetime.now(pytz.UTC).isoformat()


def save_results(
    label: str,
    payload: Dict[str, Any],
    directory: Path = Path("data/runs"),
    table_text: Optional[str] = None,
    suffix: str = ".json",
) -> Path:
    """
    Save one result envelope (or its CSV table) to ``directory``.

    Args:
        label: Run label, used for the file name
        payload: JSON-serializable envelope
        directory: Output directory, created if missing
        table_text: CSV text written instead of the JSON envelope
        suffix: File extension

    Returns:
        Path: Path to the saved file
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    output_path = directory / f"{sanitize_filename(label)}{suffix}"

    with open(output_path, 'w', encoding='utf-8', newline='\n') as f:
        if table_text is not None:
            f.write(table_text)
        else:
            json.dump(to_jsonable(payload), f, indent=2, ensure_ascii=False, allow_nan=False)
            f.write("\n")

    logger.info("saved %s", output_path)
    return output_path
