"""Structured output: CSV series and JSON metadata, written atomically.

Every run directory contains ``series.csv`` (columns n, F, Re_f, Im_f) and
``meta.json`` (schema_version 1); prediction runs add ``predictions.json``.
"""

import json
import os
import tempfile

import numpy as np

__all__ = ["atomic_write_text", "series_to_csv", "write_series_dir", "read_series_csv"]

CSV_HEADER = "n,F,Re_f,Im_f"
META_SCHEMA_VERSION = 1


def atomic_write_text(path, text):
    """Write text to path via a temp file and rename (atomic per run)."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def series_to_csv(series):
    """Render a FidelitySeries as CSV text with the fixed column set."""
    lines = [CSV_HEADER]
    big_f = series.F
    for n, f, F in zip(series.ns, series.f, big_f):
        lines.append(f"{int(n)},{float(F)!r},{float(f.real)!r},{float(f.imag)!r}")
    return "\n".join(lines) + "\n"


def write_series_dir(series, out_dir, predictions=None):
    """Write series.csv + meta.json (+ predictions.json) into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    atomic_write_text(os.path.join(out_dir, "series.csv"), series_to_csv(series))
    meta = dict(series.metadata)
    meta["schema_version"] = META_SCHEMA_VERSION
    atomic_write_text(os.path.join(out_dir, "meta.json"), json.dumps(meta, indent=2, default=str))
    if predictions is not None:
        atomic_write_text(os.path.join(out_dir, "predictions.json"), predictions.to_json())


def read_series_csv(path):
    """Load a series.csv back as (n, F, f) arrays."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    ns = data[:, 0].astype(np.int64)
    big_f = data[:, 1]
    f = data[:, 2] + 1j * data[:, 3]
    return ns, big_f, f
