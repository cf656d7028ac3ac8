"""Readers for the qfbm CLI file formats.

CSV files start with ``# key=value`` metadata lines followed by a header row;
field frames may instead be raw little-endian float64 grids with a ``.hdr``
text sidecar.  Schema problems raise :class:`SchemaError`, which the script
entry points turn into a nonzero exit.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["SchemaError", "read_meta", "read_table", "read_frame"]


class SchemaError(Exception):
    pass


def _parse_meta_lines(lines) -> dict:
    meta = {}
    for line in lines:
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if "=" in body:
            key, _, value = body.partition("=")
            meta[key.strip()] = value.strip()
    return meta


def read_meta(path) -> dict:
    with open(path) as handle:
        return _parse_meta_lines(handle)


def read_table(path, required_columns) -> tuple[dict, dict]:
    """Parse a metadata-headed CSV into (meta, column arrays).

    Missing files, missing columns, or an empty body raise SchemaError.
    """
    try:
        with open(path) as handle:
            lines = [l.rstrip("\n") for l in handle]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    meta = _parse_meta_lines(lines)
    body = [l for l in lines if l and not l.startswith("#")]
    if not body:
        raise SchemaError(f"{path}: no header row")
    header = [c.strip() for c in body[0].split(",")]
    missing = [c for c in required_columns if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing} (have {header})")
    rows = body[1:]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    columns = {name: [] for name in header}
    for row in rows:
        parts = row.split(",")
        if len(parts) != len(header):
            raise SchemaError(f"{path}: row has {len(parts)} fields, expected {len(header)}")
        for name, part in zip(header, parts):
            columns[name].append(part)
    out = {}
    for name, vals in columns.items():
        try:
            out[name] = np.array([float(v) if v != "" else np.nan for v in vals])
        except ValueError:
            out[name] = np.array(vals)
    return meta, out


def read_frame(path) -> tuple[dict, np.ndarray]:
    """Load one field frame (CSV or binary + sidecar) as (meta, values grid)."""
    path = os.fspath(path)
    if path.endswith(".bin"):
        try:
            with open(path + ".hdr") as handle:
                meta = _parse_meta_lines(handle)
        except OSError as exc:
            raise SchemaError(f"missing sidecar for {path}: {exc}") from exc
        for key in ("n_theta", "n_phi", "t", "dtype"):
            if key not in meta:
                raise SchemaError(f"{path}.hdr: missing {key}")
        if meta["dtype"] != "<f8":
            raise SchemaError(f"{path}: unsupported dtype {meta['dtype']}")
        n_theta, n_phi = int(meta["n_theta"]), int(meta["n_phi"])
        raw = np.fromfile(path, dtype="<f8")
        if raw.size != n_theta * n_phi:
            raise SchemaError(
                f"{path}: {raw.size} values but header says {n_theta}x{n_phi}")
        return meta, raw.reshape(n_theta, n_phi)
    meta, cols = read_table(path, ("theta", "phi", "value"))
    for key in ("n_theta", "n_phi", "t"):
        if key not in meta:
            raise SchemaError(f"{path}: missing {key} in metadata")
    n_theta, n_phi = int(meta["n_theta"]), int(meta["n_phi"])
    if cols["value"].size != n_theta * n_phi:
        raise SchemaError(f"{path}: {cols['value'].size} rows but header says {n_theta}x{n_phi}")
    return meta, cols["value"].reshape(n_theta, n_phi)
