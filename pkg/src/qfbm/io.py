"""Atomic file output and CSV metadata helpers.

Output files carry their full run configuration as ``# key=value`` comment
lines so any result can be reproduced bit-exactly from its own header.
Writes go to a temporary file in the target directory followed by an atomic
rename, so no command leaves partial output behind on error.
"""

from __future__ import annotations

import os
import tempfile

__all__ = ["atomic_write_text", "atomic_write_bytes", "fmt", "meta_lines", "parse_meta"]


def _atomic_write(path, data, mode: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    _atomic_write(path, text, "w")


def atomic_write_bytes(path, payload: bytes) -> None:
    _atomic_write(path, payload, "wb")


def fmt(value) -> str:
    """Round-trip formatting: floats use repr so parsing recovers them exactly."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def meta_lines(metadata: dict) -> str:
    return "".join(f"# {k}={fmt(v)}\n" for k, v in metadata.items())


def parse_meta(text: str) -> dict:
    """Read ``# key=value`` comment lines from the head of a CSV payload."""
    meta = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if "=" in body:
            key, _, value = body.partition("=")
            meta[key.strip()] = value.strip()
    return meta
