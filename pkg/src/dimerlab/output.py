"""Deterministic result emission: CSV/JSON writers and the run manifest.

Files are written atomically (temp file + rename).  Reals use 17 significant
digits with '.' decimal so CSV output round-trips exactly and is
byte-identical across reruns of the same configuration.
"""

from __future__ import annotations

import json
import os
import tempfile

SCHEMA_VERSION = 1


def fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(cell) for cell in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: str, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_manifest(
    path: str, command: str, params: dict, seed: int, outputs: list[str],
    wall_time_s: float,
) -> None:
    write_json(
        path,
        {
            "command": command,
            "params": params,
            "seed": seed,
            "outputs": outputs,
            "wall_time_s": wall_time_s,
        },
    )
