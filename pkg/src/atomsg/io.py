"""Deterministic CSV/JSON writers, run manifests and binary state dumps."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import os
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from atomsg.errors import DomainError

STATE_MAGIC = b"ATSG"
STATE_VERSION = 1
_HEADER = struct.Struct("<4sIIII")


def _cell(v):
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        return repr(v)
    if isinstance(v, Fraction):
        return str(v)
    return "" if v is None else str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(obj))
    return path


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        t = _dt.datetime.fromtimestamp(int(epoch), tz=_dt.timezone.utc)
    else:
        t = _dt.datetime.now(tz=_dt.timezone.utc)
    return t.replace(microsecond=0).isoformat()


@dataclass
class RunManifest:
    """Record of one CLI invocation and digests of everything it wrote.

    Timestamps honour ``SOURCE_DATE_EPOCH`` so that the manifest itself can be
    made byte-reproducible.
    """

    command: str
    parameters: dict
    tool_version: str
    seeds: list = field(default_factory=list)
    started: str = field(default_factory=_timestamp)
    finished: str | None = None
    outputs: dict = field(default_factory=dict)

    def add(self, path) -> Path:
        path = Path(path)
        self.outputs[path.name] = sha256(path)
        return path

    def write(self, directory) -> Path:
        self.finished = _timestamp()
        return write_json(Path(directory) / "manifest.json", {
            "command": self.command,
            "parameters": self.parameters,
            "tool_version": self.tool_version,
            "seeds": self.seeds,
            "started": self.started,
            "finished": self.finished,
            "outputs": dict(sorted(self.outputs.items())),
        })


# -- binary state dumps -----------------------------------------------------------


def write_state(path, amplitudes: np.ndarray) -> Path:
    """Write a (n_x, n_rho, 2) complex array as an ATSG v1 file.

    Layout: magic ``ATSG``, then little-endian u32 version, n_x, n_rho,
    n_spin, followed by complex64 (re, im float32 pairs) in row-major
    (x, rho, spin) order.
    """
    a = np.asarray(amplitudes)
    if a.ndim != 3 or a.shape[2] != 2:
        raise DomainError("state dump expects shape (n_x, n_rho, 2)")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(STATE_MAGIC, STATE_VERSION, *a.shape))
        fh.write(np.ascontiguousarray(a, dtype="<c8").tobytes())
    return path


def read_state(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise DomainError("truncated ATSG header")
        magic, version, nx, nr, ns = _HEADER.unpack(head)
        if magic != STATE_MAGIC:
            raise DomainError(f"bad magic {magic!r}")
        if version != STATE_VERSION:
            raise DomainError(f"unsupported ATSG version {version}")
        data = np.frombuffer(fh.read(), dtype="<c8")
    if data.size != nx * nr * ns:
        raise DomainError("ATSG payload size does not match header")
    return data.reshape(nx, nr, ns)
