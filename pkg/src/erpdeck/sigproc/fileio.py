"""On-disk formats: a JSON header plus a little-endian float32 blob.

Recording: ``<name>.meta.json`` + ``<name>.f32`` (channel-major).
Epochs:    ``<name>.meta.json`` + ``<name>.f32`` (trials x channels x samples).
"""

import json
import os

import numpy as np

from ..errors import IoError, ValidationError
from .epochs import ContinuousRecording, EpochTensor

FORMAT_VERSION = 1


def _paths(base):
    base = os.fspath(base)
    for suffix in (".meta.json", ".f32"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
    return base, base + ".meta.json", base + ".f32"


def write_json(path, obj):
    try:
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}", field=os.path.basename(path)) from exc


def _write_blob(path, arr):
    try:
        np.ascontiguousarray(arr, dtype="<f4").tofile(path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _read_blob(path, count):
    try:
        arr = np.fromfile(path, dtype="<f4")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if arr.size != count:
        raise ValidationError(f"blob holds {arr.size} values, header expects {count}", field="dims")
    return arr.astype(np.float64)


def _require(meta, key, kind=None):
    if key not in meta:
        raise ValidationError("missing field", field=key)
    val = meta[key]
    if kind is not None and not isinstance(val, kind):
        raise ValidationError(f"expected {kind.__name__ if isinstance(kind, type) else kind}", field=key)
    return val


def save_recording(rec, base):
    base, meta_path, blob_path = _paths(base)
    meta = {
        "format": "erpdeck-recording",
        "version": FORMAT_VERSION,
        "fs": float(rec.fs),
        "channels": list(rec.channels),
        "n_times": int(rec.n_times),
        "n_commands": int(rec.n_commands),
        "events": [
            {"sample": int(s), "command": int(c), "is_target": bool(t), "block": int(b)}
            for s, c, t, b in zip(
                rec.event_samples, rec.event_commands, rec.event_targets, rec.event_blocks
            )
        ],
    }
    write_json(meta_path, meta)
    _write_blob(blob_path, rec.data)
    return meta_path, blob_path


def load_recording(base):
    base, meta_path, blob_path = _paths(base)
    meta = read_json(meta_path)
    if meta.get("format") != "erpdeck-recording":
        raise ValidationError("not a recording header", field="format")
    if meta.get("version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported version {meta.get('version')}", field="version")
    channels = _require(meta, "channels", list)
    n_times = _require(meta, "n_times", int)
    fs = _require(meta, "fs", (int, float))
    events = _require(meta, "events", list)
    for i, ev in enumerate(events):
        for key in ("sample", "command", "is_target"):
            if key not in ev:
                raise ValidationError("missing field", field=f"events[{i}].{key}")
    data = _read_blob(blob_path, len(channels) * n_times).reshape(len(channels), n_times)
    return ContinuousRecording(
        fs=float(fs),
        channels=channels,
        data=data,
        event_samples=[ev["sample"] for ev in events],
        event_commands=[ev["command"] for ev in events],
        event_targets=[ev["is_target"] for ev in events],
        event_blocks=[ev.get("block", i // meta.get("n_commands", 9)) for i, ev in enumerate(events)],
        n_commands=int(meta.get("n_commands", 9)),
    )


def save_epochs(e, base):
    base, meta_path, blob_path = _paths(base)
    meta = {
        "format": "erpdeck-epochs",
        "version": FORMAT_VERSION,
        "fs": float(e.fs),
        "t0_ms": float(e.t0_ms),
        "channels": list(e.channels),
        "dims": list(e.data.shape),
        "labels": [int(v) for v in e.labels],
        "command_codes": [int(v) for v in e.command_codes],
        "blocks": [int(v) for v in e.blocks],
    }
    write_json(meta_path, meta)
    _write_blob(blob_path, e.data)
    return meta_path, blob_path


def load_epochs(base):
    base, meta_path, blob_path = _paths(base)
    meta = read_json(meta_path)
    if meta.get("format") != "erpdeck-epochs":
        raise ValidationError("not an epochs header", field="format")
    dims = _require(meta, "dims", list)
    if len(dims) != 3:
        raise ValidationError("expected 3 dims", field="dims")
    data = _read_blob(blob_path, int(np.prod(dims))).reshape(dims)
    return EpochTensor(
        data=data,
        labels=_require(meta, "labels", list),
        command_codes=_require(meta, "command_codes", list),
        fs=float(_require(meta, "fs", (int, float))),
        t0_ms=float(_require(meta, "t0_ms", (int, float))),
        channels=_require(meta, "channels", list),
        blocks=meta.get("blocks"),
    )


def load_any(base):
    """Load whichever of the two formats ``base`` holds."""
    _, meta_path, _ = _paths(base)
    kind = read_json(meta_path).get("format")
    if kind == "erpdeck-recording":
        return load_recording(base)
    if kind == "erpdeck-epochs":
        return load_epochs(base)
    raise ValidationError(f"unknown format {kind!r}", field="format")
