"""Weight files: ``<name>.model.json`` manifest + ``<name>.weights.f32`` blob.

The blob holds every parameter, then every batchnorm running buffer, in
manifest order as little-endian float32.
"""

import json
import os

import numpy as np

from ..errors import CorruptModel, IoError
from .architectures import build_architecture

MODEL_FORMAT = "erpdeck-model"
MODEL_VERSION = 1


def model_paths(base):
    base = os.fspath(base)
    for suffix in (".model.json", ".weights.f32"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
    return base + ".model.json", base + ".weights.f32"


def manifest(g):
    layers = []
    for n in g.nodes:
        layers.append({
            "name": n.name,
            "kind": n.layer.kind,
            "inputs": list(n.inputs),
            "config": n.layer.config(),
            "output_shape": list(n.shape),
            "params": [{"name": k, "shape": list(n.layer.params[k].shape)} for k in sorted(n.layer.params)],
            "buffers": [{"name": k, "shape": list(n.layer.buffers[k].shape)} for k in sorted(n.layer.buffers)],
        })
    n_values = sum(a.size for _, _, a in g.parameters()) + sum(a.size for _, _, a in g.buffers())
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "architecture": g.name,
        "input_shape": list(g.input_shape),
        "seed": g.seed,
        "param_count": g.param_count,
        "value_count": int(n_values),
        "meta": g.meta,
        "layers": layers,
    }


def save_weights(g, base):
    """Write manifest and blob; returns the two paths."""
    mpath, wpath = model_paths(base)
    arrays = [a for _, _, a in g.parameters()] + [a for _, _, a in g.buffers()]
    blob = np.concatenate([a.ravel() for a in arrays]) if arrays else np.zeros(0)
    try:
        with open(mpath, "w") as fh:
            json.dump(manifest(g), fh, indent=2, sort_keys=True)
            fh.write("\n")
        np.ascontiguousarray(blob, dtype="<f4").tofile(wpath)
    except OSError as exc:
        raise IoError(f"cannot write model {base}: {exc}") from exc
    return mpath, wpath


def _read(base):
    mpath, wpath = model_paths(base)
    try:
        with open(mpath) as fh:
            man = json.load(fh)
        blob = np.fromfile(wpath, dtype="<f4")
    except OSError as exc:
        raise IoError(f"cannot read model {base}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"manifest is not valid JSON: {exc}") from exc
    if man.get("format") != MODEL_FORMAT:
        raise CorruptModel(f"not an {MODEL_FORMAT} manifest")
    return man, blob


def _check(man, blob):
    declared = sum(int(np.prod(p["shape"])) for l in man["layers"] for p in l["params"])
    buffers = sum(int(np.prod(b["shape"])) for l in man["layers"] for b in l["buffers"])
    if declared != man.get("param_count"):
        raise CorruptModel(f"manifest lists {declared} parameters but declares {man.get('param_count')}")
    if blob.size != declared + buffers or blob.size != man.get("value_count"):
        raise CorruptModel(f"blob holds {blob.size} values, manifest expects {declared + buffers}")


def load_weights(g, base):
    """Fill graph ``g`` in place from a saved model; layouts must agree."""
    man, blob = _read(base)
    _check(man, blob)
    records = {l["name"]: l for l in man["layers"]}
    if [n.name for n in g.nodes] != [l["name"] for l in man["layers"]]:
        raise CorruptModel("manifest layer list does not match the graph")
    pos = 0
    for table in ("params", "buffers"):
        for n in g.nodes:
            store = getattr(n.layer, table)
            rec = records[n.name][table]
            if sorted(store) != [r["name"] for r in rec]:
                raise CorruptModel(f"{n.name}: {table} differ from manifest")
            for r in rec:
                arr = store[r["name"]]
                if list(arr.shape) != r["shape"]:
                    raise CorruptModel(f"{n.name}.{r['name']}: shape {arr.shape} vs manifest {r['shape']}")
                k = arr.size
                arr[...] = blob[pos : pos + k].reshape(arr.shape)
                pos += k
    g.meta.update(man.get("meta", {}))
    return g


def load_model(base, dtype=np.float32):
    """Rebuild the architecture named in the manifest and load its weights."""
    man, _ = _read(base)
    shape = man.get("input_shape", [1, 15, 205])
    g = build_architecture(man["architecture"], channels=shape[1], samples=shape[2],
                           seed=man.get("seed", 0), dtype=dtype)
    return load_weights(g, base)
