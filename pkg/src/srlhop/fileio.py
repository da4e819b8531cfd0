"""Atomic file writes and the checkpoint format."""

from __future__ import annotations

import io
import json
import os
import tempfile
import zipfile

import numpy as np

from .model import Dims, ModelParams, param_shapes

CHECKPOINT_VERSION = 1


def atomic_write(path, data) -> None:
    """Write ``data`` (str or bytes) to a temp file next to ``path``, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def checkpoint_bytes(P: ModelParams, extra: dict | None = None) -> bytes:
    """Flat ``.npz`` dump: one array per tensor plus a JSON manifest."""
    manifest = {
        "format_version": CHECKPOINT_VERSION,
        "dims": P.dims.__dict__,
        "tensors": {k: list(v.shape) for k, v in P.tensors.items()},
        "extra": extra or {},
    }
    arrays = {k: np.ascontiguousarray(v, dtype=np.float64) for k, v in P.tensors.items()}
    arrays["__manifest__"] = np.frombuffer(json.dumps(manifest, sort_keys=True).encode(), dtype=np.uint8)
    # np.savez stamps entries with the wall clock; a fixed date keeps the bytes reproducible
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
        for name, arr in arrays.items():
            info = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            with zf.open(info, "w", force_zip64=True) as fh:
                np.lib.format.write_array(fh, arr, allow_pickle=False)
    return buf.getvalue()


def save_checkpoint(P: ModelParams, path, extra: dict | None = None) -> None:
    atomic_write(path, checkpoint_bytes(P, extra))


def load_checkpoint(path) -> tuple:
    """Return ``(params, manifest)``."""
    with np.load(path) as z:
        manifest = json.loads(bytes(z["__manifest__"]).decode())
        if manifest.get("format_version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {manifest.get('format_version')!r}")
        tensors = {}
        for name, shape in manifest["tensors"].items():
            arr = np.array(z[name])
            if list(arr.shape) != shape:
                raise ValueError(f"{name}: stored shape {arr.shape} disagrees with manifest {shape}")
            tensors[name] = arr
    dims = Dims(**manifest["dims"])
    # the manifest is key-sorted; restore the canonical tensor order
    order = [k for k in param_shapes(dims) if k in tensors]
    tensors = {k: tensors[k] for k in order + sorted(set(tensors) - set(order))}
    return ModelParams(dims, tensors), manifest
