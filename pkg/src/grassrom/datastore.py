"""On-disk formats: raw ``.grom`` matrices, snapshot sets and database manifests.

A ``.grom`` file is the 4 byte magic ``GROM``, a little-endian uint32 format
version, uint64 row and column counts, then float64 little-endian values in
column-major order (each snapshot column is contiguous).
"""
from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, StorageError, ValidationError

MAGIC = b"GROM"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")
MANIFEST_NAME = "manifest.json"
SNAPSHOT_INDEX_NAME = "snapshots.json"


def _frozen(a, ndim=None, name="array"):
    arr = np.array(a, dtype=np.float64, copy=True)
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SnapshotSet:
    """Space-time solution for one parameter value.

    ``data`` is ``(n_x, n_s)``: one column per time stamp in ``times``.
    """

    parameter: float
    times: np.ndarray
    data: np.ndarray
    field_name: str = "u"

    def __post_init__(self):
        times = _frozen(self.times, 1, "times")
        data = _frozen(self.data, 2, "data")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "parameter", float(self.parameter))
        n_x, n_s = data.shape
        if n_x < 1 or n_s < 2:
            raise ValidationError(f"snapshot matrix needs n_x >= 1 and n_s >= 2, got {data.shape}")
        if times.shape[0] != n_s:
            raise ValidationError(f"{times.shape[0]} time stamps for {n_s} snapshots")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise ValidationError("times must be strictly increasing")
        if np.max(np.abs(steps - steps.mean())) > 1e-9 * abs(steps.mean()):
            raise ValidationError("times must be uniformly spaced")
        if not np.all(np.isfinite(data)):
            raise ValidationError(f"non-finite entries in snapshots for parameter {self.parameter}")

    @property
    def n_x(self):
        return self.data.shape[0]

    @property
    def n_s(self):
        return self.data.shape[1]

    def with_data(self, data):
        return SnapshotSet(self.parameter, self.times, data, self.field_name)


@dataclass(frozen=True)
class DatabaseManifest:
    """Index of a trained database directory (paths are relative to it)."""

    parameters: tuple
    field_names: tuple
    ranks: dict
    triplet_paths: dict
    mean_paths: dict
    times: tuple = ()
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        params = tuple(float(p) for p in self.parameters)
        object.__setattr__(self, "parameters", params)
        object.__setattr__(self, "field_names", tuple(self.field_names))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if len(params) < 2:
            raise ValidationError(f"a database needs at least 2 parameters, got {len(params)}")
        if any(b <= a for a, b in zip(params, params[1:])):
            raise ValidationError(f"parameters must be strictly increasing: {list(params)}")
        for name in self.field_names:
            if name not in self.ranks:
                raise ValidationError(f"no truncation rank declared for field {name!r}")
            if len(self.triplet_paths.get(name, ())) != len(params):
                raise ValidationError(f"field {name!r} must list one triplet per parameter")
            if name not in self.mean_paths:
                raise ValidationError(f"no mean field declared for {name!r}")

    def to_json(self):
        return {
            "parameters": list(self.parameters),
            "field_names": list(self.field_names),
            "ranks": {k: int(v) for k, v in self.ranks.items()},
            "triplet_paths": {k: list(v) for k, v in self.triplet_paths.items()},
            "mean_paths": dict(self.mean_paths),
            "times": list(self.times),
            "extra": self.extra,
        }

    @classmethod
    def from_json(cls, doc):
        try:
            return cls(
                parameters=doc["parameters"],
                field_names=doc["field_names"],
                ranks={k: int(v) for k, v in doc["ranks"].items()},
                triplet_paths={k: tuple(v) for k, v in doc["triplet_paths"].items()},
                mean_paths=dict(doc["mean_paths"]),
                times=doc.get("times", ()),
                extra=doc.get("extra", {}),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise FormatError(f"malformed manifest: {exc}") from exc


def write_matrix(path, m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ValidationError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"refusing to write non-finite matrix to {path}")
    rows, cols = m.shape
    payload = np.asfortranarray(m).astype("<f8", copy=False).tobytes(order="F")
    try:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, rows, cols))
            fh.write(payload)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc


def read_matrix(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    expected = _HEADER.size + 8 * rows * cols
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes for {rows}x{cols}, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=rows * cols)
    return values.reshape((rows, cols), order="F").astype(np.float64)


def save_manifest(manifest, directory):
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / MANIFEST_NAME, "w") as fh:
            json.dump(manifest.to_json(), fh, indent=2)
    except OSError as exc:
        raise StorageError(f"cannot write manifest in {directory}: {exc}") from exc


def load_manifest(directory, check_files=True):
    """Load and validate ``manifest.json``.

    With ``check_files`` every referenced matrix is opened and its shape is
    checked against the declared ranks.
    """
    directory = Path(directory)
    try:
        with open(directory / MANIFEST_NAME) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise StorageError(f"cannot read manifest in {directory}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest in {directory} is not valid JSON: {exc}") from exc
    manifest = DatabaseManifest.from_json(doc)
    if check_files:
        _check_database_files(manifest, directory)
    return manifest


def _check_database_files(manifest, directory):
    n_s = len(manifest.times) or None
    for name in manifest.field_names:
        q = manifest.ranks[name]
        mean = read_matrix(directory / manifest.mean_paths[name])
        n_x = mean.shape[0]
        for rel in manifest.triplet_paths[name]:
            phi = read_matrix(directory / rel / "phi.grom")
            sigma = read_matrix(directory / rel / "sigma.grom")
            psi = read_matrix(directory / rel / "psi.grom")
            if phi.shape != (n_x, q) or sigma.shape != (q, 1) or psi.shape[1] != q:
                raise ValidationError(
                    f"triplet {rel} has shapes phi{phi.shape} sigma{sigma.shape} "
                    f"psi{psi.shape}, inconsistent with rank {q} and n_x={n_x}"
                )
            if n_s is not None and psi.shape[0] != n_s:
                raise ValidationError(f"triplet {rel}: psi has {psi.shape[0]} rows, expected {n_s}")


def write_snapshot_sets(directory, sets):
    """Write one ``snap_###.grom`` per set plus a ``snapshots.json`` index."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, s in enumerate(sets):
        name = f"snap_{i:03d}.grom"
        write_matrix(directory / name, s.data)
        entries.append({"parameter": s.parameter, "field_name": s.field_name,
                        "times": s.times.tolist(), "path": name})
    _atomic_json(directory / SNAPSHOT_INDEX_NAME, {"snapshots": entries})


def read_snapshot_sets(directory):
    directory = Path(directory)
    try:
        with open(directory / SNAPSHOT_INDEX_NAME) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise StorageError(f"no snapshot index in {directory}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"snapshot index in {directory} is not valid JSON: {exc}") from exc
    return [
        SnapshotSet(e["parameter"], e["times"], read_matrix(directory / e["path"]), e["field_name"])
        for e in doc["snapshots"]
    ]


def _atomic_json(path, doc):
    tmp = str(path) + ".tmp"
    try:
        with open(tmp, "w") as fh:
            json.dump(doc, fh, indent=2)
        os.replace(tmp, path)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc
