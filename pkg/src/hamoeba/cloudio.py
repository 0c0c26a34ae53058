"""Versioned file formats and run manifests.

Clouds are stored as JSON with a ``schema`` field and one packed row
``[p11, Re p12, Im p12, p22]`` per point; matrices as eight reals per
entry row. Every file written through :func:`write_with_manifest` gets a
sibling ``<name>.manifest.json`` recording the tool version, the resolved
configuration, the seed, timestamps, and a digest of the payload, so a
run can be reproduced and its outputs verified byte for byte (timestamps
aside).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import hmodel
from .amoeba import CONVENTIONS, PointCloud

__all__ = [
    "CLOUD_SCHEMA",
    "MATRIX_SCHEMA",
    "MANIFEST_SCHEMA",
    "SchemaError",
    "ConventionMismatch",
    "RunManifest",
    "write_cloud",
    "read_cloud",
    "write_matrices",
    "read_matrices",
    "write_with_manifest",
]

CLOUD_SCHEMA = "hamoeba.cloud.v1"
MATRIX_SCHEMA = "hamoeba.matrices.v1"
MANIFEST_SCHEMA = "hamoeba.manifest.v1"

#: determinant drift allowed for points after a file round trip
_READ_DET_TOL = 1e-6


class SchemaError(ValueError):
    """File does not carry the expected schema or violates an invariant."""


class ConventionMismatch(ValueError):
    """A cloud tagged with one quotient convention was offered to a
    consumer that explicitly requested the other; there is no silent
    conversion."""


def cloud_to_dict(cloud: PointCloud) -> dict:
    return {
        "schema": CLOUD_SCHEMA,
        "convention": cloud.convention,
        "points": [[float(v) for v in row] for row in cloud.packed()],
        "meta": cloud.meta,
    }


def cloud_from_dict(data: dict) -> PointCloud:
    if data.get("schema") != CLOUD_SCHEMA:
        raise SchemaError(f"expected schema {CLOUD_SCHEMA!r}, got {data.get('schema')!r}")
    conv = data.get("convention")
    if conv not in CONVENTIONS:
        raise SchemaError(f"unknown convention tag {conv!r}")
    rows = np.asarray(data.get("points", []), dtype=float)
    if rows.size == 0:
        return PointCloud(points=np.zeros((0, 2, 2), complex), convention=conv,
                          meta=dict(data.get("meta", {})))
    if rows.ndim != 2 or rows.shape[1] != 4:
        raise SchemaError("points must be rows [p11, Re p12, Im p12, p22]")
    pts = hmodel.unpack(rows)
    dets = (rows[:, 0] * rows[:, 3] - rows[:, 1] ** 2 - rows[:, 2] ** 2)
    scale = 1.0 + np.sum(rows * rows, axis=1)
    if np.any(np.abs(dets - 1.0) > _READ_DET_TOL * scale) or np.any(rows[:, 0] <= 0):
        raise SchemaError("point rows violate the determinant-1 invariant")
    pts = hmodel.renormalize(pts)
    return PointCloud(points=pts, convention=conv, meta=dict(data.get("meta", {})))


def write_cloud(path, cloud: PointCloud) -> None:
    Path(path).write_text(json.dumps(cloud_to_dict(cloud)) + "\n")


def read_cloud(path, expect_convention: str | None = None) -> PointCloud:
    cloud = cloud_from_dict(json.loads(Path(path).read_text()))
    if expect_convention is not None and cloud.convention != expect_convention:
        raise ConventionMismatch(
            f"cloud is tagged {cloud.convention!r} but {expect_convention!r} was "
            "requested; re-project the matrices instead of converting clouds"
        )
    return cloud


def matrices_to_dict(mats: np.ndarray, meta: dict | None = None) -> dict:
    mats = np.asarray(mats, dtype=complex).reshape(-1, 2, 2)
    flat = mats.reshape(-1, 4)
    entries = np.stack(
        [flat[:, 0].real, flat[:, 0].imag, flat[:, 1].real, flat[:, 1].imag,
         flat[:, 2].real, flat[:, 2].imag, flat[:, 3].real, flat[:, 3].imag],
        axis=1,
    )
    return {
        "schema": MATRIX_SCHEMA,
        "entries": [[float(v) for v in row] for row in entries],
        "meta": dict(meta or {}),
    }


def matrices_from_dict(data: dict) -> tuple[np.ndarray, dict]:
    if data.get("schema") != MATRIX_SCHEMA:
        raise SchemaError(f"expected schema {MATRIX_SCHEMA!r}, got {data.get('schema')!r}")
    rows = np.asarray(data.get("entries", []), dtype=float)
    if rows.size == 0:
        return np.zeros((0, 2, 2), dtype=complex), dict(data.get("meta", {}))
    if rows.ndim != 2 or rows.shape[1] != 8:
        raise SchemaError("entries must be rows of eight reals")
    mats = (rows[:, 0::2] + 1j * rows[:, 1::2]).reshape(-1, 2, 2)
    return mats, dict(data.get("meta", {}))


def write_matrices(path, mats: np.ndarray, meta: dict | None = None) -> None:
    Path(path).write_text(json.dumps(matrices_to_dict(mats, meta)) + "\n")


def read_matrices(path) -> tuple[np.ndarray, dict]:
    return matrices_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# manifests


@dataclass
class RunManifest:
    tool_version: str
    command: str
    config: dict
    seed: int | None
    started_utc: str
    finished_utc: str
    outputs: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "schema": MANIFEST_SCHEMA,
            "tool_version": self.tool_version,
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "started_utc": self.started_utc,
            "finished_utc": self.finished_utc,
            "outputs": self.outputs,
        }


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_with_manifest(path, payload: str, *, command: str, config: dict,
                        seed: int | None, started_utc: str, tool_version: str) -> Path:
    """Write a text artifact and its sibling manifest; returns the manifest path."""
    path = Path(path)
    data = payload.encode("utf-8")
    path.write_bytes(data)
    manifest = RunManifest(
        tool_version=tool_version,
        command=command,
        config=config,
        seed=seed,
        started_utc=started_utc,
        finished_utc=utc_now(),
        outputs=[{"path": path.name, "sha256": _digest(data), "bytes": len(data)}],
    )
    mpath = path.with_name(path.name + ".manifest.json")
    mpath.write_text(json.dumps(manifest.as_dict(), indent=2) + "\n")
    return mpath
