"""Plain-text persistence: CSV arrays with JSON metadata headers or sidecars."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .discovery import SnapshotDataset, SparseModel, TermLibrary
from .field import GridField, ProblemSpec
from .quantum import StateVector

FLOAT_FMT = "%.17g"


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default)


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# fields ---------------------------------------------------------------------

def write_field(path, f: GridField, meta: dict | None = None):
    """CSV with columns x,u plus a ``.meta.json`` sidecar (spec, time, extras)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.column_stack([f.x, f.values]), delimiter=",", header="x,u", comments="", fmt=FLOAT_FMT)
    record = {"spec": f.spec.to_dict(), "time": f.time}
    record.update(meta or {})
    write_json(path.with_suffix(".meta.json"), record)
    return path


def read_field(path) -> GridField:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    meta = read_json(path.with_suffix(".meta.json"))
    return GridField(data[:, 1], float(meta["time"]), ProblemSpec.from_dict(meta["spec"]))


# matrices -------------------------------------------------------------------

def write_matrix(path, M, meta: dict | None = None):
    """Dense row-major CSV whose first line is ``# {json metadata}``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = json.dumps(meta or {}, sort_keys=True, default=_json_default)
    np.savetxt(path, np.atleast_2d(np.asarray(M)), delimiter=",", header=header, comments="# ", fmt=FLOAT_FMT)
    return path


def read_matrix(path):
    path = Path(path)
    with path.open() as fh:
        first = fh.readline()
    meta = json.loads(first[2:]) if first.startswith("# ") else {}
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2), meta


# datasets -------------------------------------------------------------------

def write_dataset(directory, ds: SnapshotDataset):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    np.savetxt(directory / "u.csv", ds.u, delimiter=",", fmt=FLOAT_FMT)
    write_json(directory / "meta.json", {"spec": ds.spec.to_dict(), "t0": ds.t0,
                                          "n_snapshots": ds.n_snapshots, "meta": ds.meta})
    return directory


def read_dataset(directory) -> SnapshotDataset:
    directory = Path(directory)
    meta = read_json(directory / "meta.json")
    u = np.loadtxt(directory / "u.csv", delimiter=",", ndmin=2)
    return SnapshotDataset(u, ProblemSpec.from_dict(meta["spec"]), meta.get("meta", {}), t0=float(meta["t0"]))


# models ---------------------------------------------------------------------

def write_model(path, model: SparseModel, extra: dict | None = None):
    record = {"terms": model.as_dict(), "threshold": model.threshold,
              "residual_rms": model.residual_rms, "library": list(model.names)}
    record.update(extra or {})
    return write_json(path, record)


def read_model(path) -> SparseModel:
    rec = read_json(path)
    lib = TermLibrary.default()
    if rec.get("library") and rec["library"] != lib.names:
        raise ValueError("model file refers to a non-default term library")
    m = SparseModel.from_dict(rec["terms"], rec.get("threshold", 5e-4), lib)
    m.residual_rms = rec.get("residual_rms", float("nan"))
    return m


# states (debugging aid) -----------------------------------------------------

def format_state(psi: StateVector) -> str:
    return "".join(f"{j} {a.real:.17g} {a.imag:.17g}\n" for j, a in enumerate(psi.amplitudes))


def parse_state(text: str) -> StateVector:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    amps = np.zeros(len(rows), dtype=np.complex128)
    for j, re, im in rows:
        amps[int(j)] = float(re) + 1j * float(im)
    return StateVector(amps)
