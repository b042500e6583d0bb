"""Run configuration (YAML file + CLI overrides) and the hardware profile.

Precedence, lowest to highest: built-in defaults, ``--config`` file, CLI flags.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from .channels import parse_kind
from .errors import ConfigError
from .field import ProblemSpec

NOISE_LEVELS = (8.3e-4, 1.6e-3)

DEFAULTS = {
    "problem": {"L": 2 * math.pi, "c": 1.0, "N": 256, "dt": 0.02},
    "noise": {"channel": "depolarizing", "strengths": list(NOISE_LEVELS)},
    "simulate": {"steps": 400, "ic": {"kind": "named", "name": "reference"}, "mode": "both",
                 "snapshot_times": [0.0, 3.0, 6.0], "reconstruction": "projection"},
    "transition": {"qubits": [1, 3, 5, 7], "layers": [320], "p": NOISE_LEVELS[0], "shots": 0, "seed": 0,
                   "readout_error": 0.0, "profile_layers": list(range(0, 401, 20)), "profile_qubits": [1, 3],
                   "damping_gamma": 0.01},
    "datasets": {"count": 54, "holdout": 5, "master_seed": 2024, "seeds": None, "steps": 400, "p": NOISE_LEVELS[0]},
    "discovery": {"threshold": 5e-4, "ridge": 1e-8, "stride_t": 4, "stride_x": 2,
                  "restrict": ["u", "u^2", "u_xx"]},
    "validate": {"tol": 0.1, "substeps": 10},
    "out": "runs/default",
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _check_p(p, where):
    if not isinstance(p, (int, float)) or not 0.0 <= float(p) <= 1.0:
        raise ConfigError(f"{where}: noise strength must lie in [0, 1], got {p!r}")


@dataclass
class RunConfig:
    data: dict

    @classmethod
    def load(cls, path=None, overrides: dict | None = None) -> "RunConfig":
        data = copy.deepcopy(DEFAULTS)
        if path is not None:
            text = Path(path).read_text()
            loaded = yaml.safe_load(text) or {}
            if not isinstance(loaded, dict):
                raise ConfigError(f"{path}: top level must be a mapping")
            data = _merge(data, loaded)
        data = _merge(data, overrides or {})
        cfg = cls(data)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.data[key]

    @property
    def problem(self) -> ProblemSpec:
        p = self.data["problem"]
        return ProblemSpec(L=float(p["L"]), c=float(p["c"]), N=p["N"], dt=float(p["dt"]))

    @property
    def out(self) -> Path:
        return Path(self.data["out"])

    def validate(self):
        p = self.data["problem"]
        N = p.get("N")
        if not isinstance(N, int) or N < 2 or N & (N - 1):
            raise ConfigError(f"problem.N must be a power of two >= 2, got {N!r}")
        if not isinstance(p.get("dt"), (int, float)) or p["dt"] <= 0:
            raise ConfigError(f"problem.dt must be > 0, got {p.get('dt')!r}")
        if not isinstance(p.get("L"), (int, float)) or p["L"] <= 0:
            raise ConfigError(f"problem.L must be > 0, got {p.get('L')!r}")
        self.problem  # full ProblemSpec validation
        try:
            parse_kind(self.data["noise"]["channel"])
        except ValueError as exc:
            raise ConfigError(f"noise.channel: {exc}") from None
        for s in self.data["noise"]["strengths"]:
            _check_p(s, "noise.strengths")
        _check_p(self.data["transition"]["p"], "transition.p")
        _check_p(self.data["datasets"]["p"], "datasets.p")
        _check_p(self.data["transition"]["damping_gamma"], "transition.damping_gamma")
        _check_p(self.data["transition"]["readout_error"], "transition.readout_error")
        if int(self.data["simulate"]["steps"]) < 0:
            raise ConfigError("simulate.steps must be >= 0")
        for n in self.data["transition"]["qubits"]:
            if not 1 <= int(n) <= 10:
                raise ConfigError(f"transition.qubits entries must be in 1..10, got {n!r}")
        if any(int(l) < 0 for l in self.data["transition"]["layers"]):
            raise ConfigError("transition.layers must be >= 0")
        if int(self.data["transition"]["shots"]) < 0:
            raise ConfigError("transition.shots must be >= 0")
        ds = self.data["datasets"]
        if ds.get("seeds") is not None and len(ds["seeds"]) != int(ds["count"]):
            raise ConfigError(f"datasets.seeds has {len(ds['seeds'])} entries but datasets.count is {ds['count']}")
        if int(ds["steps"]) < 2:
            raise ConfigError("datasets.steps must be >= 2")
        if not self.data["discovery"]["threshold"] > 0:
            raise ConfigError("discovery.threshold must be > 0")
        if not self.data["validate"]["tol"] > 0:
            raise ConfigError("validate.tol must be > 0")

    def digest(self) -> str:
        blob = json.dumps(self.data, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class HardwareProfile:
    """Median device figures of a superconducting processor (informational).

    Times in microseconds.
    """

    single_qubit_error: float = 1.56e-3
    two_qubit_error: float = 1.25e-2
    t1_us: float = 48.07
    t2_us: float = 8.108

    def __post_init__(self):
        for name in ("single_qubit_error", "two_qubit_error", "t1_us", "t2_us"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

    def damping_gamma(self, layer_duration_us: float) -> float:
        """Per-layer amplitude-damping strength ``1 - exp(-t_layer/T1)`` for an assumed layer duration."""
        return -math.expm1(-layer_duration_us / self.t1_us)
