"""Pseudo-spectral RK4 solver for effective PDEs and error maps against ground truth."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .discovery import SnapshotDataset, SparseModel, TermLibrary
from .errors import GridMismatch, Unstable
from .field import GridField, wavenumbers


@dataclass
class SolverConfig:
    """``substeps`` RK4 steps per dataset step, so the substep always divides dt."""

    substeps: int = 10
    dealias: bool = True
    integrating_factor: bool = True
    blowup: float = 1e3

    def __post_init__(self):
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise ValueError("substeps must be a positive integer")


@dataclass
class ErrorMap:
    values: np.ndarray  # (N, T+1)
    normalizer: np.ndarray  # (T+1,)


class _Rhs:
    """Split of ``-c u_x + F(u)`` into a diagonal linear symbol and a nonlinear part."""

    def __init__(self, model: SparseModel, N: int, L: float, c: float, dealias: bool):
        lib = model.library or TermLibrary.default()
        kappa = (2 * math.pi / L) * wavenumbers(N).astype(float)
        self.ik = 1j * kappa
        self.ik_odd = self.ik.copy()
        self.ik_odd[N // 2] = 0.0
        self.linear = -c * self.ik_odd
        self.nonlinear = []
        for term, coef in zip(lib.terms, model.coefficients):
            if coef == 0.0:
                continue
            if len(term) == 1:
                self.linear = self.linear + coef * self._symbol(term[0])
            else:
                self.nonlinear.append((coef, term))
        self.orders = sorted({m for _, t in self.nonlinear for m in t})
        self.mask = np.abs(wavenumbers(N)) < N / 3 if dealias else np.ones(N, dtype=bool)

    def _symbol(self, m):
        return (self.ik_odd if m % 2 else self.ik) ** m

    def nonlinear_hat(self, uh):
        if not self.nonlinear:
            return np.zeros_like(uh)
        d = {m: np.fft.ifft(uh * self._symbol(m)).real for m in self.orders}
        acc = np.zeros(uh.shape[0])
        for coef, (a, b) in self.nonlinear:
            acc += coef * d[a] * d[b]
        return np.fft.fft(acc) * self.mask

    def full_hat(self, uh):
        return self.linear * uh + self.nonlinear_hat(uh)


def solve_effective(model: SparseModel, ic: GridField, T: float, cfg: SolverConfig | None = None,
                    meta: dict | None = None) -> SnapshotDataset:
    """Integrate ``u_t = -c u_x + F(u)`` and return snapshots every ``ic.spec.dt``."""
    cfg = cfg or SolverConfig()
    spec = ic.spec
    if not T > 0:
        raise ValueError("T must be positive")
    steps = int(round(T / spec.dt))
    if abs(steps * spec.dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T={T} is not a multiple of dt={spec.dt}")
    rhs = _Rhs(model, spec.N, spec.L, spec.c, cfg.dealias)
    h = spec.dt / cfg.substeps
    uh = np.fft.fft(ic.values).astype(np.complex128)
    bound = cfg.blowup * max(np.max(np.abs(ic.values)), 1e-300)
    out = np.empty((spec.N, steps + 1))
    out[:, 0] = ic.values
    with np.errstate(over="ignore", invalid="ignore"):
        _integrate(rhs, cfg, uh, out, steps, h, bound, ic.time, spec.dt)
    info = {"model": model.as_dict(), "solver": "rk4-if" if cfg.integrating_factor else "rk4",
            "substeps": cfg.substeps, "dealias": cfg.dealias}
    info.update(meta or {})
    return SnapshotDataset(out, spec, info, t0=ic.time)


def _integrate(rhs, cfg, uh, out, steps, h, bound, t0, dt):
    if cfg.integrating_factor:
        e_half = np.exp(rhs.linear * h / 2)
        e_full = e_half * e_half
    for m in range(1, steps + 1):
        for _ in range(cfg.substeps):
            if cfg.integrating_factor:
                # Lawson RK4: exact propagation of the linear symbol
                k1 = rhs.nonlinear_hat(uh)
                k2 = rhs.nonlinear_hat(e_half * (uh + 0.5 * h * k1))
                k3 = rhs.nonlinear_hat(e_half * uh + 0.5 * h * k2)
                k4 = rhs.nonlinear_hat(e_full * uh + h * e_half * k3)
                uh = e_full * uh + (h / 6) * (e_full * k1 + 2 * e_half * (k2 + k3) + k4)
            else:
                k1 = rhs.full_hat(uh)
                k2 = rhs.full_hat(uh + 0.5 * h * k1)
                k3 = rhs.full_hat(uh + 0.5 * h * k2)
                k4 = rhs.full_hat(uh + h * k3)
                uh = uh + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        u = np.fft.ifft(uh).real
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > bound:
            raise Unstable(f"solution exceeded the blow-up bound at t={t0 + m * dt:.4g}")
        out[:, m] = u


def error_map(model_traj: SnapshotDataset, truth_traj: SnapshotDataset) -> ErrorMap:
    a = model_traj.u
    b = truth_traj.u
    if a.shape != b.shape or model_traj.spec != truth_traj.spec or abs(model_traj.t0 - truth_traj.t0) > 1e-12:
        raise GridMismatch(f"trajectories differ in grid or snapshot times: {a.shape} vs {b.shape}")
    gmax = float(np.max(np.abs(b))) if b.size else 0.0
    floor = 1e-3 * gmax if gmax > 0 else 1.0
    norm = np.maximum(np.max(np.abs(b), axis=0), floor)
    return ErrorMap((a - b) / norm, norm)


def coverage_within(e: ErrorMap, tol: float) -> float:
    if not tol > 0:
        raise ValueError("tol must be positive")
    return float(np.mean(np.abs(e.values) <= tol))
