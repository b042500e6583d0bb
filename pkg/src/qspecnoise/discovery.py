"""Sparse-regression discovery of the effective right-hand side F in

    u_t + c u_x = F(u, u_x, u_xx, u_xxx, u_xxxx)

The left-hand side is fixed.  F is searched over all monomials of degree <= 2
in u and its first four spatial derivatives, with sequentially thresholded
ridge regression (STLSQ).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
import math
import re

import numpy as np

from .errors import RankDeficient, TooFewSnapshots
from .field import GridField, ProblemSpec, shift_spectrally, wavenumbers

DEFAULT_THRESHOLD = 5e-4
MAX_ORDER = 4


@dataclass
class SnapshotDataset:
    """Samples ``u[i, m] = u(x_i, t_m)`` on a uniform periodic grid, ``t_m = t0 + m*dt``."""

    u: np.ndarray
    spec: ProblemSpec
    meta: dict = field(default_factory=dict)
    t0: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.ndim != 2 or self.u.shape[0] != self.spec.N:
            raise ValueError(f"u must have shape (N={self.spec.N}, T+1), got {self.u.shape}")

    @property
    def n_snapshots(self) -> int:
        return self.u.shape[1]

    @property
    def times(self):
        return self.t0 + self.spec.dt * np.arange(self.n_snapshots)

    def snapshot(self, m: int) -> GridField:
        return GridField(self.u[:, m], float(self.times[m]), self.spec)

    @classmethod
    def from_fields(cls, fields, meta=None) -> "SnapshotDataset":
        fields = list(fields)
        spec = fields[0].spec
        u = np.stack([f.values for f in fields], axis=1)
        return cls(u, spec, dict(meta or {}), t0=fields[0].time)


def term_name(orders) -> str:
    names = ["u" if m == 0 else "u_" + "x" * m for m in orders]
    if len(names) == 1:
        return names[0]
    if names[0] == names[1]:
        return f"{names[0]}^2"
    return "*".join(names)


@dataclass(frozen=True)
class TermLibrary:
    """Ordered candidate terms; each term is a tuple of derivative orders to multiply."""

    terms: tuple

    @classmethod
    def default(cls, max_order: int = MAX_ORDER, max_degree: int = 2) -> "TermLibrary":
        orders = range(max_order + 1)
        terms = []
        for deg in range(1, max_degree + 1):
            terms.extend(combinations_with_replacement(orders, deg))
        return cls(tuple(terms))

    @property
    def names(self) -> list[str]:
        return [term_name(t) for t in self.terms]

    def __len__(self):
        return len(self.terms)

    def index(self, name: str) -> int:
        return self.names.index(normalize_term(name))

    def evaluate(self, derivs) -> np.ndarray:
        """Stack term values; ``derivs[m]`` holds the m-th spatial derivative."""
        cols = []
        for t in self.terms:
            v = derivs[t[0]]
            for m in t[1:]:
                v = v * derivs[m]
            cols.append(v)
        return np.stack(cols, axis=-1)


def normalize_term(name: str) -> str:
    """Accept a few spellings (``u2``, ``u**2``, ``u_x u_xx``) for library terms."""
    parts = [p for p in re.split(r"[\s*]+", name.strip().replace("**", "^")) if p]
    s = "*".join(parts)
    if s in ("u2", "uu", "u*u"):
        return "u^2"
    if len(parts) == 2 and parts[0] == parts[1]:
        return f"{parts[0]}^2"
    if len(parts) == 2:
        key = lambda p: len(p)  # derivative order grows with name length
        return "*".join(sorted(parts, key=key))
    return s


@dataclass
class RegressionConfig:
    ridge: float = 1e-8
    threshold: float = DEFAULT_THRESHOLD
    max_iter: int = 50
    restrict: list | None = None
    stride_t: int = 1
    stride_x: int = 1

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.ridge < 0:
            raise ValueError("ridge parameter must be non-negative")
        if self.stride_t < 1 or self.stride_x < 1:
            raise ValueError("strides must be >= 1")


@dataclass
class SparseModel:
    names: list
    coefficients: np.ndarray
    threshold: float = DEFAULT_THRESHOLD
    residual_rms: float = float("nan")
    library: TermLibrary | None = None

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.library is None:
            lib = TermLibrary.default()
            if lib.names == list(self.names):
                self.library = lib

    @property
    def support(self) -> list[str]:
        return [n for n, c in zip(self.names, self.coefficients) if c != 0.0]

    def as_dict(self, nonzero: bool = True) -> dict:
        return {n: float(c) for n, c in zip(self.names, self.coefficients) if c != 0.0 or not nonzero}

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[list(self.names).index(normalize_term(name))])

    @classmethod
    def from_dict(cls, coeffs: dict, threshold: float = DEFAULT_THRESHOLD, library: TermLibrary | None = None):
        lib = library or TermLibrary.default()
        c = np.zeros(len(lib))
        for name, v in coeffs.items():
            c[lib.index(name)] = v
        return cls(lib.names, c, threshold, library=lib)

    def __str__(self):
        terms = " ".join(f"{c:+.4g} {n}" for n, c in self.as_dict().items())
        return f"u_t + c u_x = {terms or '0'}"


def spectral_derivatives(u, L: float, max_order: int = MAX_ORDER):
    """Derivatives 0..max_order along axis 0 of a periodic sample array."""
    N = u.shape[0]
    kappa = (2 * math.pi / L) * wavenumbers(N).astype(float)
    uh = np.fft.fft(u, axis=0)
    shape = (N,) + (1,) * (u.ndim - 1)
    out = [np.asarray(u, dtype=float)]
    for m in range(1, max_order + 1):
        mult = (1j * kappa) ** m
        if m % 2:
            mult[N // 2] = 0.0  # odd derivative of the Nyquist cosine vanishes on the grid
        out.append(np.fft.ifft(uh * mult.reshape(shape), axis=0).real)
    return out


def differentiate(ds: SnapshotDataset, max_order: int = MAX_ORDER) -> dict:
    """Spatial derivatives (spectral) and time derivatives of a dataset.

    The time derivative is taken in the frame moving with speed c: each snapshot
    is shifted back by ``c t_m``, differenced in time (second-order centered,
    one-sided at the ends) and shifted forward again.  That yields
    ``u_t + c u_x`` without the O(dt^2) error that pure transport would
    otherwise leave behind.  ``u_t`` is recovered by subtracting ``c u_x``.

    Returns a dict with keys ``"u"``, ``"u_x"``, ..., ``"u_t"`` and ``"convective"``.
    """
    u = ds.u
    T1 = u.shape[1]
    if T1 < 3:
        raise TooFewSnapshots(f"need at least 3 snapshots for time differencing, got {T1}")
    spec = ds.spec
    dt = spec.dt
    times = ds.times
    derivs = spectral_derivatives(u, spec.L, max_order)

    shifts = spec.c * times
    w = np.stack([shift_spectrally(u[:, m], -shifts[m], spec.L) for m in range(T1)], axis=1)
    dw = np.empty_like(w)
    dw[:, 1:-1] = (w[:, 2:] - w[:, :-2]) / (2 * dt)
    dw[:, 0] = (-3 * w[:, 0] + 4 * w[:, 1] - w[:, 2]) / (2 * dt)
    dw[:, -1] = (3 * w[:, -1] - 4 * w[:, -2] + w[:, -3]) / (2 * dt)
    conv = np.stack([shift_spectrally(dw[:, m], shifts[m], spec.L) for m in range(T1)], axis=1)

    out = {term_name((m,)): d for m, d in enumerate(derivs)}
    out["convective"] = conv
    out["u_t"] = conv - spec.c * derivs[1]
    return out


def build_design(ds: SnapshotDataset, lib: TermLibrary | None = None, cfg: RegressionConfig | None = None,
                 derivs: dict | None = None):
    """Design matrix over interior times and the target ``u_t + c u_x``.

    Rows are ordered time-major; with strides ``(st, sx)`` there are
    ``ceil(N/sx) * ceil((T-1)/st)`` rows.
    """
    lib = lib or TermLibrary.default()
    cfg = cfg or RegressionConfig()
    d = derivs if derivs is not None else differentiate(ds)
    T1 = ds.u.shape[1]
    tsel = np.arange(1, T1 - 1)[:: cfg.stride_t]
    xsel = np.arange(ds.spec.N)[:: cfg.stride_x]
    orders = sorted({m for t in lib.terms for m in t})
    sub = {m: d[term_name((m,))][np.ix_(xsel, tsel)].T for m in orders}
    A = lib.evaluate(sub).reshape(-1, len(lib))
    b = d["convective"][np.ix_(xsel, tsel)].T.reshape(-1)
    return A, b


def _ridge(As, b, lam):
    k = As.shape[1]
    if k == 0:
        return np.zeros(0)
    if lam > 0:
        As = np.vstack([As, math.sqrt(lam) * np.eye(k)])
        b = np.concatenate([b, np.zeros(k)])
    return np.linalg.lstsq(As, b, rcond=None)[0]


def sparse_regress(A, b, cfg: RegressionConfig | None = None, names=None, allowed=None) -> SparseModel:
    """Sequential-threshold ridge regression.

    1. ridge solve on the allowed columns;
    2. drop coefficients below the threshold and re-solve until the support is stable;
    3. unregularized least-squares refit on the final support (pruning again if a
       refit coefficient falls under the threshold).

    The ridge penalty acts on unit-norm columns; thresholding uses physical
    coefficient magnitudes.
    """
    cfg = cfg or RegressionConfig()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    nrow, ncol = A.shape
    if nrow <= ncol:
        raise ValueError(f"need more rows than columns, got {A.shape}")
    if names is None:
        names = [f"t{i}" for i in range(ncol)]
    norms = np.linalg.norm(A, axis=0)
    active = norms > 0
    if allowed is not None:
        active &= np.asarray(allowed, dtype=bool)
    safe = np.where(norms > 0, norms, 1.0)
    As = A / safe
    eps = cfg.threshold

    def solve(mask, lam):
        coef = np.zeros(ncol)
        idx = np.flatnonzero(mask)
        coef[idx] = _ridge(As[:, idx], b, lam) / safe[idx]
        return coef

    coef = solve(active, cfg.ridge)
    support = active & (np.abs(coef) >= eps)
    for _ in range(cfg.max_iter):
        coef = solve(support, cfg.ridge)
        new = support & (np.abs(coef) >= eps)
        if np.array_equal(new, support):
            break
        support = new
    while True:
        idx = np.flatnonzero(support)
        if len(idx) and np.linalg.matrix_rank(As[:, idx]) < len(idx):
            raise RankDeficient(f"final support {[names[i] for i in idx]} is rank deficient")
        coef = solve(support, 0.0)
        new = support & (np.abs(coef) >= eps)
        if np.array_equal(new, support):
            break
        support = new
    coef[~support] = 0.0
    resid = b - A @ coef
    return SparseModel(list(names), coef, eps, float(np.sqrt(np.mean(resid ** 2))))


def discover(datasets, cfg: RegressionConfig | None = None, lib: TermLibrary | None = None) -> SparseModel:
    """Stack design matrices of all datasets and regress.

    ``cfg.restrict`` limits the candidate set to the named terms.
    """
    cfg = cfg or RegressionConfig()
    lib = lib or TermLibrary.default()
    datasets = list(datasets)
    if not datasets:
        raise ValueError("discover needs at least one dataset")
    parts = [build_design(ds, lib, cfg) for ds in datasets]
    A = np.concatenate([p[0] for p in parts])
    b = np.concatenate([p[1] for p in parts])
    allowed = None
    if cfg.restrict:
        allowed = np.zeros(len(lib), dtype=bool)
        for name in cfg.restrict:
            allowed[lib.index(name)] = True
    model = sparse_regress(A, b, cfg, lib.names, allowed)
    model.library = lib
    return model
