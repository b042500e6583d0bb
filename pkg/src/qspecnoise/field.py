"""Periodic 1D scalar fields, their Fourier representation and exact transport.

Sign convention: the analysis transform uses the kernel ``exp(+2*pi*i*j*k/N)/sqrt(N)``
and the synthesis transform ``exp(-2*pi*i*j*k/N)/sqrt(N)``.  With this choice a
spectral phase factor ``exp(+i*c*t*(2*pi/L)*k)`` moves a profile in the +x
direction, which is what the Rz evolution layer produces.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
import math

import numpy as np

from .errors import ConfigError

SPHERE_RADIUS = 0.3


@dataclass(frozen=True)
class ProblemSpec:
    """Periodic convection problem on an ``N = 2**n`` point grid."""

    L: float = 2 * math.pi
    c: float = 1.0
    N: int = 256
    dt: float = 0.02

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 2 or self.N & (self.N - 1):
            raise ConfigError(f"N must be a power of two >= 2, got {self.N!r}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L!r}")
        if not math.isfinite(self.c):
            raise ConfigError(f"c must be finite, got {self.c!r}")

    @property
    def n(self) -> int:
        return int(self.N).bit_length() - 1

    @property
    def dx(self) -> float:
        return self.L / self.N

    def to_dict(self):
        return {"L": self.L, "c": self.c, "N": int(self.N), "dt": self.dt}

    @classmethod
    def from_dict(cls, d):
        return cls(L=float(d["L"]), c=float(d["c"]), N=int(d["N"]), dt=float(d["dt"]))


@dataclass(frozen=True)
class GridField:
    values: np.ndarray
    time: float
    spec: ProblemSpec

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.spec.N,):
            raise ConfigError(f"field has shape {v.shape}, expected ({self.spec.N},)")
        if not np.all(np.isfinite(v)):
            raise ConfigError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def x(self):
        return make_grid(self.spec)


@dataclass(frozen=True)
class FourierSpectrum:
    """Coefficients in FFT storage order; ``wavenumbers`` gives the signed k of each slot."""

    coefficients: np.ndarray

    @property
    def wavenumbers(self):
        return wavenumbers(len(self.coefficients))

    def by_wavenumber(self, k: int) -> complex:
        return self.coefficients[k % len(self.coefficients)]


@dataclass(frozen=True)
class InitialConditionSpec:
    """Either a named analytic profile or a seeded random low-mode spectrum."""

    kind: str = "named"  # "named" | "random"
    name: str = "reference"
    seed: int | None = None
    radius8: float = SPHERE_RADIUS
    radius3: float = SPHERE_RADIUS
    params: dict = dc_field(default_factory=dict)


def make_grid(spec: ProblemSpec) -> np.ndarray:
    return np.arange(spec.N) * (spec.L / spec.N)


def wavenumbers(N: int) -> np.ndarray:
    """Signed wavenumber of each storage slot: ``k(j) = j - N*[j >= N/2]``."""
    j = np.arange(N)
    return np.where(j >= N // 2, j - N, j)


def forward_transform(values) -> np.ndarray:
    v = np.asarray(values)
    return np.fft.ifft(v) * math.sqrt(v.shape[-1])


def inverse_transform(coeffs) -> np.ndarray:
    c = np.asarray(coeffs)
    return np.fft.fft(c) / math.sqrt(c.shape[-1])


def spectrum(f: GridField) -> FourierSpectrum:
    return FourierSpectrum(forward_transform(f.values))


def eval_reference_profile(x):
    """Four-mode reference profile used in the attenuation demo."""
    x = np.asarray(x, dtype=float)
    return (np.cos(x) + np.sin(2 * x) + 2 * np.cos(2 * x) + 3 * np.cos(3 * x)) / 10


def shift_spectrally(values, shift: float, L: float) -> np.ndarray:
    """Return samples of ``u(x - shift)`` for a band-limited periodic ``u``."""
    N = len(values)
    k = wavenumbers(N)
    coeffs = forward_transform(values) * np.exp(1j * (2 * math.pi / L) * k * shift)
    # the Nyquist slot has no conjugate partner; keep only its real cosine part
    out = inverse_transform(coeffs)
    return out.real


def exact_solution(f0: GridField, t: float) -> GridField:
    values = shift_spectrally(f0.values, f0.spec.c * t, f0.spec.L)
    return GridField(values, f0.time + t, f0.spec)


def sphere_coefficients(seed, radius8: float = SPHERE_RADIUS, radius3: float = SPHERE_RADIUS):
    """Draw the random spectrum used for randomized initial conditions.

    Returns
    -------
    base : ndarray, shape (8,)
        Uniform point on the 8-sphere of radius ``radius8``.
    extra : ndarray, shape (3,)
        Uniform point on the 3-sphere of radius ``radius3``.
    combined : ndarray, shape (8,)
        ``base`` with ``extra`` added to its first three entries.
    """
    rng = np.random.default_rng(seed)
    base = rng.standard_normal(8)
    base *= radius8 / np.linalg.norm(base)
    extra = rng.standard_normal(3)
    extra *= radius3 / np.linalg.norm(extra)
    combined = base.copy()
    combined[:3] += extra
    return base, extra, combined


def series_from_coefficients(coeffs, x) -> np.ndarray:
    """Evaluate ``sum_k a_k cos(kx) + b_k sin(kx)`` with ``coeffs = (a_1, b_1, a_2, b_2, ...)``."""
    coeffs = np.asarray(coeffs, dtype=float)
    out = np.zeros_like(np.asarray(x, dtype=float))
    for m in range(len(coeffs) // 2):
        k = m + 1
        out += coeffs[2 * m] * np.cos(k * x) + coeffs[2 * m + 1] * np.sin(k * x)
    return out


def random_initial_condition(seed, spec: ProblemSpec, radius8=SPHERE_RADIUS, radius3=SPHERE_RADIUS) -> GridField:
    _, _, combined = sphere_coefficients(seed, radius8, radius3)
    x = make_grid(spec)
    # the series uses wavenumbers of the physical domain, 2*pi/L per mode
    return GridField(series_from_coefficients(combined, x * (2 * math.pi / spec.L)), 0.0, spec)


_NAMED = {
    "reference": eval_reference_profile,
    "sin": np.sin,
    "cos": np.cos,
}


def make_initial_condition(ic: InitialConditionSpec, spec: ProblemSpec) -> GridField:
    if ic.kind == "random":
        if ic.seed is None:
            raise ConfigError("random initial condition requires a seed")
        return random_initial_condition(ic.seed, spec, ic.radius8, ic.radius3)
    if ic.kind == "named":
        try:
            fn = _NAMED[ic.name]
        except KeyError:
            raise ConfigError(f"unknown initial profile {ic.name!r}; choose from {sorted(_NAMED)}") from None
        return GridField(fn(make_grid(spec) * (2 * math.pi / spec.L)), 0.0, spec)
    raise ConfigError(f"unknown initial-condition kind {ic.kind!r}")
