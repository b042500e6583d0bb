"""Pure and mixed states, the exact QFT, and the Rz-layer convection step."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, MissingReference, ZeroFieldError
from .field import GridField, ProblemSpec, forward_transform, inverse_transform, wavenumbers


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=np.complex128))

    @property
    def n(self) -> int:
        return len(self.amplitudes).bit_length() - 1

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def check(self, atol=1e-12):
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1) > atol:
            raise ValueError(f"state norm {norm} differs from 1")


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=np.complex128))

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityMatrix":
        a = psi.amplitudes
        return cls(np.outer(a, a.conj()))

    @classmethod
    def basis(cls, n: int, j: int) -> "DensityMatrix":
        rho = np.zeros((1 << n, 1 << n), dtype=np.complex128)
        rho[j, j] = 1.0
        return cls(rho)

    @property
    def n(self) -> int:
        return self.entries.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def diagonal(self):
        return self.entries.diagonal().real.copy()

    def check(self, atol=1e-12, eig_tol=1e-10):
        r = self.entries
        herm = np.max(np.abs(r - r.conj().T))
        if herm > atol:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(r).real
        if abs(tr - 1) > atol:
            raise ValueError(f"density matrix trace {tr} differs from 1")
        lam = np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min()
        if lam < -eig_tol:
            raise ValueError(f"density matrix has negative eigenvalue {lam:.3g}")


@dataclass(frozen=True)
class EncodedState:
    state: StateVector | DensityMatrix
    norm_scale: float
    time: float = 0.0
    spec: ProblemSpec | None = None


@dataclass(frozen=True)
class EvolutionLayer:
    """One Rz layer: per-qubit angles plus the global phase that makes it exact."""

    angles: np.ndarray
    global_phase: float

    @property
    def n(self) -> int:
        return len(self.angles)

    def phases(self) -> np.ndarray:
        """Diagonal of the composed layer, built gate by gate.

        ``Rz(theta) = diag(exp(-i theta/2), exp(+i theta/2))`` on each qubit.
        """
        n = self.n
        idx = np.arange(1 << n)
        total = np.full(1 << n, self.global_phase)
        for q, theta in enumerate(self.angles):
            bit = (idx >> q) & 1
            total += np.where(bit == 1, theta / 2, -theta / 2)
        return np.exp(1j * total)

    def dense(self) -> np.ndarray:
        return np.diag(self.phases())


def layer(spec: ProblemSpec, steps: int = 1) -> EvolutionLayer:
    """Rz layer advancing ``steps`` time steps (angles scale linearly)."""
    n = spec.n
    a = spec.c * spec.dt * steps * (2 * math.pi / spec.L)
    angles = a * 2.0 ** np.arange(n)
    angles[n - 1] = -angles[n - 1]
    return EvolutionLayer(angles, -spec.c * spec.dt * steps * math.pi / spec.L)


def target_diagonal(spec: ProblemSpec, steps: int = 1) -> np.ndarray:
    """``exp(i c dt (2 pi/L) k(j))`` built directly from the wavenumber map."""
    k = wavenumbers(spec.N)
    return np.exp(1j * spec.c * spec.dt * steps * (2 * math.pi / spec.L) * k)


def encode(f: GridField) -> EncodedState:
    norm = float(np.linalg.norm(f.values))
    if norm == 0.0:
        raise ZeroFieldError("cannot amplitude-encode an identically zero field")
    return EncodedState(StateVector(f.values / norm), norm, f.time, f.spec)


def _qft_dm(rho):
    # F rho F^dagger with F_{kj} = exp(+2 pi i jk/N)/sqrt(N)
    return np.fft.fft(np.fft.ifft(rho, axis=0), axis=1)


def _iqft_dm(rho):
    return np.fft.ifft(np.fft.fft(rho, axis=0), axis=1)


def qft(state):
    if isinstance(state, StateVector):
        return StateVector(forward_transform(state.amplitudes))
    if isinstance(state, DensityMatrix):
        return DensityMatrix(_qft_dm(state.entries))
    raise TypeError(f"unsupported state type {type(state).__name__}")


def iqft(state):
    if isinstance(state, StateVector):
        return StateVector(inverse_transform(state.amplitudes))
    if isinstance(state, DensityMatrix):
        return DensityMatrix(_iqft_dm(state.entries))
    raise TypeError(f"unsupported state type {type(state).__name__}")


def apply_layer(state, lay: EvolutionLayer, phases=None):
    """Apply the diagonal Rz layer; ``phases`` may be passed to skip recomputing it."""
    if state.dim != 1 << lay.n:
        raise DimensionMismatch(f"state dimension {state.dim} does not match a {lay.n}-qubit layer")
    ph = lay.phases() if phases is None else phases
    if isinstance(state, StateVector):
        return StateVector(state.amplitudes * ph)
    return DensityMatrix(_kernels.conjugate_diagonal(state.entries, ph))


def decode(enc: EncodedState, reference: StateVector | None = None, method: str = "projection",
           return_residual: bool = False):
    """Turn an encoded physical-space state back into a field.

    Pure states map to ``norm_scale * Re(amplitudes)``.  A density matrix needs
    the ideal physical-space state at the same time as ``reference``:

    * ``"projection"``: ``u_j = s Re<j|rho|ref> / sqrt(<ref|rho|ref>)``
    * ``"sqrt_diagonal"``: ``u_j = s sign(Re ref_j) sqrt(<j|rho|j>)``
    """
    st = enc.state
    spec = enc.spec
    if isinstance(st, StateVector):
        a = st.amplitudes * enc.norm_scale
        residual = float(np.max(np.abs(a.imag))) if len(a) else 0.0
        out = GridField(a.real, enc.time, spec)
        return (out, residual) if return_residual else out
    if reference is None:
        raise MissingReference("decoding a density matrix requires the ideal reference state")
    ref = reference.amplitudes
    rho = st.entries
    if method == "projection":
        proj = rho @ ref
        weight = np.vdot(ref, proj).real
        vals = proj / math.sqrt(max(weight, 1e-300)) * enc.norm_scale
    elif method == "sqrt_diagonal":
        vals = np.sign(ref.real) * np.sqrt(np.clip(rho.diagonal().real, 0.0, None)) * enc.norm_scale
        vals = vals.astype(np.complex128)
    else:
        raise ValueError(f"unknown reconstruction method {method!r}")
    out = GridField(vals.real, enc.time, spec)
    residual = float(np.max(np.abs(vals.imag)))
    return (out, residual) if return_residual else out


def simulate_ideal(ic: GridField, steps: int, every: int = 1) -> list[GridField]:
    """Noiseless state-vector run; returns snapshots at steps ``0, every, 2*every, ...``."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    spec = ic.spec
    enc = encode(ic)
    psi = qft(enc.state)
    ph = layer(spec).phases()
    out = []
    for m in range(steps + 1):
        if m % every == 0 or m == steps:
            phys = iqft(psi)
            t = ic.time + m * spec.dt
            out.append(decode(EncodedState(phys, enc.norm_scale, t, spec)))
        if m < steps:
            psi = StateVector(psi.amplitudes * ph)
    return out
