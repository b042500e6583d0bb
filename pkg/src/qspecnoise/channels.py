"""Single-qubit Kraus channels and noisy time stepping of the Rz circuit.

Pauli channels are parameterized so that their action on computational-basis
populations is the symmetric flip matrix ``[[1-p/2, p/2], [p/2, 1-p/2]]``.  In
particular the depolarizing channel is ``(1-p) rho + p I/2``.  Amplitude damping
is an extension used to mimic energy relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass
import enum
import math

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, QubitOutOfRange, StrengthOutOfRange
from .field import GridField
from .quantum import (DensityMatrix, EncodedState, EvolutionLayer, StateVector, apply_layer, decode,
                      encode, iqft, layer, qft)

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class ChannelKind(str, enum.Enum):
    BIT_FLIP = "bit_flip"
    PHASE_FLIP = "phase_flip"
    BIT_PHASE_FLIP = "bit_phase_flip"
    DEPOLARIZING = "depolarizing"
    AMPLITUDE_DAMPING = "amplitude_damping"


_ALIASES = {
    "bitflip": ChannelKind.BIT_FLIP, "bf": ChannelKind.BIT_FLIP,
    "phaseflip": ChannelKind.PHASE_FLIP, "pf": ChannelKind.PHASE_FLIP,
    "bitphaseflip": ChannelKind.BIT_PHASE_FLIP, "bpf": ChannelKind.BIT_PHASE_FLIP,
    "depolarizing": ChannelKind.DEPOLARIZING, "depolarising": ChannelKind.DEPOLARIZING,
    "dp": ChannelKind.DEPOLARIZING,
    "amplitudedamping": ChannelKind.AMPLITUDE_DAMPING, "ad": ChannelKind.AMPLITUDE_DAMPING,
}


def parse_kind(kind) -> ChannelKind:
    if isinstance(kind, ChannelKind):
        return kind
    key = str(kind).strip().lower()
    try:
        return ChannelKind(key)
    except ValueError:
        pass
    try:
        return _ALIASES[key.replace("_", "").replace("-", "")]
    except KeyError:
        names = ", ".join(k.value for k in ChannelKind)
        raise ValueError(f"unknown channel kind {kind!r} (expected one of {names})") from None


@dataclass(frozen=True)
class NoiseChannel:
    kind: ChannelKind
    strength: float
    kraus: np.ndarray  # (m, 2, 2)

    @property
    def is_identity(self) -> bool:
        return len(self.kraus) == 1 and np.allclose(self.kraus[0], I2, atol=0, rtol=0)

    def __call__(self, rho2):
        """Apply to a single-qubit 2x2 density matrix."""
        return sum(k @ rho2 @ k.conj().T for k in self.kraus)


@dataclass(frozen=True)
class NoisyStepConfig:
    """One independent copy of ``channel`` on every qubit after each layer."""

    channel: NoiseChannel


def make_channel(kind, strength: float) -> NoiseChannel:
    kind = parse_kind(kind)
    p = float(strength)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise StrengthOutOfRange(f"channel strength must lie in [0, 1], got {strength!r}")
    if p == 0.0:
        return NoiseChannel(kind, 0.0, I2[None].copy())
    if kind is ChannelKind.AMPLITUDE_DAMPING:
        k0 = np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=np.complex128)
        k1 = np.array([[0, math.sqrt(p)], [0, 0]], dtype=np.complex128)
        ops = [k0, k1]
    elif kind is ChannelKind.DEPOLARIZING:
        a = math.sqrt(1 - 3 * p / 4)
        b = math.sqrt(p / 4)
        ops = [a * I2, b * X, b * Y, b * Z]
    else:
        pauli = {ChannelKind.BIT_FLIP: X, ChannelKind.PHASE_FLIP: Z, ChannelKind.BIT_PHASE_FLIP: Y}[kind]
        ops = [math.sqrt(1 - p / 2) * I2, math.sqrt(p / 2) * pauli]
    return NoiseChannel(kind, p, np.array(ops))


def apply_channel(rho: DensityMatrix, channel: NoiseChannel, qubit: int) -> DensityMatrix:
    n = rho.n
    if not 0 <= qubit < n:
        raise QubitOutOfRange(f"qubit {qubit} outside 0..{n - 1}")
    if channel.is_identity:
        return rho
    return DensityMatrix(_kernels.apply_kraus_1q(rho.entries, channel.kraus, qubit))


def noisy_step(rho: DensityMatrix, lay: EvolutionLayer, cfg: NoisyStepConfig, phases=None) -> DensityMatrix:
    if rho.dim != 1 << lay.n:
        raise DimensionMismatch(f"state dimension {rho.dim} does not match a {lay.n}-qubit layer")
    out = apply_layer(rho, lay, phases)
    for q in range(lay.n):
        out = apply_channel(out, cfg.channel, q)
    return out


def diagonal_action(channel: NoiseChannel) -> np.ndarray:
    """Column-stochastic T with ``[P0', P1'] = T [P0, P1]`` from the basis projectors."""
    T = np.empty((2, 2))
    for b in range(2):
        proj = np.zeros((2, 2), dtype=np.complex128)
        proj[b, b] = 1.0
        T[:, b] = channel(proj).diagonal().real
    return T


def simulate_noisy(ic: GridField, steps: int, channel: NoiseChannel, every: int = 1,
                   method: str = "projection", return_states: bool = False):
    """Density-matrix run of the convection circuit.

    Snapshots are decoded against the ideal trajectory (see ``quantum.decode``).
    With ``return_states`` the spectral-space density matrices are returned as well.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    spec = ic.spec
    enc = encode(ic)
    psi = qft(enc.state)
    rho = DensityMatrix.from_state(psi)
    lay = layer(spec)
    ph = lay.phases()
    cfg = NoisyStepConfig(channel)
    fields, states = [], []
    for m in range(steps + 1):
        if m % every == 0 or m == steps:
            t = ic.time + m * spec.dt
            ref = iqft(psi)
            phys = iqft(rho)
            fields.append(decode(EncodedState(phys, enc.norm_scale, t, spec), ref, method=method))
            if return_states:
                states.append(rho)
        if m < steps:
            rho = noisy_step(rho, lay, cfg, ph)
            psi = StateVector(psi.amplitudes * ph)
    return (fields, states) if return_states else fields
