import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qspecnoise.channels import (ChannelKind, NoisyStepConfig, X, Y, Z, apply_channel, diagonal_action,
                                 make_channel, noisy_step, parse_kind, simulate_noisy)
from qspecnoise.errors import QubitOutOfRange, StrengthOutOfRange
from qspecnoise.field import GridField, ProblemSpec, eval_reference_profile, make_grid
from qspecnoise.quantum import DensityMatrix, StateVector, apply_layer, encode, layer, qft, simulate_ideal

from conftest import embed, random_density

KINDS = list(ChannelKind)
PAULI_FLIPS = [ChannelKind.BIT_FLIP, ChannelKind.BIT_PHASE_FLIP, ChannelKind.DEPOLARIZING]


@pytest.mark.parametrize("kind", KINDS)
def test_zero_strength_is_identity(kind):
    ch = make_channel(kind, 0.0)
    assert len(ch.kraus) == 1
    np.testing.assert_array_equal(ch.kraus[0], np.eye(2))


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("p", [0.0, 0.01, 0.5, 1.0])
def test_kraus_completeness(kind, p):
    ch = make_channel(kind, p)
    total = sum(k.conj().T @ k for k in ch.kraus)
    np.testing.assert_allclose(total, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("bad", [-0.1, 1.1, float("nan")])
def test_strength_out_of_range(bad):
    with pytest.raises(StrengthOutOfRange):
        make_channel("depolarizing", bad)


def test_parse_kind_aliases():
    assert parse_kind("DP") is ChannelKind.DEPOLARIZING
    assert parse_kind("bit-flip") is ChannelKind.BIT_FLIP
    with pytest.raises(ValueError):
        parse_kind("erasure")


def test_pauli_twirl_identity(rng):
    for _ in range(5):
        rho = random_density(2, rng)
        np.testing.assert_allclose((rho + X @ rho @ X + Y @ rho @ Y + Z @ rho @ Z) / 4, np.eye(2) / 2, atol=1e-14)


@pytest.mark.parametrize("p", [0.01, 0.3, 1.0])
def test_depolarizing_closed_form(p, rng):
    ch = make_channel("depolarizing", p)
    for _ in range(5):
        rho = random_density(2, rng)
        np.testing.assert_allclose(ch(rho), (1 - p) * rho + p * np.eye(2) / 2, atol=1e-14)


def test_bit_flip_on_ground_state():
    ch = make_channel("bit_flip", 0.1)
    np.testing.assert_allclose(ch(np.diag([1.0, 0.0]).astype(complex)), np.diag([0.95, 0.05]), atol=1e-15)


def test_apply_channel_identity_and_range(rng):
    rho = DensityMatrix(random_density(8, rng))
    out = apply_channel(rho, make_channel("depolarizing", 0.0), 1)
    np.testing.assert_allclose(out.entries, rho.entries, atol=1e-14)
    with pytest.raises(QubitOutOfRange):
        apply_channel(rho, make_channel("depolarizing", 0.1), 3)
    with pytest.raises(QubitOutOfRange):
        apply_channel(rho, make_channel("depolarizing", 0.1), -1)


@pytest.mark.parametrize("p", [0.05, 0.7])
def test_phase_flip_keeps_diagonal(p, rng, backend):
    rho = DensityMatrix(random_density(16, rng))
    for q in range(4):
        out = apply_channel(rho, make_channel("phase_flip", p), q)
        np.testing.assert_allclose(out.diagonal(), rho.diagonal(), atol=1e-12)


def test_depolarizing_population_on_lowest_qubit(backend):
    p = 0.2
    rho = DensityMatrix.basis(3, 0)
    out = apply_channel(rho, make_channel("depolarizing", p), 0)
    # (1-p)|0><0| + p I/2 on qubit 0 -> population p/2 on |001>
    assert out.diagonal()[1] == pytest.approx(p / 2, abs=1e-15)
    assert out.diagonal()[0] == pytest.approx(1 - p / 2, abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(kind=st.sampled_from(KINDS), p=st.floats(0, 1), seed=st.integers(0, 2 ** 32 - 1),
       q=st.integers(0, 2))
def test_channel_trace_and_positivity(kind, p, seed, q):
    rho = DensityMatrix(random_density(8, np.random.default_rng(seed)))
    out = apply_channel(rho, make_channel(kind, p), q)
    assert abs(np.trace(out.entries).real - 1) <= 1e-12
    assert np.linalg.eigvalsh(out.entries).min() >= -1e-10
    out.check()


@pytest.mark.parametrize("kind", KINDS)
def test_channels_on_distinct_qubits_commute(kind, rng, backend):
    rho = DensityMatrix(random_density(16, rng))
    ch = make_channel(kind, 0.37)
    ab = apply_channel(apply_channel(rho, ch, 0), ch, 2)
    ba = apply_channel(apply_channel(rho, ch, 2), ch, 0)
    np.testing.assert_allclose(ab.entries, ba.entries, atol=1e-12)


def test_apply_channel_matches_dense(rng, backend):
    rho = random_density(8, rng)
    ch = make_channel("amplitude_damping", 0.4)
    for q in range(3):
        dense = sum(embed(k, q, 3) @ rho @ embed(k, q, 3).conj().T for k in ch.kraus)
        np.testing.assert_allclose(apply_channel(DensityMatrix(rho), ch, q).entries, dense, atol=1e-14)


@pytest.mark.parametrize("kind", PAULI_FLIPS)
@pytest.mark.parametrize("p", [0.0, 8.3e-4, 0.1, 1.0])
def test_diagonal_action_universal(kind, p):
    expected = np.array([[1 - p / 2, p / 2], [p / 2, 1 - p / 2]])
    np.testing.assert_allclose(diagonal_action(make_channel(kind, p)), expected, atol=1e-12)


def test_diagonal_action_phase_flip_and_damping():
    np.testing.assert_allclose(diagonal_action(make_channel("phase_flip", 0.3)), np.eye(2), atol=1e-15)
    g = 0.2
    np.testing.assert_allclose(diagonal_action(make_channel("amplitude_damping", g)), [[1, g], [0, 1 - g]], atol=1e-15)


def test_amplitude_damping_drives_to_ground(rng):
    ch = make_channel("amplitude_damping", 0.1)
    rho = random_density(2, rng)
    ground = np.diag([1.0, 0.0])
    dist = np.linalg.norm(rho - ground)
    for _ in range(200):
        rho = ch(rho)
        new = np.linalg.norm(rho - ground)
        assert new <= dist + 1e-15
        dist = new
    assert dist < 1e-4


def test_noisy_step_zero_noise_equals_ideal(rng, backend):
    spec = ProblemSpec(N=16)
    rho = DensityMatrix(random_density(16, rng))
    lay = layer(spec)
    out = noisy_step(rho, lay, NoisyStepConfig(make_channel("depolarizing", 0.0)))
    np.testing.assert_allclose(out.entries, apply_layer(rho, lay).entries, atol=1e-14)


def test_noisy_step_single_qubit_hand_computation():
    p = 0.01
    out = noisy_step(DensityMatrix.basis(1, 0), layer(ProblemSpec(N=2)), NoisyStepConfig(make_channel("dp", p)))
    np.testing.assert_allclose(out.diagonal(), [1 - p / 2, p / 2], atol=1e-15)


def test_phase_flip_spectral_diagonal_invariant_over_many_steps():
    spec = ProblemSpec(N=16)
    f = GridField(eval_reference_profile(make_grid(spec)), 0.0, spec)
    psi = qft(encode(f).state)
    rho = DensityMatrix.from_state(psi)
    P0 = rho.diagonal()
    cfg = NoisyStepConfig(make_channel("phase_flip", 0.05))
    lay = layer(spec)
    for _ in range(100):
        rho = noisy_step(rho, lay, cfg)
    np.testing.assert_allclose(rho.diagonal(), P0, atol=1e-12)
    rho.check()


def test_simulate_noisy_zero_noise_matches_ideal():
    spec = ProblemSpec(N=32)
    f = GridField(eval_reference_profile(make_grid(spec)), 0.0, spec)
    noisy = simulate_noisy(f, 40, make_channel("depolarizing", 0.0), every=10)
    ideal = simulate_ideal(f, 40, every=10)
    assert len(noisy) == len(ideal) == 5
    for a, b in zip(noisy, ideal):
        np.testing.assert_allclose(a.values, b.values, atol=1e-12)


def test_simulate_noisy_attenuates_and_keeps_states_valid():
    spec = ProblemSpec(N=32)
    f = GridField(eval_reference_profile(make_grid(spec)), 0.0, spec)
    fields, states = simulate_noisy(f, 60, make_channel("depolarizing", 0.01), every=20, return_states=True)
    amps = [np.max(np.abs(u.values)) for u in fields]
    assert all(a > b for a, b in zip(amps, amps[1:]))
    for s in states:
        s.check()
